#pragma once

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace csp {

using Digest = std::array<std::uint8_t, 32>;

std::string to_hex(const Digest& digest);

/// Incremental SHA-256.
class Sha256 {
 public:
  Sha256();
  ~Sha256();
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  Sha256& update(std::span<const std::byte> bytes);
  Sha256& update(std::string_view text);
  Digest finish();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

Digest sha256(std::span<const std::byte> bytes);

/// Little-endian binary writer for cache payloads and content keys.
class ByteWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<std::byte>(v)); }
  void u32(std::uint32_t v) { put(v); }
  void u64(std::uint64_t v) { put(v); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v)); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s);
  void bytes(std::span<const std::byte> b) { bytes_.insert(bytes_.end(), b.begin(), b.end()); }
  void f64s(std::span<const double> values);

  const std::vector<std::byte>& data() const noexcept { return bytes_; }
  std::vector<std::byte> take() { return std::move(bytes_); }

 private:
  template <typename U>
  void put(U v) {
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      bytes_.push_back(static_cast<std::byte>((v >> (8 * b)) & 0xFFu));
    }
  }

  std::vector<std::byte> bytes_;
};

/// Reader counterpart; throws std::runtime_error on truncated input.
class ByteReader {
 public:
  explicit ByteReader(std::span<const std::byte> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get<std::uint8_t>()); }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  std::uint64_t u64() { return get<std::uint64_t>(); }
  std::int64_t i64() { return static_cast<std::int64_t>(get<std::uint64_t>()); }
  double f64() { return std::bit_cast<double>(get<std::uint64_t>()); }
  std::string str();
  std::vector<double> f64s();
  bool done() const noexcept { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const;

  template <typename U>
  U get() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) {
      v |= static_cast<U>(static_cast<U>(std::to_integer<std::uint8_t>(bytes_[pos_ + b])) << (8 * b));
    }
    pos_ += sizeof(U);
    return v;
  }

  std::span<const std::byte> bytes_;
  std::size_t pos_ = 0;
};

/// Content-addressed artifact store. Entry layout:
///
///   "CSPCACHE" | u32 version | str kind | key[32] | u64 size | sha256(payload)[32] | payload
///
/// Entries are written to a temporary file and renamed into place. A failed
/// checksum or header check is reported as a warning and treated as a miss.
class ArtifactCache {
 public:
  static constexpr std::uint32_t kVersion = 1;

  /// Disabled cache: every load misses, stores are dropped.
  ArtifactCache() = default;
  explicit ArtifactCache(std::filesystem::path directory);

  bool enabled() const noexcept { return !directory_.empty(); }
  const std::filesystem::path& directory() const noexcept { return directory_; }

  std::filesystem::path entry_path(std::string_view kind, const Digest& key) const;

  std::optional<std::vector<std::byte>> load(std::string_view kind, const Digest& key);
  void store(std::string_view kind, const Digest& key, std::span<const std::byte> payload);

  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::filesystem::path directory_;
  std::vector<std::string> warnings_;
};

}  // namespace csp
