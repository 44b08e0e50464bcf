#include "csp/cache.hpp"

#include <cstring>
#include <fstream>
#include <iterator>
#include <random>
#include <stdexcept>
#include <system_error>

#include <openssl/evp.h>

namespace csp {

namespace {

constexpr char kMagic[8] = {'C', 'S', 'P', 'C', 'A', 'C', 'H', 'E'};

}  // namespace

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (std::uint8_t b : digest) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

struct Sha256::State {
  EVP_MD_CTX* ctx = nullptr;
};

Sha256::Sha256() : state_(std::make_unique<State>()) {
  state_->ctx = EVP_MD_CTX_new();
  if (!state_->ctx || EVP_DigestInit_ex(state_->ctx, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 initialization failed");
  }
}

Sha256::~Sha256() {
  if (state_ && state_->ctx) EVP_MD_CTX_free(state_->ctx);
}

Sha256& Sha256::update(std::span<const std::byte> bytes) {
  EVP_DigestUpdate(state_->ctx, bytes.data(), bytes.size());
  return *this;
}

Sha256& Sha256::update(std::string_view text) {
  EVP_DigestUpdate(state_->ctx, text.data(), text.size());
  return *this;
}

Digest Sha256::finish() {
  Digest d{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(state_->ctx, d.data(), &len);
  return d;
}

Digest sha256(std::span<const std::byte> bytes) { return Sha256().update(bytes).finish(); }

void ByteWriter::str(std::string_view s) {
  u64(s.size());
  for (char c : s) bytes_.push_back(static_cast<std::byte>(c));
}

void ByteWriter::f64s(std::span<const double> values) {
  u64(values.size());
  for (double v : values) f64(v);
}

void ByteReader::need(std::size_t n) const {
  if (bytes_.size() - pos_ < n) throw std::runtime_error("truncated payload");
}

std::string ByteReader::str() {
  const std::uint64_t n = u64();
  need(n);
  std::string s(n, '\0');
  for (std::size_t i = 0; i < n; ++i) s[i] = static_cast<char>(bytes_[pos_ + i]);
  pos_ += n;
  return s;
}

std::vector<double> ByteReader::f64s() {
  const std::uint64_t n = u64();
  need(n * 8);
  std::vector<double> out(n);
  for (auto& v : out) v = f64();
  return out;
}

ArtifactCache::ArtifactCache(std::filesystem::path directory) : directory_(std::move(directory)) {
  if (!directory_.empty()) std::filesystem::create_directories(directory_);
}

std::filesystem::path ArtifactCache::entry_path(std::string_view kind, const Digest& key) const {
  return directory_ / (std::string(kind) + "-" + to_hex(key) + ".bin");
}

std::optional<std::vector<std::byte>> ArtifactCache::load(std::string_view kind, const Digest& key) {
  if (!enabled()) return std::nullopt;
  const auto path = entry_path(kind, key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::span<const std::byte> bytes(reinterpret_cast<const std::byte*>(raw.data()), raw.size());

  auto corrupt = [&](const std::string& why) -> std::optional<std::vector<std::byte>> {
    warnings_.push_back("corrupted cache entry " + path.string() + " (" + why + "); recomputing");
    return std::nullopt;
  };

  try {
    if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
      return corrupt("bad magic");
    }
    ByteReader r(bytes.subspan(sizeof(kMagic)));
    if (r.u32() != kVersion) return corrupt("version mismatch");
    if (r.str() != kind) return corrupt("kind mismatch");
    Digest stored_key{};
    for (auto& b : stored_key) b = r.u8();
    if (stored_key != key) return corrupt("key mismatch");
    const std::uint64_t size = r.u64();
    Digest checksum{};
    for (auto& b : checksum) b = r.u8();
    const std::size_t header = bytes.size() - size;
    if (size > bytes.size()) return corrupt("truncated");
    const auto payload = bytes.subspan(header);
    if (sha256(payload) != checksum) return corrupt("bad checksum");
    return std::vector<std::byte>(payload.begin(), payload.end());
  } catch (const std::exception& e) {
    return corrupt(e.what());
  }
}

void ArtifactCache::store(std::string_view kind, const Digest& key, std::span<const std::byte> payload) {
  if (!enabled()) return;
  ByteWriter w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kVersion);
  w.str(kind);
  for (auto b : key) w.u8(b);
  w.u64(payload.size());
  for (auto b : sha256(payload)) w.u8(b);
  w.bytes(payload);

  const auto path = entry_path(kind, key);
  std::random_device rd;
  auto tmp = path;
  tmp += ".tmp" + std::to_string(rd());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    const auto& data = w.data();
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw std::runtime_error("failed to write cache entry " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace csp
