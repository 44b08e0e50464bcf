#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace csp {

using StateIndex = std::size_t;

/// Row-stochastic transition matrix in compressed sparse row form. Grid
/// dynamics have at most five successors per state, so dense N x N storage is
/// never materialized.
class TransitionMatrix {
 public:
  struct Entry {
    StateIndex to;
    double p;

    bool operator==(const Entry&) const = default;
  };

  TransitionMatrix() = default;

  /// Rows may list a successor more than once; duplicates are merged by
  /// summing and each row is sorted by successor index.
  explicit TransitionMatrix(std::vector<std::vector<Entry>> rows);

  static TransitionMatrix from_dense(const std::vector<std::vector<double>>& dense);

  std::size_t size() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t nonzeros() const noexcept { return entries_.size(); }

  std::span<const Entry> row(StateIndex i) const {
    return {entries_.data() + offsets_[i], entries_.data() + offsets_[i + 1]};
  }

  double at(StateIndex i, StateIndex j) const;
  double row_sum(StateIndex i) const;
  std::vector<std::vector<double>> to_dense() const;

  const std::vector<std::size_t>& offsets() const noexcept { return offsets_; }
  const std::vector<Entry>& entries() const noexcept { return entries_; }

  /// Rebuilds from raw CSR arrays (used by the cache reader).
  static TransitionMatrix from_csr(std::vector<std::size_t> offsets, std::vector<Entry> entries);

  bool operator==(const TransitionMatrix&) const = default;

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
};

}  // namespace csp
