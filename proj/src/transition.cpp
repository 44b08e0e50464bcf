#include "csp/transition.hpp"

#include <algorithm>
#include <stdexcept>

namespace csp {

TransitionMatrix::TransitionMatrix(std::vector<std::vector<Entry>> rows) {
  offsets_.reserve(rows.size() + 1);
  offsets_.push_back(0);
  for (auto& row : rows) {
    std::sort(row.begin(), row.end(), [](const Entry& a, const Entry& b) { return a.to < b.to; });
    for (const Entry& e : row) {
      if (e.to >= rows.size()) throw std::out_of_range("transition successor out of range");
      if (!entries_.empty() && entries_.size() > offsets_.back() && entries_.back().to == e.to) {
        entries_.back().p += e.p;
      } else {
        entries_.push_back(e);
      }
    }
    offsets_.push_back(entries_.size());
  }
}

TransitionMatrix TransitionMatrix::from_dense(const std::vector<std::vector<double>>& dense) {
  std::vector<std::vector<Entry>> rows(dense.size());
  for (std::size_t i = 0; i < dense.size(); ++i) {
    if (dense[i].size() != dense.size()) throw std::invalid_argument("dense transition matrix must be square");
    for (std::size_t j = 0; j < dense[i].size(); ++j) {
      if (dense[i][j] != 0.0) rows[i].push_back({j, dense[i][j]});
    }
  }
  return TransitionMatrix(std::move(rows));
}

TransitionMatrix TransitionMatrix::from_csr(std::vector<std::size_t> offsets, std::vector<Entry> entries) {
  if (offsets.empty() || offsets.front() != 0 || offsets.back() != entries.size() ||
      !std::is_sorted(offsets.begin(), offsets.end())) {
    throw std::invalid_argument("malformed CSR offsets");
  }
  const std::size_t n = offsets.size() - 1;
  for (const Entry& e : entries) {
    if (e.to >= n) throw std::invalid_argument("CSR successor out of range");
  }
  TransitionMatrix m;
  m.offsets_ = std::move(offsets);
  m.entries_ = std::move(entries);
  return m;
}

double TransitionMatrix::at(StateIndex i, StateIndex j) const {
  for (const Entry& e : row(i)) {
    if (e.to == j) return e.p;
  }
  return 0.0;
}

double TransitionMatrix::row_sum(StateIndex i) const {
  double s = 0.0;
  for (const Entry& e : row(i)) s += e.p;
  return s;
}

std::vector<std::vector<double>> TransitionMatrix::to_dense() const {
  std::vector<std::vector<double>> dense(size(), std::vector<double>(size(), 0.0));
  for (std::size_t i = 0; i < size(); ++i) {
    for (const Entry& e : row(i)) dense[i][e.to] = e.p;
  }
  return dense;
}

}  // namespace csp
