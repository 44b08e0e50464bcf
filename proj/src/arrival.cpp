#include "csp/arrival.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/special_functions/gamma.hpp>

#include "csp/error.hpp"

namespace csp {

namespace {

constexpr double kSolveResidual = 1e-10;

}  // namespace

const char* to_string(CdfMode mode) noexcept { return mode == CdfMode::Exact ? "exact" : "gamma"; }

CdfTable::CdfTable(std::size_t states, int horizon)
    : states_(states), horizon_(horizon), data_(states * static_cast<std::size_t>(horizon + 1), 0.0) {}

CdfTable::CdfTable(std::size_t states, int horizon, std::vector<double> data)
    : states_(states), horizon_(horizon), data_(std::move(data)) {
  if (data_.size() != states * static_cast<std::size_t>(horizon + 1)) {
    throw std::invalid_argument("CDF table size mismatch");
  }
}

HittingMoments hitting_moments(const TransitionMatrix& u, StateIndex target) {
  const std::size_t n = u.size();
  if (target >= n) throw std::invalid_argument("target state out of range");
  if (std::abs(u.at(target, target) - 1.0) > 1e-12) {
    throw std::invalid_argument("controlled dynamics are not absorbing at the target");
  }

  // States that can reach the target along the support of u.
  std::vector<std::vector<StateIndex>> predecessors(n);
  for (StateIndex i = 0; i < n; ++i) {
    for (const auto& e : u.row(i)) {
      if (e.p > 0.0 && e.to != i) predecessors[e.to].push_back(i);
    }
  }
  std::vector<char> reaches(n, 0);
  std::vector<StateIndex> frontier{target};
  reaches[target] = 1;
  while (!frontier.empty()) {
    const StateIndex s = frontier.back();
    frontier.pop_back();
    for (StateIndex p : predecessors[s]) {
      if (!reaches[p]) {
        reaches[p] = 1;
        frontier.push_back(p);
      }
    }
  }

  HittingMoments out;
  out.mean.assign(n, 0.0);
  out.variance.assign(n, 0.0);
  out.unreachable.assign(n, 0);

  std::vector<std::ptrdiff_t> slot(n, -1);
  std::ptrdiff_t m = 0;
  for (StateIndex i = 0; i < n; ++i) {
    if (!reaches[i]) {
      out.unreachable[i] = 1;
    } else if (i != target) {
      slot[i] = m++;
    }
  }
  for (StateIndex i = 0; i < n; ++i) {
    if (slot[i] < 0) continue;
    for (const auto& e : u.row(i)) {
      if (e.p > 0.0 && !reaches[e.to]) {
        throw std::invalid_argument("state " + std::to_string(i) +
                                    " leaks probability into a region that cannot reach the target");
      }
    }
  }
  if (m == 0) return out;

  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(m, m);
  for (StateIndex i = 0; i < n; ++i) {
    if (slot[i] < 0) continue;
    for (const auto& e : u.row(i)) {
      if (slot[e.to] >= 0) a(slot[i], slot[e.to]) -= e.p;
    }
  }
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(m);
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd mean = lu.solve(ones);
  const Eigen::VectorXd second = lu.solve(mean);
  const double r1 = (a * mean - ones).cwiseAbs().maxCoeff();
  const double r2 = (a * second - mean).cwiseAbs().maxCoeff();
  if (!(r1 < kSolveResidual) || !(r2 < kSolveResidual * std::max(1.0, mean.cwiseAbs().maxCoeff()))) {
    throw SingularSystem("hitting-time system for target " + std::to_string(target) + " is singular");
  }

  for (StateIndex i = 0; i < n; ++i) {
    if (slot[i] < 0) continue;
    const double mu = mean(slot[i]);
    out.mean[i] = mu;
    out.variance[i] = std::max(0.0, 2.0 * second(slot[i]) - mu * mu - mu);
  }
  return out;
}

GammaFit gamma_fit(std::span<const double> mean, std::span<const double> variance, std::span<const char> unreachable) {
  if (mean.size() != variance.size()) throw std::invalid_argument("moment vectors differ in length");
  const std::size_t n = mean.size();
  GammaFit fit;
  fit.alpha.assign(n, 0.0);
  fit.beta.assign(n, 0.0);
  fit.kind.assign(n, ArrivalKind::Gamma);
  for (std::size_t i = 0; i < n; ++i) {
    const double mu = mean[i];
    const double var = variance[i];
    if (!unreachable.empty() && unreachable[i]) {
      fit.kind[i] = ArrivalKind::Unreachable;
    } else if (mu <= 0.0) {
      fit.kind[i] = ArrivalKind::Immediate;
    } else if (var <= 1e-12 * std::max(1.0, mu * mu)) {
      fit.kind[i] = ArrivalKind::Step;
    } else {
      fit.alpha[i] = mu * mu / var;
      fit.beta[i] = mu / var;
    }
  }
  return fit;
}

double gamma_cdf(ArrivalKind kind, double alpha, double beta, double mean, double t) {
  if (t < 0.0) return 0.0;
  switch (kind) {
    case ArrivalKind::Unreachable:
      return 0.0;
    case ArrivalKind::Immediate:
      return 1.0;
    case ArrivalKind::Step:
      return t + 1e-9 >= mean ? 1.0 : 0.0;
    case ArrivalKind::Gamma:
      return t == 0.0 ? 0.0 : boost::math::gamma_p(alpha, beta * t);
  }
  return 0.0;
}

CdfTable exact_cdf(const TransitionMatrix& u, StateIndex target, int horizon) {
  if (horizon < 0) throw std::invalid_argument("horizon must be non-negative");
  const std::size_t n = u.size();
  if (target >= n) throw std::invalid_argument("target state out of range");

  CdfTable table(n, horizon);
  // survival[i] = Pr(A_i > t)
  std::vector<double> survival(n, 1.0);
  survival[target] = 0.0;
  std::vector<double> next(n, 0.0);
  for (StateIndex i = 0; i < n; ++i) table(i, 0) = 1.0 - survival[i];

  for (int t = 1; t <= horizon; ++t) {
    for (StateIndex i = 0; i < n; ++i) {
      if (i == target) {
        next[i] = 0.0;
        continue;
      }
      double s = 0.0;
      for (const auto& e : u.row(i)) s += e.p * survival[e.to];
      next[i] = std::clamp(s, 0.0, survival[i]);
    }
    survival.swap(next);
    for (StateIndex i = 0; i < n; ++i) table(i, t) = 1.0 - survival[i];
  }
  return table;
}

bool ArrivalModel::operator==(const ArrivalModel& other) const {
  const bool tables_equal = (!exact && !other.exact) || (exact && other.exact && *exact == *other.exact);
  return target == other.target && horizon == other.horizon && mean == other.mean && variance == other.variance &&
         gamma.alpha == other.gamma.alpha && gamma.beta == other.gamma.beta && gamma.kind == other.gamma.kind &&
         unreachable == other.unreachable && tables_equal;
}

ArrivalModel build_arrival_model(const TransitionMatrix& u, StateIndex target, int horizon, CdfMode mode) {
  ArrivalModel model;
  model.target = target;
  model.horizon = horizon;
  HittingMoments moments = hitting_moments(u, target);
  model.gamma = gamma_fit(moments.mean, moments.variance, moments.unreachable);
  model.mean = std::move(moments.mean);
  model.variance = std::move(moments.variance);
  model.unreachable = std::move(moments.unreachable);
  if (mode == CdfMode::Exact) model.exact = std::make_shared<const CdfTable>(exact_cdf(u, target, horizon));
  return model;
}

double cdf_eval(const ArrivalModel& model, StateIndex i, int t, CdfMode mode) {
  if (t < 0 || model.unreachable[i]) return 0.0;
  if (mode == CdfMode::Exact) {
    if (!model.exact) throw std::logic_error("arrival model has no exact CDF table");
    return (*model.exact)(i, std::min(t, model.horizon));
  }
  return gamma_cdf(model.gamma.kind[i], model.gamma.alpha[i], model.gamma.beta[i], model.mean[i],
                   static_cast<double>(t));
}

EnvironmentArrivals build_environment_arrivals(const EnvironmentPolicies& policies, int horizon, CdfMode mode,
                                               Execution execution) {
  const std::size_t n = policies.slices.size();
  EnvironmentArrivals out;
  out.models.resize(n);
  std::vector<std::exception_ptr> failures(n);

  auto build = [&](StateIndex j) {
    const auto& slice = policies.slices[j];
    if (!slice) return;
    try {
      out.models[j] = build_arrival_model(slice->u, j, horizon, mode);
    } catch (...) {
      failures[j] = std::current_exception();
    }
  };

  const auto count = static_cast<std::ptrdiff_t>(n);
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < count; ++j) build(static_cast<StateIndex>(j));
  } else {
    for (std::ptrdiff_t j = 0; j < count; ++j) build(static_cast<StateIndex>(j));
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return out;
}

const ArrivalModel* arrival_model(const ArrivalSet& arrivals, std::size_t k, StateIndex target) {
  const auto& slot = arrivals.at(k)->models.at(target);
  return slot ? &*slot : nullptr;
}

}  // namespace csp
