#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "csp/execution.hpp"
#include "csp/lmdp.hpp"
#include "csp/transition.hpp"

namespace csp {

enum class CdfMode { Exact, Gamma };

const char* to_string(CdfMode mode) noexcept;

/// Hitting-time CDF table F(i, t) = Pr(A_i <= t) for t in [0, horizon].
/// Stored horizon-major so a fixed-horizon slice over states is contiguous.
class CdfTable {
 public:
  CdfTable() = default;
  CdfTable(std::size_t states, int horizon);
  CdfTable(std::size_t states, int horizon, std::vector<double> data);

  std::size_t states() const noexcept { return states_; }
  int horizon() const noexcept { return horizon_; }

  double operator()(StateIndex i, int t) const { return data_[static_cast<std::size_t>(t) * states_ + i]; }
  double& operator()(StateIndex i, int t) { return data_[static_cast<std::size_t>(t) * states_ + i]; }

  std::span<const double> at_horizon(int t) const {
    return {data_.data() + static_cast<std::size_t>(t) * states_, states_};
  }
  const std::vector<double>& data() const noexcept { return data_; }

  bool operator==(const CdfTable&) const = default;

 private:
  std::size_t states_ = 0;
  int horizon_ = -1;
  std::vector<double> data_;
};

struct HittingMoments {
  std::vector<double> mean;
  /// Second central moment (variance) of the hitting time.
  std::vector<double> variance;
  std::vector<char> unreachable;
};

/// Absorbing-chain moments: mean = (I - S)^-1 1 and
/// variance = 2 (I - S)^-1 mean - mean^2 - mean, with S the transient block
/// (target row and column removed). States that never reach the target are
/// flagged rather than solved. Throws SingularSystem if the reachable block
/// cannot be solved to a 1e-10 residual, and std::invalid_argument if the
/// chain is not absorbing at the target or leaks mass into a region that
/// cannot reach it.
HittingMoments hitting_moments(const TransitionMatrix& u, StateIndex target);

/// How a state's CDF is represented in Gamma mode.
enum class ArrivalKind : char { Gamma, Immediate, Step, Unreachable };

struct GammaFit {
  std::vector<double> alpha;
  std::vector<double> beta;
  std::vector<ArrivalKind> kind;
};

/// Moment-matched gamma: alpha = mean^2 / var, beta = mean / var. Zero mean is
/// immediate arrival; zero variance with positive mean is a step at the mean.
GammaFit gamma_fit(std::span<const double> mean, std::span<const double> variance,
                   std::span<const char> unreachable = {});

/// Evaluates one state's gamma-mode CDF at t (no continuity correction).
double gamma_cdf(ArrivalKind kind, double alpha, double beta, double mean, double t);

/// F(i, t) = 1 - (S^t 1)_i by repeated sparse products.
CdfTable exact_cdf(const TransitionMatrix& u, StateIndex target, int horizon);

struct ArrivalModel {
  StateIndex target = 0;
  int horizon = 0;
  std::vector<double> mean;
  std::vector<double> variance;
  GammaFit gamma;
  std::vector<char> unreachable;
  /// Present when built in Exact mode.
  std::shared_ptr<const CdfTable> exact;

  bool operator==(const ArrivalModel& other) const;
};

ArrivalModel build_arrival_model(const TransitionMatrix& u, StateIndex target, int horizon, CdfMode mode);

/// F(i, t). Exact mode reads the table with t clipped to the horizon; Gamma
/// mode evaluates the regularized lower incomplete gamma. Negative t gives 0,
/// unreachable states give 0.
double cdf_eval(const ArrivalModel& model, StateIndex i, int t, CdfMode mode);

/// Arrival models for every target slice of one obstacle set.
struct EnvironmentArrivals {
  std::vector<std::optional<ArrivalModel>> models;

  bool operator==(const EnvironmentArrivals&) const = default;
};

EnvironmentArrivals build_environment_arrivals(const EnvironmentPolicies& policies, int horizon, CdfMode mode,
                                               Execution execution = Execution::Parallel);

/// Arrival models indexed by environment; environments that share an
/// obstacle set share the pointer.
using ArrivalSet = std::vector<std::shared_ptr<const EnvironmentArrivals>>;

/// nullptr when the target is blocked in environment k.
const ArrivalModel* arrival_model(const ArrivalSet& arrivals, std::size_t k, StateIndex target);

}  // namespace csp
