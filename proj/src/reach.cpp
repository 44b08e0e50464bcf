#include "csp/reach.hpp"

#include <stdexcept>

namespace csp {

double reach(const ArrivalModel& model, StateIndex i, int start_time, const DeadlineDistribution& deadline,
             CdfMode mode, bool inclusive) {
  if (const auto* det = std::get_if<Deterministic>(&deadline)) {
    return cdf_eval(model, i, last_admissible_offset(det->time, start_time, inclusive), mode);
  }
  double total = 0.0;
  for (const auto& [t, p] : std::get<DiscretePmf>(deadline).support) {
    total += p * cdf_eval(model, i, last_admissible_offset(t, start_time, inclusive), mode);
  }
  return total;
}

int period_end_deadline(const EnvironmentSchedule& schedule, std::size_t k, bool inclusive) {
  return inclusive ? schedule.end(k) : schedule.end(k) + 1;
}

bool EnvironmentReach::operator==(const EnvironmentReach& other) const {
  if (tables.size() != other.tables.size()) return false;
  for (std::size_t j = 0; j < tables.size(); ++j) {
    const auto& a = tables[j];
    const auto& b = other.tables[j];
    if (static_cast<bool>(a) != static_cast<bool>(b)) return false;
    if (a && !(*a == *b)) return false;
  }
  return true;
}

EnvironmentReach build_environment_reach(const EnvironmentArrivals& arrivals, std::size_t states, int horizon,
                                         CdfMode mode, Execution execution) {
  EnvironmentReach out;
  out.tables.resize(arrivals.models.size());

  auto build = [&](StateIndex j) {
    const auto& model = arrivals.models[j];
    if (!model) return;
    if (mode == CdfMode::Exact) {
      out.tables[j] = model->exact;
      return;
    }
    auto table = std::make_shared<CdfTable>(states, horizon);
    for (int t = 0; t <= horizon; ++t) {
      for (StateIndex i = 0; i < states; ++i) (*table)(i, t) = cdf_eval(*model, i, t, mode);
    }
    out.tables[j] = std::move(table);
  };

  const auto count = static_cast<std::ptrdiff_t>(out.tables.size());
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t j = 0; j < count; ++j) build(static_cast<StateIndex>(j));
  } else {
    for (std::ptrdiff_t j = 0; j < count; ++j) build(static_cast<StateIndex>(j));
  }
  return out;
}

ReachabilityTensor::ReachabilityTensor(std::vector<std::shared_ptr<const EnvironmentReach>> deterministic,
                                       std::size_t states, std::size_t goals, int horizon,
                                       std::vector<double> goal_values)
    : deterministic_(std::move(deterministic)),
      states_(states),
      goals_(goals),
      horizon_(horizon),
      goal_values_(std::move(goal_values)) {
  if (goal_values_.size() != deterministic_.size() * goals_ * states_ * states_) {
    throw std::invalid_argument("goal slice storage size mismatch");
  }
}

bool ReachabilityTensor::has_target(std::size_t k, StateIndex j) const {
  return static_cast<bool>(deterministic_.at(k)->tables.at(j));
}

double ReachabilityTensor::deterministic(std::size_t k, StateIndex j, int t, StateIndex i) const {
  if (t < 0) return 0.0;
  const auto& table = deterministic_[k]->tables[j];
  if (!table) return 0.0;
  return (*table)(i, std::min(t, horizon_));
}

std::span<const double> ReachabilityTensor::deterministic_slice(std::size_t k, StateIndex j, int t) const {
  const auto& table = deterministic_.at(k)->tables.at(j);
  if (!table || t < 0) return {};
  return table->at_horizon(std::min(t, horizon_));
}

ReachabilityTensor build_tensor(const ArrivalSet& arrivals,
                                std::vector<std::shared_ptr<const EnvironmentReach>> deterministic,
                                const EnvironmentSchedule& schedule, const GoalSet& goals, CdfMode mode,
                                bool inclusive, Execution execution) {
  const std::size_t envs = schedule.count();
  if (arrivals.size() != envs || deterministic.size() != envs) {
    throw std::invalid_argument("arrival/reach inputs do not cover every environment");
  }
  const std::size_t n = envs == 0 ? 0 : arrivals.front()->models.size();
  const std::size_t goal_count = goals.size();
  std::vector<double> values(envs * goal_count * n * n, 0.0);

  // One (k, c, j) slice per iteration.
  const auto slices = static_cast<std::ptrdiff_t>(envs * goal_count * n);
  auto fill = [&](std::ptrdiff_t flat) {
    const auto idx = static_cast<std::size_t>(flat);
    const std::size_t j = idx % n;
    const std::size_t c = (idx / n) % goal_count;
    const std::size_t k = idx / (n * goal_count);
    const ArrivalModel* model = arrival_model(arrivals, k, j);
    if (!model) return;
    double* out = values.data() + idx * n;
    const int start = schedule.start(k);
    for (StateIndex i = 0; i < n; ++i) out[i] = reach(*model, i, start, goals[c].deadline, mode, inclusive);
  };
  if (execution == Execution::Parallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t s = 0; s < slices; ++s) fill(s);
  } else {
    for (std::ptrdiff_t s = 0; s < slices; ++s) fill(s);
  }

  return ReachabilityTensor(std::move(deterministic), n, goal_count, schedule.horizon, std::move(values));
}

ReachabilityTensor build_tensor(const ArrivalSet& arrivals, const EnvironmentSchedule& schedule,
                                const GoalSet& goals, CdfMode mode, bool inclusive, Execution execution) {
  std::vector<std::shared_ptr<const EnvironmentReach>> deterministic;
  for (std::size_t k = 0; k < schedule.count(); ++k) {
    const std::size_t n = arrivals.at(k)->models.size();
    // Environments sharing arrival models share deterministic slices too.
    std::shared_ptr<const EnvironmentReach> shared;
    for (std::size_t prev = 0; prev < k; ++prev) {
      if (arrivals[prev] == arrivals[k]) shared = deterministic[prev];
    }
    if (!shared) {
      shared = std::make_shared<const EnvironmentReach>(
          build_environment_reach(*arrivals[k], n, schedule.horizon, mode, execution));
    }
    deterministic.push_back(std::move(shared));
  }
  return build_tensor(arrivals, std::move(deterministic), schedule, goals, mode, inclusive, execution);
}

}  // namespace csp
