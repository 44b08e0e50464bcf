#include "csp/serialize.hpp"

#include <stdexcept>

#include "csp/cache.hpp"

namespace csp {

namespace {

void put_matrix(ByteWriter& w, const TransitionMatrix& m) {
  w.u64(m.offsets().size());
  for (std::size_t o : m.offsets()) w.u64(o);
  w.u64(m.entries().size());
  for (const auto& e : m.entries()) {
    w.u64(e.to);
    w.f64(e.p);
  }
}

TransitionMatrix get_matrix(ByteReader& r) {
  std::vector<std::size_t> offsets(r.u64());
  for (auto& o : offsets) o = r.u64();
  std::vector<TransitionMatrix::Entry> entries(r.u64());
  for (auto& e : entries) {
    e.to = r.u64();
    e.p = r.f64();
  }
  return TransitionMatrix::from_csr(std::move(offsets), std::move(entries));
}

void put_chars(ByteWriter& w, const std::vector<char>& v) {
  w.u64(v.size());
  for (char c : v) w.u8(static_cast<std::uint8_t>(c));
}

std::vector<char> get_chars(ByteReader& r) {
  std::vector<char> v(r.u64());
  for (auto& c : v) c = static_cast<char>(r.u8());
  return v;
}

void put_table(ByteWriter& w, const CdfTable& table) {
  w.u64(table.states());
  w.i64(table.horizon());
  w.f64s(table.data());
}

CdfTable get_table(ByteReader& r) {
  const std::size_t states = r.u64();
  const int horizon = static_cast<int>(r.i64());
  return CdfTable(states, horizon, r.f64s());
}

void finish(const ByteReader& r) {
  if (!r.done()) throw std::runtime_error("trailing bytes in payload");
}

}  // namespace

std::vector<std::byte> serialize(const EnvironmentPolicies& policies) {
  ByteWriter w;
  w.u64(policies.obstacles.size());
  for (StateIndex s : policies.obstacles) w.u64(s);
  w.u64(policies.slices.size());
  for (const auto& slice : policies.slices) {
    w.u8(slice ? 1 : 0);
    if (!slice) continue;
    w.u64(slice->target);
    w.f64s(slice->z);
    put_matrix(w, slice->u);
    put_chars(w, slice->unreachable);
    w.f64(slice->residual);
    w.u64(slice->iterations);
  }
  return w.take();
}

EnvironmentPolicies deserialize_policies(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  EnvironmentPolicies out;
  out.obstacles.resize(r.u64());
  for (auto& s : out.obstacles) s = r.u64();
  out.slices.resize(r.u64());
  for (auto& slice : out.slices) {
    if (!r.u8()) continue;
    LmdpSolution sol;
    sol.target = r.u64();
    sol.z = r.f64s();
    sol.u = get_matrix(r);
    sol.unreachable = get_chars(r);
    sol.residual = r.f64();
    sol.iterations = r.u64();
    slice = std::move(sol);
  }
  finish(r);
  return out;
}

std::vector<std::byte> serialize(const EnvironmentArrivals& arrivals) {
  ByteWriter w;
  w.u64(arrivals.models.size());
  for (const auto& model : arrivals.models) {
    w.u8(model ? 1 : 0);
    if (!model) continue;
    w.u64(model->target);
    w.i64(model->horizon);
    w.f64s(model->mean);
    w.f64s(model->variance);
    w.f64s(model->gamma.alpha);
    w.f64s(model->gamma.beta);
    w.u64(model->gamma.kind.size());
    for (ArrivalKind k : model->gamma.kind) w.u8(static_cast<std::uint8_t>(k));
    put_chars(w, model->unreachable);
    w.u8(model->exact ? 1 : 0);
    if (model->exact) put_table(w, *model->exact);
  }
  return w.take();
}

EnvironmentArrivals deserialize_arrivals(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  EnvironmentArrivals out;
  out.models.resize(r.u64());
  for (auto& slot : out.models) {
    if (!r.u8()) continue;
    ArrivalModel model;
    model.target = r.u64();
    model.horizon = static_cast<int>(r.i64());
    model.mean = r.f64s();
    model.variance = r.f64s();
    model.gamma.alpha = r.f64s();
    model.gamma.beta = r.f64s();
    model.gamma.kind.resize(r.u64());
    for (auto& k : model.gamma.kind) {
      const auto raw = r.u8();
      if (raw > static_cast<std::uint8_t>(ArrivalKind::Unreachable)) throw std::runtime_error("bad arrival kind");
      k = static_cast<ArrivalKind>(raw);
    }
    model.unreachable = get_chars(r);
    if (r.u8()) model.exact = std::make_shared<const CdfTable>(get_table(r));
    slot = std::move(model);
  }
  finish(r);
  return out;
}

std::vector<std::byte> serialize(const EnvironmentReach& reach) {
  ByteWriter w;
  w.u64(reach.tables.size());
  for (const auto& table : reach.tables) {
    w.u8(table ? 1 : 0);
    if (table) put_table(w, *table);
  }
  return w.take();
}

EnvironmentReach deserialize_reach(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  EnvironmentReach out;
  out.tables.resize(r.u64());
  for (auto& table : out.tables) {
    if (r.u8()) table = std::make_shared<const CdfTable>(get_table(r));
  }
  finish(r);
  return out;
}

std::vector<std::byte> serialize(const FeasibilitySolution& solution) {
  ByteWriter w;
  w.u64(solution.goal_count());
  w.u64(solution.environment_count());
  w.u64(solution.state_count());
  w.f64s(solution.kappa_values());
  for (std::int64_t j : solution.target_values()) w.i64(j);
  return w.take();
}

FeasibilitySolution deserialize_feasibility(std::span<const std::byte> bytes) {
  ByteReader r(bytes);
  const std::size_t goals = r.u64();
  const std::size_t envs = r.u64();
  const std::size_t states = r.u64();
  FeasibilitySolution out(goals, envs, states);
  const std::vector<double> kappa = r.f64s();
  if (kappa.size() != goals * envs * states) throw std::runtime_error("feasibility payload size mismatch");
  for (std::size_t c = 0; c < goals; ++c) {
    for (std::size_t k = 0; k < envs; ++k) {
      auto ks = out.kappa_slice(c, k);
      auto ts = out.target_slice(c, k);
      for (std::size_t i = 0; i < states; ++i) ks[i] = kappa[(c * envs + k) * states + i];
      for (std::size_t i = 0; i < states; ++i) ts[i] = r.i64();
    }
  }
  finish(r);
  return out;
}

}  // namespace csp
