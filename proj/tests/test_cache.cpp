#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "csp/cache.hpp"
#include "csp/serialize.hpp"
#include "support.hpp"

using namespace csp;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("csp_test_" + name);
  fs::remove_all(dir);
  return dir;
}

std::vector<std::byte> bytes_of(std::string_view s) {
  std::vector<std::byte> out;
  for (char c : s) out.push_back(static_cast<std::byte>(c));
  return out;
}

}  // namespace

TEST_CASE("sha256 known answers") {
  CHECK(to_hex(sha256(bytes_of(""))) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(to_hex(sha256(bytes_of("abc"))) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update(std::string_view("a")).update(std::string_view("bc"));
  CHECK(to_hex(h.finish()) == to_hex(sha256(bytes_of("abc"))));
}

TEST_CASE("byte reader and writer") {
  ByteWriter w;
  w.u8(7);
  w.u32(0xDEADBEEF);
  w.i64(-5);
  w.f64(-0.1);
  w.str("hello");
  const std::vector<double> v{1.5, -2.25, 1e-300};
  w.f64s(v);
  const auto data = w.take();
  CHECK(static_cast<int>(data[1]) == 0xEF);  // little-endian
  ByteReader r(data);
  CHECK(r.u8() == 7);
  CHECK(r.u32() == 0xDEADBEEF);
  CHECK(r.i64() == -5);
  CHECK(r.f64() == -0.1);
  CHECK(r.str() == "hello");
  CHECK(r.f64s() == v);
  CHECK(r.done());
  CHECK_THROWS(r.u8());
}

TEST_CASE("artifact serialization round trips") {
  const Scenario sc = testing::two_period_corridor();
  for (CdfMode mode : {CdfMode::Exact, CdfMode::Gamma}) {
    PlannerOptions po;
    po.mode = mode;
    const auto ctx = testing::context_for(sc, po);
    for (std::size_t k = 0; k < 2; ++k) {
      const auto& pol = ctx->ensemble.environment(k);
      CHECK(deserialize_policies(serialize(pol)) == pol);
      const auto& arr = *ctx->arrivals[k];
      CHECK(deserialize_arrivals(serialize(arr)) == arr);
      const auto& rch = ctx->reach.environment(k);
      CHECK(deserialize_reach(serialize(rch)) == rch);
    }
    CHECK(deserialize_feasibility(serialize(ctx->feasibility)) == ctx->feasibility);
  }
  auto payload = serialize(testing::context_for(sc)->feasibility);
  payload.pop_back();
  CHECK_THROWS(deserialize_feasibility(payload));
}

TEST_CASE("artifact cache store, load and corruption") {
  const auto dir = fresh_dir("store");
  ArtifactCache cache(dir);
  Digest key{};
  key[0] = 1;
  const auto payload = bytes_of("payload bytes");
  CHECK_FALSE(cache.load("thing", key).has_value());
  cache.store("thing", key, payload);
  CHECK(cache.load("thing", key) == payload);
  CHECK(cache.warnings().empty());

  {
    std::fstream f(cache.entry_path("thing", key), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-1, std::ios::end);
    f.put('X');
  }
  CHECK_FALSE(cache.load("thing", key).has_value());
  REQUIRE(cache.warnings().size() == 1);
  CHECK(cache.warnings()[0].find("checksum") != std::string::npos);

  ArtifactCache disabled;
  disabled.store("thing", key, payload);
  CHECK_FALSE(disabled.load("thing", key).has_value());
  fs::remove_all(dir);
}

TEST_CASE("pipeline cache hits are bit-identical to fresh computation") {
  const Scenario sc = testing::two_period_corridor();
  for (CdfMode mode : {CdfMode::Exact, CdfMode::Gamma}) {
    const auto dir = fresh_dir(mode == CdfMode::Exact ? "pipeline-exact" : "pipeline-gamma");
    PipelineOptions po;
    po.planner.mode = mode;
    Pipeline cold(sc, po, ArtifactCache(dir));
    const auto a = cold.plan_context();
    Pipeline warm(sc, po, ArtifactCache(dir));
    const auto b = warm.plan_context();
    Pipeline fresh(sc, po);
    const auto c = fresh.plan_context();

    for (const char* stage : {"ensemble", "arrival", "reach", "goal_slices", "feasibility"}) {
      CAPTURE(stage);
      CHECK(cold.report(stage)->hits == 0);
      CHECK(warm.report(stage)->misses == 0);
      CHECK(warm.report(stage)->hits > 0);
      CHECK(warm.report(stage)->digests == cold.report(stage)->digests);
      CHECK(fresh.report(stage)->digests == cold.report(stage)->digests);
    }
    CHECK(a->feasibility == b->feasibility);
    CHECK(b->reach.goal_values() == c->reach.goal_values());
    const auto pa = plan_task(a, sc.task, 0, Execution::Serial);
    const auto pb = plan_task(b, sc.task, 0, Execution::Serial);
    CHECK(plan_to_json(*a, pa).dump() == plan_to_json(*b, pb).dump());
    fs::remove_all(dir);
  }
}

TEST_CASE("pipeline recovers from a corrupted entry") {
  const auto dir = fresh_dir("corrupt");
  const Scenario sc = testing::two_period_corridor();
  Pipeline(sc, {}, ArtifactCache(dir)).solve();
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().filename().string().rfind("arrival-", 0) != 0) continue;
    std::fstream f(entry.path(), std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(-3, std::ios::end);
    f.put('\x7f');
  }
  Pipeline again(sc, {}, ArtifactCache(dir));
  again.solve();
  CHECK(again.report("arrival")->misses == 2);
  CHECK(again.report("ensemble")->hits == 2);
  CHECK(again.cache().warnings().size() == 2);
  Pipeline third(sc, {}, ArtifactCache(dir));
  third.solve();
  CHECK(third.report("arrival")->hits == 2);
  CHECK(third.report("arrival")->digests == again.report("arrival")->digests);
  fs::remove_all(dir);
}
