#include <doctest.h>

#include <filesystem>
#include <map>
#include <set>

#include "ici/network.hpp"
#include "ici/runner.hpp"
#include "test_util.hpp"

using namespace ici;
namespace fs = std::filesystem;

namespace {

// A short tree over light background traffic: ~1 ms of simulated time.
ScenarioConfig small(CcMode mode, std::uint64_t seed = 1) {
  auto c = parse_config_text(R"({
    "name": "small_tree",
    "workloads": [
      {"kind": "uniform", "rate": 0.3, "duration_us": 300},
      {"kind": "incast", "start_us": 50, "duration_us": 150, "roots": 1}
    ]})");
  c.cc_mode = mode;
  c.seed = seed;
  return c;
}

ScenarioConfig small_messages(CcMode mode) {
  auto c = parse_config_text(R"({
    "name": "small_mix",
    "workloads": [
      {"kind": "message_mix", "load": 0.4, "messages": 2000, "cdf": "google_all_placeholder.cdf"},
      {"kind": "incast", "start_us": 20, "duration_us": 100, "roots": 2}
    ]})");
  c.cc_mode = mode;
  return c;
}

bool same_tree(const fs::path& a, const fs::path& b) {
  std::set<std::string> names_a, names_b;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) names_a.insert(fs::relative(e.path(), a).string());
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) names_b.insert(fs::relative(e.path(), b).string());
  if (names_a != names_b) return false;
  for (const auto& n : names_a)
    if (slurp(a / n) != slurp(b / n)) return false;
  return true;
}

}  // namespace

TEST_CASE("every packet is delivered and nothing is dropped") {
  for (auto mode : all_cc_modes()) {
    CAPTURE(to_string(mode));
    const auto r = run_scenario(small(mode));
    CHECK(r.completed);
    CHECK(r.drop_count == 0);
    CHECK(r.injected_packets > 0);
    CHECK(r.delivered_packets == r.injected_packets);
    CHECK(r.max_ingress_packets <= 64);
    CHECK(r.max_egress_bytes <= 256 * 1024);
    CHECK(r.victim_mark_violations == 0);
    CHECK(invariant_failure(r).empty());
  }
}

TEST_CASE("uncongested network generates no BECNs and no roots") {
  auto c = parse_config_text(R"({"workloads": [{"kind": "uniform", "rate": 0.2, "duration_us": 200}]})");
  for (auto mode : {CcMode::kDcqcn, CcMode::kIci}) {
    c.cc_mode = mode;
    const auto r = run_scenario(c);
    CHECK(r.becn_total == 0);
    CHECK(r.root_events == 0);
  }
}

TEST_CASE("adversarial all-to-one incast stays within the port budget") {
  auto c = parse_config_text(R"({
    "roles": {"incast_fraction": 0.9},
    "workloads": [{"kind": "incast", "duration_us": 100, "roots": 1}]})");
  c.cc_mode = CcMode::kNone;
  const auto r = run_scenario(c);
  CHECK(r.completed);
  CHECK(r.drop_count == 0);
  CHECK(r.pfc_pause_total > 0);
  // stop (50) + in-flight after the pause: ceil((2*25 + 327.68) / 327.68) = 2
  // packets plus fabric slack, all inside the 14-packet headroom.
  CHECK(r.max_ingress_packets <= 50 + 14);
}

TEST_CASE("identical config and seed replay identically") {
  const auto a = run_scenario(small(CcMode::kIci, 3));
  const auto b = run_scenario(small(CcMode::kIci, 3));
  CHECK(a.trace_digest == b.trace_digest);
  CHECK(a.events_dispatched == b.events_dispatched);
  const auto c = run_scenario(small(CcMode::kIci, 4));
  CHECK(a.trace_digest != c.trace_digest);

  const auto root = scratch_dir("replay");
  const auto x = run_and_export(small(CcMode::kDcqcn, 2), (root / "x").string());
  const auto y = run_and_export(small(CcMode::kDcqcn, 2), (root / "y").string());
  REQUIRE(x.ok);
  REQUIRE(y.ok);
  CHECK(same_tree(root / "x", root / "y"));
  fs::remove_all(root);
}

TEST_CASE("matrix output does not depend on parallelism") {
  const auto configs = expand_matrix({small(CcMode::kIci, 1), small_messages(CcMode::kIci)},
                                     {CcMode::kDcqcn, CcMode::kCi, CcMode::kIci});
  REQUIRE(configs.size() == 6);
  const auto root = scratch_dir("matrix");
  const auto serial = run_matrix(configs, 1, (root / "p1").string());
  const auto parallel = run_matrix(configs, 4, (root / "p4").string());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    CHECK(serial[i].ok);
    CHECK(fs::path(serial[i].run_dir).filename() == fs::path(parallel[i].run_dir).filename());
  }
  CHECK(fs::exists(root / "p1" / "comparison.csv"));
  CHECK(same_tree(root / "p1", root / "p4"));
  fs::remove_all(root);
}

TEST_CASE("one failing run leaves the others intact") {
  auto doomed = small(CcMode::kDcqcn);
  doomed.name = "doomed";
  doomed.max_time = 20 * kMicrosecond;
  const auto root = scratch_dir("failing");
  const auto out = run_matrix({small(CcMode::kDcqcn), doomed, small(CcMode::kCi)}, 2, root.string());
  REQUIRE(out.size() == 3);
  CHECK(out[0].ok);
  CHECK_FALSE(out[1].ok);
  CHECK_FALSE(out[1].error.empty());
  CHECK(out[2].ok);
  CHECK(fs::exists(root / out[0].run_dir / "summary.csv"));
  CHECK(fs::exists(root / out[1].run_dir / "summary.csv"));
  CHECK(fs::exists(root / out[2].run_dir / "summary.csv"));
  fs::remove_all(root);
}

TEST_CASE("effective config reproduces the run") {
  const auto c = small_messages(CcMode::kIci);
  const auto again = parse_config_text(effective_config_json(c));
  CHECK(run_scenario(c).trace_digest == run_scenario(again).trace_digest);
}

TEST_CASE("isolation audit and victim protection hold under load") {
  for (auto key : {CftKeyMode::kDestination, CftKeyMode::kExactTuple}) {
    auto c = small_messages(CcMode::kIci);
    c.audit = true;
    c.ci.key_mode = key;
    c.ci.capacity = 2;
    const auto r = run_scenario(c);
    CHECK(r.audit_checks > 0);
    CHECK(r.audit_violations == 0);
    CHECK(r.victim_mark_violations == 0);
    CHECK(r.completed);
  }
}

TEST_CASE("mode transitions only take the allowed edges") {
  auto c = small_messages(CcMode::kIci);
  c.ci.key_mode = CftKeyMode::kExactTuple;
  c.ci.capacity = 2;
  const auto r = run_scenario(c);
  using M = CoordinatorMode;
  const std::set<std::pair<M, M>> allowed{{M::kQuiescent, M::kIsolating},
                                          {M::kIsolating, M::kDelegating},
                                          {M::kIsolating, M::kQuiescent},
                                          {M::kDelegating, M::kQuiescent}};
  CHECK_FALSE(r.mode_events.empty());
  std::map<std::pair<std::uint32_t, std::uint32_t>, M> mode;
  for (const auto& e : r.mode_events) {
    CHECK(allowed.count({e.transition.from, e.transition.to}) == 1);
    auto [it, fresh] = mode.emplace(std::pair{e.switch_id, e.port}, M::kQuiescent);
    CHECK(it->second == e.transition.from);
    it->second = e.transition.to;
    if (e.transition.to == M::kDelegating) CHECK(e.transition.cause != EscalationCause::kNone);
  }
}

TEST_CASE("message FCTs are recorded for every completed message") {
  const auto r = run_scenario(small_messages(CcMode::kDcqcn));
  CHECK(r.fct.size() == 2000);
  CHECK(r.incomplete_messages == 0);
  for (const auto& f : r.fct) CHECK(f.fct() > 0);
  REQUIRE(r.fct_p99);
  CHECK(*r.fct_p50 <= *r.fct_p95);
  CHECK(*r.fct_p95 <= *r.fct_p99);
}

TEST_CASE("throughput never exceeds sink capacity") {
  const auto r = run_scenario(small(CcMode::kNone));
  const double capacity_bytes = 64 * 100e9 / 8 * (static_cast<double>(r.end_time) * 1e-12);
  CHECK(static_cast<double>(r.delivered_bytes) <= capacity_bytes);
  for (auto bin_bytes : r.delivered_bytes_ts)
    CHECK(static_cast<double>(bin_bytes) <= 64 * 100e9 / 8 * 10e-6 + 64 * 4096);
}
