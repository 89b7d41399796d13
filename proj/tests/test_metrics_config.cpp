#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "ici/config.hpp"
#include "ici/metrics.hpp"
#include "test_util.hpp"

using namespace ici;

namespace {
std::size_t data_rows(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header) {
      header = true;
      continue;
    }
    ++rows;
  }
  return rows;
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}
}  // namespace

TEST_CASE("percentile examples") {
  CHECK(percentile(std::vector<int>{10}, 0.99) == 10);
  std::vector<int> hundred(100);
  for (int i = 0; i < 100; ++i) hundred[i] = i + 1;
  CHECK(percentile(hundred, 0.95) == 95);
  CHECK(percentile(std::vector<int>{1, 1, 1, 100}, 0.5) == 1);
  CHECK_FALSE(percentile(std::vector<int>{}, 0.5));
  CHECK(percentile(hundred, 0.0) == 1);
  CHECK(percentile(hundred, 1.0) == 100);
}

TEST_CASE("percentile matches a sort-and-index oracle on random multisets") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    std::vector<std::int64_t> v(n);
    for (auto& x : v) x = static_cast<std::int64_t>(rng() % 50);  // plenty of ties
    std::vector<std::int64_t> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.01, 0.25, 0.5, 0.9, 0.95, 0.99, 1.0, std::uniform_real_distribution<>(0, 1)(rng)}) {
      // Smallest value whose rank r satisfies r >= q*n, by exact integer search.
      std::size_t rank = 1;
      while (static_cast<double>(rank) < q * static_cast<double>(n) - 1e-9) ++rank;
      REQUIRE(percentile(v, q) == sorted[rank - 1]);
    }
  }
}

TEST_CASE("collector: bins sum to totals and FCT is complete minus inject") {
  MetricsCollector m(10 * kMicrosecond);
  m.on_message_start(7, 8192, 2, 1000);
  Packet p;
  p.msg_id = 7;
  p.size = 4096;
  p.inject_time = 1000;
  m.on_delivered(p, 5 * kMicrosecond);
  m.on_delivered(p, 25 * kMicrosecond);
  for (SimTime t : {SimTime{0}, 3 * kMicrosecond, 15 * kMicrosecond, 31 * kMicrosecond})
    m.on_becn(FlowTuple{1, 2, 3, 4}, 3, t);
  m.finalize(40 * kMicrosecond, 100 * kGbps);
  const auto& r = m.report();
  CHECK(r.becn_total == 4);
  std::uint64_t sum = 0;
  for (auto b : r.becn_ts) sum += b;
  CHECK(sum == 4);
  CHECK(r.peak_becn_bin() == 2);
  std::uint64_t bytes = 0;
  for (auto b : r.delivered_bytes_ts) bytes += b;
  CHECK(bytes == r.delivered_bytes);
  REQUIRE(r.fct.size() == 1);
  CHECK(r.fct[0].fct() == 25 * kMicrosecond - 1000);
  CHECK(r.fct_p99 == 25 * kMicrosecond - 1000);
}

TEST_CASE("export writes versioned CSVs") {
  MetricsCollector m(10 * kMicrosecond);
  for (std::uint64_t id = 1; id <= 3; ++id) {
    m.on_message_start(id, 4096, 1, 0);
    Packet p;
    p.msg_id = id;
    m.on_delivered(p, static_cast<SimTime>(id) * kMicrosecond);
  }
  m.finalize(10 * kMicrosecond, 100 * kGbps);
  const auto dir = scratch_dir("export");
  export_report(m.report(), dir.string(), true);
  for (const char* f : {"summary.csv", "becn_ts.csv", "throughput_ts.csv", "fct.csv", "occupancy_ts.csv",
                        "pfc_events.csv", "becn_events.csv", "cft_events.csv", "mode_events.csv"}) {
    const auto text = slurp(dir / f);
    CAPTURE(f);
    CHECK(text.rfind(kCsvSchema, 0) == 0);
  }
  CHECK(std::filesystem::exists(dir / "events.log"));
  CHECK(data_rows(dir / "fct.csv") == 3);
  const auto summary = slurp(dir / "summary.csv");
  CHECK(summary.find("becn_total") != std::string::npos);
  CHECK(m.report().becn_total == 0);
  std::filesystem::remove_all(dir);
  CHECK_THROWS(export_report(m.report(), "/proc/definitely/not/writable"));
}

TEST_CASE("empty config yields the reference defaults") {
  const auto c = parse_config_text("");
  CHECK(c.topology.terminals == 64);
  CHECK(c.topology.radix == 8);
  CHECK(c.topology.link_rate == 100 * kGbps);
  CHECK(c.topology.link_delay == 25 * kNanosecond);
  CHECK(c.pfc.stop == 50);
  CHECK(c.pfc.go == 45);
  CHECK(c.pfc.headroom == 14);
  CHECK(c.switch_config().mtu == 4096);
  CHECK(c.port_partition == 512 * 1024);
  CHECK(c.egress_cap == 256 * 1024);
  CHECK(c.speedup == 2.0);
  CHECK(c.ci.capacity == 8);
  CHECK(c.ci.detection_threshold == 32);
  CHECK(c.ici.persistence_window == 200 * kMicrosecond);
  CHECK(c.ecn.k_min == 5);
  CHECK(c.ecn.k_max == 40);
  CHECK(c.ecn.p_max == doctest::Approx(0.1));
  CHECK(parse_config_text("{}").ci.capacity == 8);
}

TEST_CASE("config validation errors name the key") {
  CHECK(error_of(R"({"cc_mode": "ici", "ci": {"cft_capacity": 0}})").find("cft_capacity") != std::string::npos);
  CHECK(error_of(R"({"switch": {"vl_count": 2}, "pfc": {"per_vl_stop": [26, 25]}})").find("per_vl_stop") !=
        std::string::npos);
  CHECK(error_of(R"({"ci": {"bogus": 1}})").find("bogus") != std::string::npos);
  CHECK(error_of(R"({"colour": "blue"})").find("colour") != std::string::npos);
  CHECK(error_of(R"({"cc_mode": "tcp"})").find("cc_mode") != std::string::npos);
  CHECK(error_of(R"({"pfc": {"enabled": false}})").find("pfc.enabled") != std::string::npos);
  CHECK(error_of(R"({"workloads": [{"kind": "uniform", "rate": 0}]})").find("rate") != std::string::npos);
  CHECK(error_of(R"({"topology": {"terminals": 60}})").find("64") != std::string::npos);
  // Plain CI without coordination tolerates an empty table.
  CHECK(error_of(R"({"cc_mode": "dcqcn", "ci": {"cft_capacity": 0}})").empty());
}

TEST_CASE("cc_mode names round trip") {
  for (auto m : all_cc_modes()) CHECK(parse_cc_mode(to_string(m)) == m);
  CHECK(all_cc_modes().size() == 5);
  CHECK(uses_ci(CcMode::kIci));
  CHECK(uses_dcqcn(CcMode::kIci));
  CHECK_FALSE(uses_dcqcn(CcMode::kCi));
  CHECK_FALSE(uses_ci(CcMode::kDcqcn));
  CHECK(parse_config_text(R"({"cc_mode": "ci+dcqcn-naive"})").switch_config().marking == MarkingPolicy::kPlain);
  CHECK(parse_config_text(R"({"cc_mode": "ici"})").switch_config().marking == MarkingPolicy::kCoordinated);
  CHECK(parse_config_text(R"({"cc_mode": "ci"})").switch_config().marking == MarkingPolicy::kNone);
}

TEST_CASE("effective config round trips for every preset and mode") {
  for (const auto& preset : preset_names()) {
    for (auto mode : all_cc_modes()) {
      auto c = parse_config_text(std::string(R"({"preset": ")") + preset + R"(", "seed": 4})");
      c.cc_mode = mode;
      const auto once = effective_config_json(c);
      const auto twice = effective_config_json(parse_config_text(once));
      CAPTURE(preset);
      CHECK(once == twice);
    }
  }
  auto c = parse_config_text(R"({"ci": {"cft_capacity": "unbounded", "key_mode": "exact"},
                                  "switch": {"vl_count": 2}, "max_time_ms": 7.5})");
  const auto again = parse_config_text(effective_config_json(c));
  CHECK(again.ci.capacity == kUnboundedCapacity);
  CHECK(again.ci.key_mode == CftKeyMode::kExactTuple);
  CHECK(again.pfc.per_vl_stop == std::vector<std::uint32_t>{22, 17});
  CHECK(again.max_time == c.max_time);
}

TEST_CASE("shipped scenario configs parse") {
  for (const char* f : {"one_tree", "four_tree", "google_one_tree", "google_one_tree_burst", "google_four_burst"}) {
    CAPTURE(f);
    const auto c = parse_config_file(std::string(ICISIM_CONFIG_DIR) + "/" + f + ".json");
    CHECK(c.name == f);
    CHECK_FALSE(c.workloads.empty());
  }
}
