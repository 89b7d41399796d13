#include <doctest.h>

#include <cmath>
#include <random>

#include "ici/dcqcn.hpp"
#include "ici/pfc.hpp"
#include "ici/topology.hpp"

using namespace ici;

namespace {
constexpr double G = 1e9;

PfcIngress port_level() { return PfcIngress(resolve_thresholds(PfcConfig{}, 1)); }
}  // namespace

TEST_CASE("pause at the stop threshold, resume at go") {
  auto pfc = port_level();
  CHECK_FALSE(pfc.on_occupancy_change(0, 49));
  CHECK(pfc.on_occupancy_change(0, 50) == PfcFrame::kPause);
  CHECK(pfc.paused(0));
  CHECK_FALSE(pfc.on_occupancy_change(0, 51));
  CHECK_FALSE(pfc.on_occupancy_change(0, 46));
  CHECK(pfc.on_occupancy_change(0, 45) == PfcFrame::kResume);
  CHECK_FALSE(pfc.paused(0));
}

TEST_CASE("no frames inside the hysteresis band") {
  auto pfc = port_level();
  int frames = 0;
  for (int i = 0; i < 100; ++i)
    if (pfc.on_occupancy_change(0, i % 2 ? 47 : 48)) ++frames;
  CHECK(frames == 0);

  // After a pause, oscillating between go and stop is silent as well.
  pfc.on_occupancy_change(0, 50);
  for (int i = 0; i < 100; ++i)
    if (pfc.on_occupancy_change(0, i % 2 ? 47 : 48)) ++frames;
  CHECK(frames == 0);
}

TEST_CASE("a monotone ramp emits exactly one pause and one resume") {
  auto pfc = port_level();
  int pauses = 0, resumes = 0;
  for (std::uint32_t q = 0; q <= 64; ++q)
    if (auto f = pfc.on_occupancy_change(0, q)) (*f == PfcFrame::kPause ? pauses : resumes)++;
  for (std::uint32_t q = 64; q-- > 0;)
    if (auto f = pfc.on_occupancy_change(0, q)) (*f == PfcFrame::kPause ? pauses : resumes)++;
  CHECK(pauses == 1);
  CHECK(resumes == 1);
}

TEST_CASE("per-VL thresholds are independent") {
  PfcConfig cfg;
  cfg.per_vl_stop = {22, 17};
  const auto th = resolve_thresholds(cfg, 2);
  REQUIRE(th.size() == 2);
  CHECK(th[0].stop == 22);
  CHECK(th[1].stop == 17);
  CHECK(th[0].go < th[0].stop);
  CHECK(th[1].go < th[1].stop);

  PfcIngress pfc(th);
  CHECK(pfc.on_occupancy_change(0, 22) == PfcFrame::kPause);
  CHECK_FALSE(pfc.paused(1));
  CHECK_FALSE(pfc.on_occupancy_change(1, 16));

  LinkPermission link(2);
  link.apply_pause(PfcFrame::kPause, 0);
  CHECK_FALSE(link.may_send(0));
  CHECK(link.may_send(1));
  link.apply_pause(PfcFrame::kResume, 0);
  CHECK(link.may_send(0));
}

TEST_CASE("threshold invariants are enforced") {
  PfcConfig cfg;
  cfg.per_vl_stop = {26, 25};  // 51 > 50
  CHECK_THROWS_AS(resolve_thresholds(cfg, 2), ConfigError);
  PfcConfig bad_go;
  bad_go.go = 50;
  CHECK_THROWS_AS(resolve_thresholds(bad_go, 1), ConfigError);
  PfcConfig bad_headroom;
  bad_headroom.headroom = 15;  // 50 + 15 > 64
  CHECK_THROWS_AS(resolve_thresholds(bad_headroom, 1), ConfigError);
}

TEST_CASE("marking curve") {
  EcnMarkerConfig m;
  CHECK(mark_probability(m, m.k_min) == 0.0);
  CHECK(mark_probability(m, 0) == 0.0);
  CHECK(mark_probability(m, m.k_max) == doctest::Approx(m.p_max));
  CHECK(mark_probability(m, 64) == doctest::Approx(m.p_max));
  EcnMarkerConfig ex{.k_min = 10, .k_max = 40, .p_max = 0.1};
  CHECK(mark_probability(ex, 25) == doctest::Approx(0.05));
  // Monotone non-decreasing over the whole buffer.
  double prev = 0;
  for (int q = 0; q <= 64; ++q) {
    const double p = mark_probability(m, q);
    CHECK(p >= prev);
    prev = p;
  }
  CHECK_THROWS_AS((EcnMarkerConfig{.k_min = 40, .k_max = 40}.validate(64)), ConfigError);
  CHECK_THROWS_AS((EcnMarkerConfig{.k_min = 5, .k_max = 80}.validate(64)), ConfigError);
  CHECK_THROWS_AS((EcnMarkerConfig{.p_max = 0}.validate(64)), ConfigError);
}

TEST_CASE("notification window suppresses per flow") {
  BecnNotifier n(50 * kMicrosecond);
  const FlowTuple a{1, 2, 100, 4791}, b{3, 2, 100, 4791};
  CHECK(n.nic_on_marked_packet(a, 0));
  CHECK_FALSE(n.nic_on_marked_packet(a, 10 * kMicrosecond));
  CHECK(n.nic_on_marked_packet(b, 10 * kMicrosecond));
  CHECK(n.nic_on_marked_packet(a, 50 * kMicrosecond));
  CHECK(n.suppressed() == 1);
}

TEST_CASE("rate decrease") {
  DcqcnParams p;
  auto s = initial_rate_state(p);
  CHECK(s.current_rate == doctest::Approx(100 * G));
  CHECK(s.alpha == 1.0);

  s = rp_on_becn(s, p);
  CHECK(s.current_rate == doctest::Approx(50 * G));
  CHECK(s.target_rate == doctest::Approx(100 * G));
  // alpha stays at 1: (1 - g) * 1 + g.
  CHECK(s.alpha == doctest::Approx(1.0));

  // Second BECN: 50 * (1 - 1/2) = 25 by the same rule.
  s = rp_on_becn(s, p);
  CHECK(s.current_rate == doctest::Approx(25 * G));
  CHECK(s.target_rate == doctest::Approx(50 * G));

  RateState zero = initial_rate_state(p);
  zero.alpha = 0;
  zero = rp_on_becn(zero, p);
  CHECK(zero.current_rate == doctest::Approx(100 * G));
  CHECK(zero.alpha == doctest::Approx(p.g));
}

TEST_CASE("fast recovery then additive increase") {
  DcqcnParams p;
  RateState s = initial_rate_state(p);
  s.current_rate = 50 * G;
  s.target_rate = 100 * G;
  const double expect[] = {75, 87.5, 93.75, 96.875, 98.4375};
  for (double e : expect) {
    s = rp_increase_tick(s, p, IncreaseTrigger::kTimer);
    CHECK(s.current_rate == doctest::Approx(e * G));
    CHECK(s.target_rate == doctest::Approx(100 * G));
  }
  // Sixth stage is additive: target 105 clamps to the 100 Gbps link.
  s = rp_increase_tick(s, p, IncreaseTrigger::kTimer);
  CHECK(s.target_rate == doctest::Approx(100 * G));
  CHECK(s.current_rate == doctest::Approx(99.21875 * G));

  RateState low = initial_rate_state(p);
  low.current_rate = low.target_rate = 20 * G;
  low.timer_stage = p.fast_recovery_stages;
  low = rp_increase_tick(low, p, IncreaseTrigger::kByteCounter);
  CHECK(low.target_rate == doctest::Approx(25 * G));
  CHECK(low.current_rate == doctest::Approx(22.5 * G));
}

TEST_CASE("alpha decays only in periods without a BECN") {
  DcqcnParams p;
  RateState s = rp_on_becn(initial_rate_state(p), p);
  s = rp_alpha_tick(s, p);
  CHECK(s.alpha == doctest::Approx(1.0));
  s = rp_alpha_tick(s, p);
  CHECK(s.alpha == doctest::Approx(15.0 / 16));
  s = rp_alpha_tick(s, p);
  CHECK(s.alpha == doctest::Approx(225.0 / 256));
}

TEST_CASE("rate stays in bounds and responds monotonically") {
  DcqcnParams p;
  std::mt19937_64 rng(7);
  RateState s = initial_rate_state(p);
  for (int i = 0; i < 20000; ++i) {
    const double before = s.current_rate;
    switch (rng() % 3) {
      case 0:
        s = rp_on_becn(s, p);
        CHECK(s.current_rate <= before);
        CHECK(s.current_rate <= s.target_rate);
        break;
      case 1:
        s = rp_increase_tick(s, p, rng() % 2 ? IncreaseTrigger::kTimer : IncreaseTrigger::kByteCounter);
        CHECK(s.current_rate >= before);
        break;
      default:
        s = rp_alpha_tick(s, p);
    }
    REQUIRE(s.current_rate > 0);
    REQUIRE(s.current_rate <= p.link_rate);
    REQUIRE(s.alpha >= 0);
    REQUIRE(s.alpha <= 1);
  }
}

TEST_CASE("without BECNs the rate returns to line rate in bounded stages") {
  DcqcnParams p;
  RateState s = initial_rate_state(p);
  for (int i = 0; i < 10; ++i) s = rp_on_becn(s, p);
  int stages = 0;
  while (!s.at_line_rate(p) && stages < 1000) {
    s = rp_increase_tick(s, p, IncreaseTrigger::kTimer);
    ++stages;
  }
  CHECK(s.at_line_rate(p));
  CHECK(stages < 40);
}
