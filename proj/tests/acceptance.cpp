// Acceptance suite: runs the scenario matrix once (cached, in parallel) and
// prints one PASS/FAIL line per criterion with the achieved values.
// Exit status is non-zero when any criterion fails.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "ici/cft.hpp"
#include "ici/config.hpp"
#include "ici/dcqcn.hpp"
#include "ici/metrics.hpp"
#include "ici/network.hpp"
#include "ici/runner.hpp"
#include "ici/topology.hpp"

using namespace ici;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kScenarios{"one_tree", "four_tree", "google_one_tree", "google_one_tree_burst",
                                          "google_four_burst"};
const std::vector<CcMode> kMatrixModes{CcMode::kDcqcn, CcMode::kCi, CcMode::kCiDcqcnNaive, CcMode::kIci};
const std::vector<std::uint64_t> kSeeds{1, 2, 3};

struct Variant {
  std::string tag;  // empty = shipped config
  std::function<void(ScenarioConfig&)> apply;
};

std::string key_of(const std::string& scen, CcMode m, std::uint64_t seed, const std::string& tag) {
  return scen + "|" + to_string(m) + "|" + std::to_string(seed) + "|" + tag;
}

class RunCache {
 public:
  void want(const std::string& scen, CcMode m, std::uint64_t seed, const Variant& v = {}) {
    const auto k = key_of(scen, m, seed, v.tag);
    if (jobs_.count(k)) return;
    auto cfg = parse_config_file(std::string(ICISIM_CONFIG_DIR) + "/" + scen + ".json");
    cfg.cc_mode = m;
    cfg.seed = seed;
    if (v.apply) v.apply(cfg);
    jobs_.emplace(k, cfg);
  }

  void run_all(unsigned threads) {
    std::vector<std::pair<std::string, ScenarioConfig>> todo(jobs_.begin(), jobs_.end());
    std::atomic<std::size_t> next{0};
    std::mutex mu;
    auto worker = [&] {
      for (std::size_t i; (i = next++) < todo.size();) {
        RunReport r = run_scenario(todo[i].second);
        std::lock_guard lock(mu);
        results_[todo[i].first] = std::move(r);
        std::fprintf(stderr, "  [%zu/%zu] %s\n", results_.size(), todo.size(), todo[i].first.c_str());
      }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < std::max(1u, threads); ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  const RunReport& get(const std::string& scen, CcMode m, std::uint64_t seed, const std::string& tag = "") const {
    return results_.at(key_of(scen, m, seed, tag));
  }
  const std::map<std::string, RunReport>& all() const { return results_; }

 private:
  std::map<std::string, ScenarioConfig> jobs_;
  std::map<std::string, RunReport> results_;
};

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const Outcome& o) {
  std::printf("[%s] %2d %-34s %s\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str());
  std::fflush(stdout);
  if (!o.pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

const Variant kExactCap2{"exact_cap2", [](ScenarioConfig& c) {
                           c.ci.key_mode = CftKeyMode::kExactTuple;
                           c.ci.capacity = 2;
                         }};
const Variant kDestCap4{"dest_cap4", [](ScenarioConfig& c) {
                          c.ci.key_mode = CftKeyMode::kDestination;
                          c.ci.capacity = 4;
                        }};
const Variant kAudit{"audit", [](ScenarioConfig& c) { c.audit = true; }};
const Variant kAuditExactCap2{"audit_exact_cap2", [](ScenarioConfig& c) {
                                c.audit = true;
                                c.ci.key_mode = CftKeyMode::kExactTuple;
                                c.ci.capacity = 2;
                              }};

// ---------------------------------------------------------------------------

Outcome losslessness(const RunCache& cache) {
  std::size_t runs = 0, bad = 0, incomplete = 0;
  std::uint32_t max_in = 0;
  for (const auto& [k, r] : cache.all()) {
    ++runs;
    max_in = std::max(max_in, r.max_ingress_packets);
    if (r.drop_count != 0 || r.max_ingress_packets > 64) ++bad;
    if (!r.completed) ++incomplete;
  }
  std::size_t matrix = 0;
  for (const auto& s : kScenarios)
    for (auto m : kMatrixModes) {
      const auto& r = cache.get(s, m, 1);
      ++matrix;
      if (r.drop_count != 0 || r.max_ingress_packets > 64) ++bad;
    }
  return {bad == 0 && matrix == 20,
          fmt("%zu-run matrix + %zu cached runs: violations=%zu, max ingress=%u/64 pkts, incomplete=%zu", matrix,
              runs, bad, max_in, incomplete)};
}

Outcome zero_becn_one_tree(const RunCache& cache) {
  bool pass = true;
  std::string d = "ici, dest keys:";
  for (auto s : kSeeds) {
    const auto& r = cache.get("one_tree", CcMode::kIci, s);
    pass = pass && r.becn_total == 0 && r.marks_targeted == 0;
    d += fmt(" s%llu becn=%llu targeted=%llu esc=%llu;", (unsigned long long)s, (unsigned long long)r.becn_total,
             (unsigned long long)r.marks_targeted, (unsigned long long)r.escalations);
  }
  return {pass, d};
}

Outcome naive_degradation(const RunCache& cache) {
  double ci = 0, naive = 0, ici = 0;
  for (auto s : kSeeds) {
    ci += cache.get("one_tree", CcMode::kCi, s).mean_latency_ns;
    naive += cache.get("one_tree", CcMode::kCiDcqcnNaive, s).mean_latency_ns;
    ici += cache.get("one_tree", CcMode::kIci, s).mean_latency_ns;
  }
  ci /= 3, naive /= 3, ici /= 3;
  // 2% noise band on both comparisons, on the 3-seed means.
  const bool naive_ok = naive >= ci * 0.98;
  const bool ici_ok = ici <= ci * 1.02;
  return {naive_ok && ici_ok,
          fmt("mean latency (3 seeds) ci=%.0f ns, naive=%.0f ns (%s), ici=%.0f ns (%s)", ci, naive,
              naive_ok ? "ok" : "below ci", ici, ici_ok ? "ok" : "above ci")};
}

Outcome peak_becn_ratio(const RunCache& cache) {
  double best = 0;
  std::string d = "dcqcn/ici peak per-bin BECNs:";
  for (auto s : kSeeds) {
    const auto dq = cache.get("four_tree", CcMode::kDcqcn, s).peak_becn_bin();
    const auto ic = cache.get("four_tree", CcMode::kIci, s).peak_becn_bin();
    const double ratio = ic == 0 ? (dq > 0 ? INFINITY : 0.0) : static_cast<double>(dq) / static_cast<double>(ic);
    best = std::max(best, ratio);
    d += fmt(" s%llu %llu/%llu=%.1f;", (unsigned long long)s, (unsigned long long)dq, (unsigned long long)ic, ratio);
  }
  return {best >= 10, d + fmt(" best=%.1f (need >=10)", best)};
}

Outcome cft_exhaustion(const RunCache& cache) {
  bool pass = true;
  std::string d;
  std::uint64_t full_exact = 0, delegating_runs = 0;
  for (auto s : kSeeds) {
    const auto& r = cache.get("four_tree", CcMode::kIci, s, kExactCap2.tag);
    const bool delegated = std::any_of(r.mode_events.begin(), r.mode_events.end(), [](const ModeEvent& e) {
      return e.transition.to == CoordinatorMode::kDelegating;
    });
    pass = pass && r.table_full_events >= 1 && delegated;
    full_exact += r.table_full_events;
    delegating_runs += delegated;
  }
  d += fmt("exact cap=2: table-full=%llu, delegating in %llu/3 runs; dest keys:",
           (unsigned long long)full_exact, (unsigned long long)delegating_runs);
  for (const auto& [tag, cap] : {std::pair{kDestCap4.tag, 4}, std::pair{std::string(), 8}}) {
    std::uint64_t full = 0;
    for (auto s : kSeeds)
      for (auto m : {CcMode::kCi, CcMode::kIci}) full += cache.get("four_tree", m, s, tag).table_full_events;
    pass = pass && full == 0;
    d += fmt(" cap=%d table-full=%llu;", cap, (unsigned long long)full);
  }
  return {pass, d};
}

Outcome victim_audit(const RunCache& cache) {
  std::uint64_t gated = 0, violations = 0, audit_bad = 0, checks = 0;
  auto add = [&](const RunReport& r) {
    gated += r.marks_in_gated_modes;
    violations += r.victim_mark_violations;
    audit_bad += r.audit_violations;
    checks += r.audit_checks;
  };
  for (const auto& s : kScenarios) add(cache.get(s, CcMode::kIci, 1, kAudit.tag));
  add(cache.get("four_tree", CcMode::kIci, 1, kAuditExactCap2.tag));
  return {violations == 0 && audit_bad == 0 && checks > 0,
          fmt("6 audited ici runs: %llu marks in isolating/delegating egresses, %llu unmatched; "
              "%llu full-state audits, %llu violations",
              (unsigned long long)gated, (unsigned long long)violations, (unsigned long long)checks,
              (unsigned long long)audit_bad)};
}

Outcome tail_fct(const RunCache& cache) {
  bool margin = false, never_worst = true;
  std::string d;
  for (auto s : kSeeds) {
    std::map<CcMode, double> p99;
    for (auto m : kMatrixModes) {
      const auto& r = cache.get("google_one_tree", m, s);
      p99[m] = r.fct_p99 ? static_cast<double>(*r.fct_p99) : INFINITY;
    }
    const double best_other = std::min(p99[CcMode::kCi], p99[CcMode::kDcqcn]);
    margin = margin || p99[CcMode::kIci] <= 0.95 * best_other;
    const double worst = std::max({p99[CcMode::kDcqcn], p99[CcMode::kCi], p99[CcMode::kCiDcqcnNaive]});
    never_worst = never_worst && p99[CcMode::kIci] < worst;
    d += fmt(" s%llu p99 us ici=%.0f ci=%.0f dcqcn=%.0f naive=%.0f (ici/min=%.2f);", (unsigned long long)s,
             p99[CcMode::kIci] / 1e6, p99[CcMode::kCi] / 1e6, p99[CcMode::kDcqcn] / 1e6,
             p99[CcMode::kCiDcqcnNaive] / 1e6, p99[CcMode::kIci] / best_other);
  }
  return {margin && never_worst, fmt("margin %s, never-worst %s;", margin ? "met" : "missed",
                                     never_worst ? "held" : "violated") + d};
}

Outcome microburst(const RunCache& cache) {
  bool pass = true;
  std::string d = "delivered throughput Gbps:";
  for (auto s : kSeeds) {
    const double none = cache.get("google_four_burst", CcMode::kNone, s).throughput_gbps;
    const double dq = cache.get("google_four_burst", CcMode::kDcqcn, s).throughput_gbps;
    const double naive = cache.get("google_four_burst", CcMode::kCiDcqcnNaive, s).throughput_gbps;
    const double ici = cache.get("google_four_burst", CcMode::kIci, s).throughput_gbps;
    pass = pass && dq <= none && ici >= dq && ici >= naive;
    d += fmt(" s%llu none=%.0f dcqcn=%.0f naive=%.0f ici=%.0f;", (unsigned long long)s, none, dq, naive, ici);
  }
  return {pass, d};
}

bool same_tree(const fs::path& a, const fs::path& b, std::size_t& files) {
  auto listing = [](const fs::path& root) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      std::ifstream in(e.path(), std::ios::binary);
      std::ostringstream ss;
      ss << in.rdbuf();
      out[fs::relative(e.path(), root).string()] = ss.str();
    }
    return out;
  };
  const auto la = listing(a), lb = listing(b);
  files = la.size();
  return la == lb;
}

Outcome replay() {
  std::vector<ScenarioConfig> cfgs;
  const std::vector<std::pair<std::string, CcMode>> picks{{"one_tree", CcMode::kIci},
                                                          {"four_tree", CcMode::kDcqcn},
                                                          {"google_four_burst", CcMode::kCi},
                                                          {"google_one_tree_burst", CcMode::kCiDcqcnNaive}};
  for (const auto& [s, m] : picks) {
    auto c = parse_config_file(std::string(ICISIM_CONFIG_DIR) + "/" + s + ".json");
    c.cc_mode = m;
    c.seed = 2;
    cfgs.push_back(c);
  }
  const auto root = fs::temp_directory_path() / "icisim_acceptance_replay";
  fs::remove_all(root);
  run_matrix(cfgs, 1, (root / "serial").string());
  run_matrix(cfgs, 4, (root / "parallel4").string());
  run_matrix(cfgs, 4, (root / "parallel4_again").string());
  std::size_t files = 0, files2 = 0;
  const bool a = same_tree(root / "serial", root / "parallel4", files);
  const bool b = same_tree(root / "parallel4", root / "parallel4_again", files2);
  fs::remove_all(root);
  return {a && b && files > 0,
          fmt("4 runs x 3 executions (parallelism 1, 4, 4): %zu files each, %s", files,
              a && b ? "byte-identical" : "MISMATCH")};
}

Outcome unit_oracles() {
  std::vector<std::string> failed;
  // D-mod-K balance by enumeration.
  {
    const auto t = build_min({});
    bool ok = true;
    for (std::uint32_t s = 0; s < t.switch_count(); ++s) {
      const auto& sw = t.switch_at(s);
      if (sw.up_ports == 0) continue;
      std::vector<int> count(sw.up_ports, 0);
      for (std::uint32_t d = 0; d < t.terminals(); ++d) {
        const auto p = t.route(s, d);
        if (p >= sw.down_ports) ++count[p - sw.down_ports];
      }
      const auto [lo, hi] = std::minmax_element(count.begin(), count.end());
      ok = ok && *hi - *lo <= 1;
    }
    if (!ok) failed.push_back("d-mod-k");
  }
  // Nearest-rank percentile vs sort oracle.
  {
    std::mt19937_64 rng(1234);
    bool ok = true;
    for (int trial = 0; trial < 1000 && ok; ++trial) {
      std::vector<std::int64_t> v(1 + rng() % 500);
      for (auto& x : v) x = static_cast<std::int64_t>(rng() % 1000);
      auto sorted = v;
      std::sort(sorted.begin(), sorted.end());
      for (double q : {0.5, 0.95, 0.99}) {
        std::size_t rank = 1;
        while (static_cast<double>(rank) < q * static_cast<double>(v.size()) - 1e-9) ++rank;
        ok = ok && percentile(v, q) == sorted[rank - 1];
      }
    }
    if (!ok) failed.push_back("percentile");
  }
  // DCQCN sequences.
  {
    DcqcnParams p;
    const double G = 1e9;
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-6 * std::max(1.0, std::abs(b)); };
    RateState s = rp_on_becn(initial_rate_state(p), p);
    bool ok = near(s.current_rate, 50 * G);
    s = rp_on_becn(s, p);
    ok = ok && near(s.current_rate, 25 * G);
    RateState r = initial_rate_state(p);
    r.current_rate = 50 * G;
    r.target_rate = 100 * G;
    r = rp_increase_tick(r, p, IncreaseTrigger::kTimer);
    ok = ok && near(r.current_rate, 75 * G);
    for (int i = 0; i < 4; ++i) r = rp_increase_tick(r, p, IncreaseTrigger::kTimer);
    ok = ok && near(r.current_rate, 98.4375 * G);
    r = rp_increase_tick(r, p, IncreaseTrigger::kTimer);
    ok = ok && near(r.target_rate, 100 * G);
    if (!ok) failed.push_back("dcqcn");
  }
  // CFT deallocation truth table.
  {
    bool ok = true;
    for (int counter : {0, 2})
      for (bool expired : {false, true}) {
        CftTable t(8, CftKeyMode::kDestination, 100);
        const FlowTuple f{1, 2, 3, 4};
        t.allocate_entry(f, {0, 0}, 0);
        for (int i = 0; i < counter; ++i) t.on_cfq_enqueue(*t.match_packet(f));
        const bool removed = !t.deallocate_tick(expired ? 100 : 99).empty();
        ok = ok && removed == (counter == 0 && expired);
      }
    if (!ok) failed.push_back("cft-truth-table");
  }
  std::string d = "d-mod-k balance, percentile x1000, dcqcn sequences, cft truth table";
  for (const auto& f : failed) d += " | FAILED: " + f;
  return {failed.empty(), d};
}

}  // namespace

int main() {
  RunCache cache;
  for (const auto& s : kScenarios)
    for (auto m : kMatrixModes) cache.want(s, m, 1);
  for (auto seed : kSeeds) {
    for (auto m : {CcMode::kCi, CcMode::kCiDcqcnNaive, CcMode::kIci}) cache.want("one_tree", m, seed);
    for (auto m : {CcMode::kDcqcn, CcMode::kCi, CcMode::kIci}) cache.want("four_tree", m, seed);
    cache.want("four_tree", CcMode::kIci, seed, kExactCap2);
    for (auto m : {CcMode::kCi, CcMode::kIci}) cache.want("four_tree", m, seed, kDestCap4);
    for (auto m : kMatrixModes) cache.want("google_one_tree", m, seed);
    for (auto m : {CcMode::kNone, CcMode::kDcqcn, CcMode::kCiDcqcnNaive, CcMode::kIci})
      cache.want("google_four_burst", m, seed);
  }
  for (const auto& s : kScenarios) cache.want(s, CcMode::kIci, 1, kAudit);
  cache.want("four_tree", CcMode::kIci, 1, kAuditExactCap2);

  std::fprintf(stderr, "acceptance: running scenarios\n");
  cache.run_all(std::thread::hardware_concurrency());

  report(1, "losslessness", losslessness(cache));
  report(2, "zero BECNs under one tree", zero_becn_one_tree(cache));
  report(3, "naive combination degradation", naive_degradation(cache));
  report(4, "peak BECN reduction, four trees", peak_becn_ratio(cache));
  report(5, "CFT exhaustion pathology", cft_exhaustion(cache));
  report(6, "victim protection audit", victim_audit(cache));
  report(7, "tail FCT improvement", tail_fct(cache));
  report(8, "microburst robustness", microburst(cache));
  report(9, "deterministic replay", replay());
  report(10, "unit oracles", unit_oracles());
  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
