#include "ici/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "ici/network.hpp"

namespace ici {

std::string run_dir_name(const ScenarioConfig& cfg) {
  std::ostringstream os;
  os << cfg.name << "__" << to_string(cfg.cc_mode) << "__s" << cfg.seed;
  return os.str();
}

std::string invariant_failure(const RunReport& r) {
  if (!r.completed) return "incomplete run: " + r.failure;
  if (r.drop_count != 0) return "packets dropped";
  if (r.audit_violations != 0) return "isolation audit found " + std::to_string(r.audit_violations) + " violations";
  if (r.victim_mark_violations != 0)
    return std::to_string(r.victim_mark_violations) + " victim packets marked in a gated mode";
  return {};
}

RunOutcome run_and_export(const ScenarioConfig& cfg, const std::string& out_root) {
  RunOutcome out;
  const auto dir = std::filesystem::path(out_root) / run_dir_name(cfg);
  out.run_dir = dir.string();
  try {
    out.report = run_scenario(cfg);
    export_report(out.report, out.run_dir, cfg.event_log);
    std::ofstream eff(dir / "effective_config.json", std::ios::binary | std::ios::trunc);
    eff << effective_config_json(cfg);
    out.error = invariant_failure(out.report);
    out.ok = out.error.empty();
  } catch (const std::exception& e) {
    out.ok = false;
    out.error = e.what();
  }
  return out;
}

std::vector<ScenarioConfig> expand_matrix(const std::vector<ScenarioConfig>& bases,
                                          const std::vector<CcMode>& modes) {
  std::vector<ScenarioConfig> out;
  for (const auto& b : bases) {
    for (auto m : modes) {
      auto c = b;
      c.cc_mode = m;
      c.validate();
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<RunOutcome> run_matrix(const std::vector<ScenarioConfig>& configs, unsigned parallelism,
                                   const std::string& out_root) {
  std::vector<RunOutcome> outcomes(configs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < configs.size(); i = next++) outcomes[i] = run_and_export(configs[i], out_root);
  };
  const unsigned n = std::max(1u, std::min<unsigned>(parallelism, static_cast<unsigned>(configs.size())));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::filesystem::create_directories(out_root);
  write_comparison(outcomes, (std::filesystem::path(out_root) / "comparison.csv").string());
  std::ofstream all(std::filesystem::path(out_root) / "matrix_summary.csv", std::ios::binary | std::ios::trunc);
  all << kCsvSchema << '\n' << summary_header() << ",run_ok,run_error\n";
  for (const auto& o : outcomes) {
    std::string err = o.error;
    for (auto& c : err)
      if (c == ',' || c == '\n') c = ';';
    all << summary_row(o.report) << ',' << (o.ok ? 1 : 0) << ',' << err << '\n';
  }
  return outcomes;
}

void write_comparison(const std::vector<RunOutcome>& outcomes, const std::string& path) {
  // One row per (scenario, seed); one column group per cc_mode.
  std::map<std::pair<std::string, std::uint64_t>, std::map<std::string, const RunReport*>> rows;
  for (const auto& o : outcomes)
    if (o.report.completed) rows[{o.report.scenario, o.report.seed}][o.report.cc_mode] = &o.report;
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << kCsvSchema << '\n' << "scenario,seed";
  for (auto m : all_cc_modes()) {
    const std::string n = to_string(m);
    f << ',' << n << "_becn_total," << n << "_becn_peak," << n << "_fct_p99_ns," << n << "_throughput_gbps,"
      << n << "_mean_latency_ns";
  }
  f << ",becn_peak_ratio_dcqcn_over_ici\n";
  auto num = [](double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return std::string(buf);
  };
  for (const auto& [key, modes] : rows) {
    f << key.first << ',' << key.second;
    for (auto m : all_cc_modes()) {
      auto it = modes.find(to_string(m));
      if (it == modes.end()) {
        f << ",,,,,";
        continue;
      }
      const RunReport& r = *it->second;
      f << ',' << r.becn_total << ',' << r.peak_becn_bin() << ','
        << (r.fct_p99 ? num(static_cast<double>(*r.fct_p99) / kNanosecond) : "") << ','
        << num(r.throughput_gbps) << ',' << num(r.mean_latency_ns);
    }
    auto d = modes.find("dcqcn");
    auto i = modes.find("ici");
    f << ',';
    if (d != modes.end() && i != modes.end()) {
      const double dp = static_cast<double>(d->second->peak_becn_bin());
      const double ip = static_cast<double>(i->second->peak_becn_bin());
      if (ip > 0) f << num(dp / ip);
      else if (dp > 0) f << "inf";
    }
    f << '\n';
  }
}

std::vector<ScenarioConfig> load_config_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<ScenarioConfig> out;
  for (const auto& p : files) out.push_back(parse_config_file(p.string()));
  if (out.empty()) throw ConfigError("no *.json configs in " + dir);
  return out;
}

}  // namespace ici
