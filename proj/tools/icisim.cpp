#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "ici/config.hpp"
#include "ici/network.hpp"
#include "ici/runner.hpp"

namespace {

void print_summary(const ici::RunOutcome& o) {
  const auto& r = o.report;
  std::printf("%-28s %-15s seed=%-4llu becn=%-7llu peak_bin=%-5llu pfc=%-6llu thr=%7.2fGbps lat=%9.1fns %s%s\n",
              r.scenario.c_str(), r.cc_mode.c_str(), static_cast<unsigned long long>(r.seed),
              static_cast<unsigned long long>(r.becn_total), static_cast<unsigned long long>(r.peak_becn_bin()),
              static_cast<unsigned long long>(r.pfc_pause_total), r.throughput_gbps, r.mean_latency_ns,
              o.ok ? "ok" : "FAIL: ", o.ok ? "" : o.error.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"icisim: packet-level lossless data-center network simulator"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out = "out";
  bool print_effective = false;
  bool audit = false;

  auto* run = app.add_subcommand("run", "run one scenario config");
  std::string config_path;
  std::string cc_override;
  run->add_option("config", config_path, "scenario JSON file")->required();
  run->add_option("--cc-mode", cc_override, "override cc_mode (none, dcqcn, ci, ci+dcqcn-naive, ici)");

  auto* matrix = app.add_subcommand("matrix", "run every config in a directory across cc_modes");
  std::string dir;
  std::string modes_arg = "dcqcn,ci,ci+dcqcn-naive,ici";
  unsigned parallel = 1;
  matrix->add_option("dir", dir, "directory of scenario JSON files")->required();
  matrix->add_option("--cc-modes", modes_arg, "comma-separated cc_modes")->capture_default_str();
  matrix->add_option("--parallel", parallel, "concurrent simulation instances")->capture_default_str();

  auto* topo = app.add_subcommand("topology", "print the topology a config builds");
  std::string topo_config;
  topo->add_option("config", topo_config, "scenario JSON file")->required();

  for (auto* sub : {run, matrix}) {
    sub->add_option("--seed", seed, "override the scenario seed")->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--out", out, "output directory")->capture_default_str();
    sub->add_flag("--print-effective-config", print_effective, "print the resolved config and exit");
    sub->add_flag("--audit", audit, "enable full-state isolation audits (slow)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*topo) {
      const auto cfg = ici::parse_config_file(topo_config);
      std::cout << ici::build_min(cfg.topology).summary() << "\n";
      return 0;
    }
    auto apply = [&](ici::ScenarioConfig& c) {
      if (seed_set) c.seed = seed;
      if (audit) c.audit = true;
    };
    if (*run) {
      auto cfg = ici::parse_config_file(config_path);
      if (!cc_override.empty()) cfg.cc_mode = ici::parse_cc_mode(cc_override);
      apply(cfg);
      cfg.validate();
      if (print_effective) {
        std::cout << ici::effective_config_json(cfg);
        return 0;
      }
      const auto o = ici::run_and_export(cfg, out);
      print_summary(o);
      std::cout << "report: " << o.run_dir << "\n";
      return o.ok ? 0 : 1;
    }
    auto bases = ici::load_config_dir(dir);
    for (auto& b : bases) apply(b);
    std::vector<ici::CcMode> modes;
    std::size_t pos = 0;
    while (pos <= modes_arg.size()) {
      const auto comma = modes_arg.find(',', pos);
      const auto tok = modes_arg.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      if (!tok.empty()) modes.push_back(ici::parse_cc_mode(tok));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    const auto configs = ici::expand_matrix(bases, modes);
    if (print_effective) {
      for (const auto& c : configs) std::cout << ici::effective_config_json(c);
      return 0;
    }
    const auto outcomes = ici::run_matrix(configs, parallel, out);
    int failed = 0;
    for (const auto& o : outcomes) {
      print_summary(o);
      failed += o.ok ? 0 : 1;
    }
    std::cout << outcomes.size() << " runs, " << failed << " failed; comparison: "
              << (std::filesystem::path(out) / "comparison.csv").string() << "\n";
    return failed == 0 ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
