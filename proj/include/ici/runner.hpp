#pragma once

#include <string>
#include <vector>

#include "ici/config.hpp"
#include "ici/metrics.hpp"

namespace ici {

struct RunOutcome {
  std::string run_dir;
  RunReport report;
  bool ok = false;
  std::string error;  // exception text or the invariant that failed
};

// `<scenario>__<cc_mode>__s<seed>`
std::string run_dir_name(const ScenarioConfig& cfg);

// Empty when the report satisfies the run invariants (completed, no drops,
// clean audit, no marked victims); otherwise a description.
std::string invariant_failure(const RunReport& r);

// Runs one config and exports its report (plus the effective config) into
// out_root/run_dir_name(cfg). Never throws.
RunOutcome run_and_export(const ScenarioConfig& cfg, const std::string& out_root);

// Cross product of base configs and cc_modes.
std::vector<ScenarioConfig> expand_matrix(const std::vector<ScenarioConfig>& bases,
                                          const std::vector<CcMode>& modes);

// Runs every config, `parallelism` at a time, then writes
// out_root/comparison.csv and out_root/matrix_summary.csv. Outcomes keep the
// input order regardless of scheduling.
std::vector<RunOutcome> run_matrix(const std::vector<ScenarioConfig>& configs, unsigned parallelism,
                                   const std::string& out_root);

void write_comparison(const std::vector<RunOutcome>& outcomes, const std::string& path);

// Loads every *.json file in `dir`, sorted by file name.
std::vector<ScenarioConfig> load_config_dir(const std::string& dir);

}  // namespace ici
