#pragma once

#include "prmf/config.hpp"
#include "prmf/evaluation.hpp"
#include "prmf/report.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace prmf {

// Output layout under RunConfig::output_dir:
//   splits/seed-<s>/{train,validation,test}.tsv, users.txt, items.txt, key.txt
//   cache/prior-<method>-seed-<s>.bin
//   models/<method>-seed-<s>.ckpt
//   report-<method>.csv, timings-<method>.csv, trace-<method>-seed-<s>.csv
//   evaluation-<method>.csv, sweep-<method>.csv, sweep-curve-<method>.csv
//   <command>-config.ini   effective configuration of the last <command> run
struct RunPaths {
  std::string root;

  std::string split_dir(std::uint64_t seed) const;
  std::string prior_cache(const std::string& method, std::uint64_t seed) const;
  std::string checkpoint(const std::string& method, std::uint64_t seed) const;
  std::string file(const std::string& name) const;
};

struct PreparedSeed {
  std::uint64_t seed = 0;
  bool reused_split = false;
  bool reused_prior = false;
  SplitSizes sizes;
};

// Parses, filters and splits the ratings for every seed, and builds the
// Sigma / X cache for methods that use prior information. Reuses outputs
// whose key matches the configuration.
std::vector<PreparedSeed> cmd_prepare(const RunConfig& config, std::ostream& log);

struct LoadedSplit {
  DataSplit data;
};
LoadedSplit load_split(const RunConfig& config, std::uint64_t seed);

// Trains every seed (up to config.jobs concurrently), writes checkpoints and
// the report. Throws DivergenceError when any run diverges.
std::vector<ReportRow> cmd_train(const RunConfig& config, std::ostream& log);

// Re-scores saved checkpoints on their test splits.
std::vector<ReportRow> cmd_evaluate(const RunConfig& config, std::ostream& log);

std::vector<SweepRow> cmd_sweep(const RunConfig& config, std::ostream& log);

}  // namespace prmf
