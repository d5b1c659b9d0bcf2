#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mare/model_end.hpp"
#include "mare/solver.hpp"

namespace mare {

/// One experiment: model + grid + solver + analysis knobs + output targets.
/// Parsed from the flat `section.key = value` format; every invariant of the
/// constituent types is re-validated at parse time.
struct ExperimentConfig {
  int n = 1;
  double t0 = 2.0;
  ForcingSpec forcing;  // defaults: zero profile, A = 1, N = 3 + 1/n
  double grid_T = 2000.0;
  int grid_M = 512;
  Grading grading = Grading::uniform_quasi;
  SolverConfig solver;
  double delta = 0.5;  // scaling-analysis delta
  long lemma_samples = 10000;
  std::uint64_t seed = 20260809;
  std::string out_dir = "out";
  bool write_csv = true;
  bool write_manifest = true;

  ModelEnd make_model() const;  // not normalized
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

struct ConfigError {
  int line;  // 0 for cross-field violations
  std::string message;
};

struct ConfigParseResult {
  std::optional<ExperimentConfig> config;
  std::vector<ConfigError> errors;  // all violations, not just the first
  bool ok() const { return config.has_value(); }
};

ConfigParseResult parse_config(const std::string& text);
ConfigParseResult parse_config_file(const std::string& path);

/// Canonical echo: sorted keys, full-precision values; parse(emit(c)) == c.
std::string emit_config(const ExperimentConfig& cfg);

double default_forcing_exponent(int n);  // 3 + 1/n
double default_delta(const ExperimentConfig& cfg);

}  // namespace mare
