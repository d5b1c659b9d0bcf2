#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "mare/config.hpp"
#include "mare/estimates.hpp"

namespace mare {

inline constexpr const char* kArtifactVersion = "0.1.0";
inline constexpr int kManifestSchemaVersion = 1;

struct TraceSummary {
  double eps = 0.0;
  int newton_iterations = 0;
  double sup_u = 0.0;
  double scaled_sup = 0.0;  // S(eps) = sup |u_eps| t^delta
};

/// Everything a run produces, minus the raw fields. The serialized manifest is
/// byte-deterministic for fixed config + seeds; wall-clock timings therefore
/// go to a sibling timings file, never into the manifest itself.
struct RunManifest {
  std::string config_echo;
  double c0 = 0.0;
  std::vector<TraceSummary> trace;
  double u_exponent = 0.0;  // fitted decay of |u|, truncation-aware window
  PinchReport pinch;
  ScalingReport scaling;
  std::map<std::string, LemmaReport> lemmas;
  BoundedGeometrySuite bounded_geometry;
  bool envelopes_ok = true;
  bool has_solve = false;  // false for lemma-only runs
  std::vector<std::string> stages;
  std::map<std::string, double> timings_ms;  // volatile, excluded from the manifest bytes
};

/// Full pipeline: normalize -> continuation to eps = 0 -> decay/scaling
/// verification -> lemma suites -> outputs. out_dir_override redirects the
/// files without touching the config echo.
RunManifest run_experiment(const ExperimentConfig& cfg, const std::string& out_dir_override = "");

/// Lemma suites only (no solve).
RunManifest run_lemma_suites(const ExperimentConfig& cfg, const std::string& out_dir_override = "");

std::string manifest_to_json(const RunManifest& man);

/// CSV "t,u,h,lambda_base,lambda_fiber,laplacian_u", 17 significant digits,
/// LF endings, one row per node. Written atomically (temp file + rename).
void emit_csv(const ModelEnd& model, const Solution& sol, const std::filesystem::path& path);
void emit_manifest(const RunManifest& man, const std::filesystem::path& path);
void emit_timings(const RunManifest& man, const std::filesystem::path& path);

}  // namespace mare
