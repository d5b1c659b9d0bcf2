#include "mare/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace mare {

namespace {

using Clock = std::chrono::steady_clock;

class StageTimer {
 public:
  StageTimer(RunManifest& man, std::string name) : man_(man), name_(std::move(name)), start_(Clock::now()) {}
  ~StageTimer() {
    const double ms =
        std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(Clock::now() - start_)
            .count();
    man_.stages.push_back(name_);
    man_.timings_ms[name_] = ms;
  }

 private:
  RunManifest& man_;
  std::string name_;
  Clock::time_point start_;
};

void atomic_write(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

std::string g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json lemma_json(const LemmaReport& rep) {
  return nlohmann::json{{"samples", rep.samples},
                        {"worst_ratio", rep.worst_ratio},
                        {"pass", rep.pass},
                        {"worst_seed", rep.worst_seed}};
}

/// u-decay windows end well inside the truncation: u(T) = 0 biases late
/// windows, so the exponent is read off the last window with t_hi <= T/60.
double fit_u_exponent(const ModelEnd& model, const Solution& sol) {
  (void)model;
  const auto fits = fit_decay(sol.u, 4.0, 8, 1e-300);
  const double cap = sol.grid->back() / 60.0;
  const DecayFit* chosen = nullptr;
  for (const auto& f : fits) {
    if (!f.skipped && f.t_hi <= cap) chosen = &f;
  }
  return chosen ? chosen->exponent : 0.0;
}

}  // namespace

RunManifest run_experiment(const ExperimentConfig& cfg, const std::string& out_dir_override) {
  RunManifest man;
  man.config_echo = emit_config(cfg);
  man.has_solve = true;

  ModelEnd normalized = [&] {
    StageTimer timer(man, "normalize");
    ModelEnd model = cfg.make_model();
    return normalize_mass(model);
  }();
  man.c0 = normalized.c0();

  GridPtr grid = make_grid(normalized, cfg.grid_T, cfg.grid_M, cfg.grading);

  ContinuationResult cont = [&] {
    StageTimer timer(man, "continuation");
    return continue_to_limit(normalized, grid, cfg.solver);
  }();

  {
    StageTimer timer(man, "analysis");
    for (const Solution& sol : cont.trace) {
      TraceSummary ts;
      ts.eps = sol.eps;
      ts.newton_iterations = sol.newton.iterations;
      ts.sup_u = sol.u.sup_abs();
      double S = 0.0;
      for (std::size_t i = 0; i < sol.grid->nodes.size(); ++i) {
        S = std::max(S, std::abs(sol.u.values[i]) * std::pow(sol.grid->nodes[i], cfg.delta));
      }
      ts.scaled_sup = S;
      man.trace.push_back(ts);
    }
    TraceSummary limit_ts;
    limit_ts.eps = 0.0;
    limit_ts.newton_iterations = cont.limit.newton.iterations;
    limit_ts.sup_u = cont.limit.u.sup_abs();
    double S0 = 0.0;
    for (std::size_t i = 0; i < grid->nodes.size(); ++i) {
      S0 = std::max(S0, std::abs(cont.limit.u.values[i]) * std::pow(grid->nodes[i], cfg.delta));
    }
    limit_ts.scaled_sup = S0;
    man.trace.push_back(limit_ts);

    man.u_exponent = fit_u_exponent(normalized, cont.limit);
    man.pinch = verify_main_theorem(normalized, cont.limit);
    man.scaling = verify_ueps_scaling(normalized, cont.trace, cfg.delta);
  }

  {
    StageTimer timer(man, "lemmas");
    LemmaReport sqrteps, proof, pinch, hermitian;
    for (int n = 2; n <= 8; ++n) {
      auto merge = [](LemmaReport& into, const LemmaReport& part) {
        into.samples += part.samples;
        if (part.worst_ratio > into.worst_ratio) {
          into.worst_ratio = part.worst_ratio;
          into.worst_seed = part.worst_seed;
        }
        into.pass = into.pass && part.pass;
      };
      merge(sqrteps, run_sqrteps_suite(n, cfg.lemma_samples, cfg.seed));
      merge(proof, run_proof_inequality_suite(n, cfg.lemma_samples, cfg.seed));
      merge(pinch, run_pinch_suite(n, cfg.lemma_samples, cfg.seed));
      merge(hermitian, run_hermitian_suite(n, cfg.lemma_samples, cfg.seed));
    }
    man.lemmas["sqrteps"] = sqrteps;
    man.lemmas["sqrteps_proof_inequality"] = proof;
    man.lemmas["pinch_from_laplacian"] = pinch;
    man.lemmas["hermitian_entry_bound"] = hermitian;
    man.bounded_geometry = run_bounded_geometry_suite(cfg.lemma_samples, cfg.seed);
  }

  bool lemmas_ok = man.bounded_geometry.bounds.pass && man.bounded_geometry.derivative_stable;
  for (const auto& [name, rep] : man.lemmas) lemmas_ok = lemmas_ok && rep.pass;
  man.envelopes_ok = (man.pinch.vacuous || man.pinch.envelope_ok) &&
                     (man.scaling.vacuous || man.scaling.envelope_ok) &&
                     man.scaling.trivial_bound_ok && lemmas_ok;

  {
    StageTimer timer(man, "outputs");
    const std::filesystem::path dir =
        out_dir_override.empty() ? std::filesystem::path(cfg.out_dir)
                                 : std::filesystem::path(out_dir_override);
    std::filesystem::create_directories(dir);
    if (cfg.write_csv) emit_csv(normalized, cont.limit, dir / "solution.csv");
    if (cfg.write_manifest) {
      emit_manifest(man, dir / "manifest.json");
      emit_timings(man, dir / "timings.json");
    }
  }
  return man;
}

RunManifest run_lemma_suites(const ExperimentConfig& cfg, const std::string& out_dir_override) {
  RunManifest man;
  man.config_echo = emit_config(cfg);
  man.has_solve = false;
  {
    StageTimer timer(man, "lemmas");
    LemmaReport sqrteps, proof, pinch, hermitian;
    for (int n = 2; n <= 8; ++n) {
      auto merge = [](LemmaReport& into, const LemmaReport& part) {
        into.samples += part.samples;
        if (part.worst_ratio > into.worst_ratio) {
          into.worst_ratio = part.worst_ratio;
          into.worst_seed = part.worst_seed;
        }
        into.pass = into.pass && part.pass;
      };
      merge(sqrteps, run_sqrteps_suite(n, cfg.lemma_samples, cfg.seed));
      merge(proof, run_proof_inequality_suite(n, cfg.lemma_samples, cfg.seed));
      merge(pinch, run_pinch_suite(n, cfg.lemma_samples, cfg.seed));
      merge(hermitian, run_hermitian_suite(n, cfg.lemma_samples, cfg.seed));
    }
    man.lemmas["sqrteps"] = sqrteps;
    man.lemmas["sqrteps_proof_inequality"] = proof;
    man.lemmas["pinch_from_laplacian"] = pinch;
    man.lemmas["hermitian_entry_bound"] = hermitian;
    man.bounded_geometry = run_bounded_geometry_suite(cfg.lemma_samples, cfg.seed);
  }
  bool ok = man.bounded_geometry.bounds.pass && man.bounded_geometry.derivative_stable;
  for (const auto& [name, rep] : man.lemmas) ok = ok && rep.pass;
  man.envelopes_ok = ok;
  if (cfg.write_manifest) {
    StageTimer timer(man, "outputs");
    const std::filesystem::path dir =
        out_dir_override.empty() ? std::filesystem::path(cfg.out_dir)
                                 : std::filesystem::path(out_dir_override);
    std::filesystem::create_directories(dir);
    emit_manifest(man, dir / "manifest.json");
    emit_timings(man, dir / "timings.json");
  }
  return man;
}

std::string manifest_to_json(const RunManifest& man) {
  nlohmann::json j;
  j["schema_version"] = kManifestSchemaVersion;
  j["artifact_version"] = kArtifactVersion;
  j["config"] = man.config_echo;
  j["has_solve"] = man.has_solve;
  j["c0"] = man.c0;
  nlohmann::json trace = nlohmann::json::array();
  for (const auto& ts : man.trace) {
    trace.push_back({{"eps", ts.eps},
                     {"newton_iterations", ts.newton_iterations},
                     {"sup_u", ts.sup_u},
                     {"scaled_sup", ts.scaled_sup}});
  }
  j["trace"] = trace;
  j["fits"] = {{"u_exponent", man.u_exponent},
               {"lambda_base_exponent", man.pinch.base_exponent},
               {"lambda_fiber_exponent", man.pinch.fiber_exponent},
               {"ueps_slope", man.scaling.slope_value}};
  j["pinch"] = {{"delta_used", man.pinch.delta_used},
                {"sup_scaled_laplacian", man.pinch.sup_scaled_laplacian},
                {"pinch_constant", man.pinch.pinch_constant},
                {"fitted_pinch_exponent", man.pinch.fitted_pinch_exponent},
                {"vacuous", man.pinch.vacuous},
                {"envelope_ok", man.pinch.envelope_ok}};
  j["scaling"] = {{"delta", man.scaling.delta},
                  {"envelope", man.scaling.envelope},
                  {"slope_value", man.scaling.slope_value},
                  {"slope_gradient", man.scaling.slope_gradient},
                  {"slope_laplacian", man.scaling.slope_laplacian},
                  {"vacuous", man.scaling.vacuous},
                  {"trivial_bound_ok", man.scaling.trivial_bound_ok},
                  {"worst_trivial_margin", man.scaling.worst_trivial_margin},
                  {"envelope_ok", man.scaling.envelope_ok}};
  nlohmann::json lemmas;
  for (const auto& [name, rep] : man.lemmas) lemmas[name] = lemma_json(rep);
  j["lemmas"] = lemmas;
  j["bounded_geometry"] = {{"bounds", lemma_json(man.bounded_geometry.bounds)},
                           {"max_derivative_variation", man.bounded_geometry.max_derivative_variation},
                           {"derivative_stable", man.bounded_geometry.derivative_stable}};
  j["envelopes_ok"] = man.envelopes_ok;
  j["stages"] = man.stages;
  return j.dump(2) + "\n";
}

void emit_csv(const ModelEnd& model, const Solution& sol, const std::filesystem::path& path) {
  if (!sol.newton.converged) throw std::invalid_argument("emit_csv: solution not converged");
  const RadialField lap = laplacian_radial(model, sol.u);
  std::string out = "t,u,h,lambda_base,lambda_fiber,laplacian_u\n";
  for (std::size_t i = 0; i < sol.grid->nodes.size(); ++i) {
    out += g17(sol.grid->nodes[i]);
    out += ',';
    out += g17(sol.u.values[i]);
    out += ',';
    out += g17(sol.h.values[i]);
    out += ',';
    out += g17(sol.lambda_base.values[i]);
    out += ',';
    out += g17(sol.lambda_fiber.values[i]);
    out += ',';
    out += g17(lap.values[i]);
    out += '\n';
  }
  atomic_write(path, out);
}

void emit_manifest(const RunManifest& man, const std::filesystem::path& path) {
  atomic_write(path, manifest_to_json(man));
}

void emit_timings(const RunManifest& man, const std::filesystem::path& path) {
  nlohmann::json j;
  for (const auto& [name, ms] : man.timings_ms) j[name] = ms;
  atomic_write(path, j.dump(2) + "\n");
}

}  // namespace mare
