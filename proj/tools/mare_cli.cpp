// Command-line driver: solve one model, sweep a parameter, run the lemma
// suites, or re-fit decay exponents from an emitted CSV.
//
// Exit codes: 0 success, 1 validation error, 2 solver failure,
// 3 verification (envelope/suite) failure.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mare/config.hpp"
#include "mare/estimates.hpp"
#include "mare/experiment.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "config file (section.key = value)");
  cmd->add_option("--out", args.out_dir, "output directory (overrides output.dir)");
  cmd->add_option("--seed", args.seed, "random seed (overrides analysis.seed)")
      ->each([&args](const std::string&) { args.seed_set = true; });
}

int load_config(const CommonArgs& args, mare::ExperimentConfig& cfg) {
  if (!args.config_path.empty()) {
    const auto parsed = mare::parse_config_file(args.config_path);
    if (!parsed.ok()) {
      for (const auto& e : parsed.errors) {
        std::cerr << args.config_path << ":" << e.line << ": " << e.message << "\n";
      }
      return 1;
    }
    cfg = *parsed.config;
  }
  if (args.seed_set) cfg.seed = args.seed;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  return 0;
}

int run_solve(const CommonArgs& args) {
  mare::ExperimentConfig cfg;
  if (const int rc = load_config(args, cfg)) return rc;
  try {
    const mare::RunManifest man = mare::run_experiment(cfg);
    std::cout << "c0 = " << man.c0 << ", u exponent = " << man.u_exponent
              << ", pinch constant = " << man.pinch.pinch_constant << "\n";
    std::cout << "outputs in " << cfg.out_dir << "\n";
    return man.envelopes_ok ? 0 : 3;
  } catch (const mare::SolveError& e) {
    std::cerr << "solver failure at eps = " << e.eps << ": " << e.what() << "\n";
    return 2;
  }
}

int run_lemmas(const CommonArgs& args) {
  mare::ExperimentConfig cfg;
  if (const int rc = load_config(args, cfg)) return rc;
  const mare::RunManifest man = mare::run_lemma_suites(cfg);
  for (const auto& [name, rep] : man.lemmas) {
    std::cout << name << ": samples " << rep.samples << ", worst ratio " << rep.worst_ratio
              << ", " << (rep.pass ? "pass" : "FAIL") << "\n";
  }
  std::cout << "bounded_geometry: samples " << man.bounded_geometry.bounds.samples
            << ", worst ratio " << man.bounded_geometry.bounds.worst_ratio << ", "
            << (man.bounded_geometry.bounds.pass && man.bounded_geometry.derivative_stable
                    ? "pass"
                    : "FAIL")
            << "\n";
  return man.envelopes_ok ? 0 : 3;
}

int run_sweep(const CommonArgs& args, const std::string& param,
              const std::vector<double>& values) {
  mare::ExperimentConfig cfg;
  if (const int rc = load_config(args, cfg)) return rc;
  const std::filesystem::path dir(cfg.out_dir);
  try {
    if (param == "eps") {
      // one continuation; rows are the eps-trace
      mare::ExperimentConfig run_cfg = cfg;
      run_cfg.write_csv = true;
      run_cfg.write_manifest = true;
      const mare::RunManifest man = mare::run_experiment(run_cfg);
      std::string csv = "eps,newton_iterations,sup_u,scaled_sup\n";
      char buf[160];
      for (const auto& ts : man.trace) {
        std::snprintf(buf, sizeof(buf), "%.17g,%d,%.17g,%.17g\n", ts.eps, ts.newton_iterations,
                      ts.sup_u, ts.scaled_sup);
        csv += buf;
      }
      std::ofstream out(dir / "sweep_eps.csv", std::ios::binary);
      out << csv;
      std::cout << "eps sweep written to " << (dir / "sweep_eps.csv").string() << "\n";
      return man.envelopes_ok ? 0 : 3;
    }
    if (param == "exponent") {
      if (values.empty()) {
        std::cerr << "sweep over exponent needs --values\n";
        return 1;
      }
      std::string csv = "exponent,c0,u_exponent,pinch_constant,ueps_slope\n";
      bool all_ok = true;
      char buf[256];
      for (double N : values) {
        mare::ExperimentConfig point = cfg;
        point.forcing.exponent = N;
        point.delta = mare::default_delta(point);
        std::ostringstream sub;
        sub << "exponent_" << N;
        const mare::RunManifest man = mare::run_experiment(point, (dir / sub.str()).string());
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", N, man.c0,
                      man.u_exponent, man.pinch.pinch_constant, man.scaling.slope_value);
        csv += buf;
        all_ok = all_ok && man.envelopes_ok;
      }
      std::filesystem::create_directories(dir);
      std::ofstream out(dir / "sweep_exponent.csv", std::ios::binary);
      out << csv;
      std::cout << "exponent sweep written to " << (dir / "sweep_exponent.csv").string() << "\n";
      return all_ok ? 0 : 3;
    }
  } catch (const mare::SolveError& e) {
    std::cerr << "solver failure at eps = " << e.eps << ": " << e.what() << "\n";
    return 2;
  }
  std::cerr << "unknown sweep parameter '" << param << "' (expected eps or exponent)\n";
  return 1;
}

int run_fit(const std::string& csv_path, const std::string& column) {
  std::ifstream in(csv_path, std::ios::binary);
  if (!in) {
    std::cerr << "cannot open '" << csv_path << "'\n";
    return 1;
  }
  std::string header;
  if (!std::getline(in, header)) {
    std::cerr << "empty CSV\n";
    return 1;
  }
  std::vector<std::string> names;
  {
    std::istringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) names.push_back(cell);
  }
  int col = -1;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == column) col = static_cast<int>(i);
  }
  if (col < 0 || names.empty() || names[0] != "t") {
    std::cerr << "column '" << column << "' not found (header: " << header << ")\n";
    return 1;
  }
  std::vector<double> t, v;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    int idx = 0;
    double tv = 0.0, vv = 0.0;
    while (std::getline(ls, cell, ',')) {
      if (idx == 0) tv = std::stod(cell);
      if (idx == col) vv = std::stod(cell);
      ++idx;
    }
    t.push_back(tv);
    v.push_back(vv);
  }
  try {
    auto grid = std::make_shared<const mare::RadialGrid>(t, mare::Grading::uniform_t);
    const mare::RadialField field(grid, v);
    const auto fits = mare::fit_decay(field);
    nlohmann::json j = nlohmann::json::array();
    for (const auto& f : fits) {
      j.push_back({{"t_lo", f.t_lo},
                   {"t_hi", f.t_hi},
                   {"nodes", f.nodes},
                   {"skipped", f.skipped},
                   {"exponent", f.exponent},
                   {"constant", f.constant},
                   {"r_squared", f.r_squared}});
    }
    std::cout << j.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "fit failed: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"radial Monge-Ampere model-end laboratory"};
  app.require_subcommand(1);

  CommonArgs solve_args, sweep_args, lemma_args;
  std::string sweep_param = "eps";
  std::vector<double> sweep_values;
  std::string fit_csv, fit_column = "u";

  CLI::App* solve = app.add_subcommand("solve", "solve one model and emit CSV + manifest");
  add_common(solve, solve_args);

  CLI::App* sweep = app.add_subcommand("sweep", "eps or forcing-exponent sweep");
  add_common(sweep, sweep_args);
  sweep->add_option("--param", sweep_param, "eps | exponent");
  sweep->add_option("--values", sweep_values, "sweep values (exponent sweeps)");

  CLI::App* lemmas = app.add_subcommand("lemmas", "run the property suites only");
  add_common(lemmas, lemma_args);

  CLI::App* fit = app.add_subcommand("fit", "re-fit decay exponents from an emitted CSV");
  fit->add_option("--csv", fit_csv, "path to a solution CSV")->required();
  fit->add_option("--column", fit_column, "column to fit (default u)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve->parsed()) return run_solve(solve_args);
    if (sweep->parsed()) return run_sweep(sweep_args, sweep_param, sweep_values);
    if (lemmas->parsed()) return run_lemmas(lemma_args);
    if (fit->parsed()) return run_fit(fit_csv, fit_column);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
