#include "mare/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace mare {

double default_forcing_exponent(int n) { return 3.0 + 1.0 / n; }

double default_delta(const ExperimentConfig& cfg) {
  if (cfg.forcing.kind == ForcingKind::zero) return 0.5;
  const double admissible = cfg.forcing.exponent - 1.0 - 1.0 / cfg.n;
  return std::min(0.5, 0.5 * admissible);
}

ModelEnd ExperimentConfig::make_model() const { return ModelEnd(n, t0, forcing); }

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  return a.n == b.n && a.t0 == b.t0 && a.forcing.kind == b.forcing.kind &&
         a.forcing.amplitude == b.forcing.amplitude && a.forcing.exponent == b.forcing.exponent &&
         a.forcing.log_frequency == b.forcing.log_frequency && a.grid_T == b.grid_T &&
         a.grid_M == b.grid_M && a.grading == b.grading &&
         a.solver.eps_start == b.solver.eps_start && a.solver.eps_ratio == b.solver.eps_ratio &&
         a.solver.eps_floor == b.solver.eps_floor && a.solver.newton_tol == b.solver.newton_tol &&
         a.solver.newton_max_iter == b.solver.newton_max_iter &&
         a.solver.line_search_halvings == b.solver.line_search_halvings && a.delta == b.delta &&
         a.lemma_samples == b.lemma_samples && a.seed == b.seed && a.out_dir == b.out_dir &&
         a.write_csv == b.write_csv && a.write_manifest == b.write_manifest;
}

namespace {

const char* kKnownKeys[] = {
    "model.n",           "model.t0",          "model.f",
    "model.amplitude",   "model.exponent",    "model.log_frequency",
    "grid.T",            "grid.M",            "grid.grading",
    "solver.eps_start",  "solver.eps_ratio",  "solver.eps_floor",
    "solver.newton_tol", "solver.newton_max_iter", "solver.line_search_halvings",
    "analysis.delta",    "analysis.lemma_samples", "analysis.seed",
    "output.dir",        "output.csv",        "output.manifest",
};

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct RawEntry {
  std::string value;
  int line;
};

struct Extractor {
  const std::map<std::string, RawEntry>& entries;
  std::vector<ConfigError>& errors;

  const RawEntry* find(const std::string& key) const {
    auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  }

  void get_double(const std::string& key, double& out) {
    const RawEntry* e = find(key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      const double v = std::stod(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      out = v;
    } catch (...) {
      errors.push_back({e->line, key + ": expected a real number, got '" + e->value + "'"});
    }
  }

  void get_int(const std::string& key, int& out) {
    const RawEntry* e = find(key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      const long v = std::stol(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      out = static_cast<int>(v);
    } catch (...) {
      errors.push_back({e->line, key + ": expected an integer, got '" + e->value + "'"});
    }
  }

  void get_long(const std::string& key, long& out) {
    const RawEntry* e = find(key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      const long v = std::stol(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      out = v;
    } catch (...) {
      errors.push_back({e->line, key + ": expected an integer, got '" + e->value + "'"});
    }
  }

  void get_u64(const std::string& key, std::uint64_t& out) {
    const RawEntry* e = find(key);
    if (!e) return;
    try {
      std::size_t pos = 0;
      const unsigned long long v = std::stoull(e->value, &pos);
      if (pos != e->value.size()) throw std::invalid_argument("");
      out = v;
    } catch (...) {
      errors.push_back({e->line, key + ": expected an unsigned integer, got '" + e->value + "'"});
    }
  }

  void get_bool(const std::string& key, bool& out) {
    const RawEntry* e = find(key);
    if (!e) return;
    if (e->value == "true") {
      out = true;
    } else if (e->value == "false") {
      out = false;
    } else {
      errors.push_back({e->line, key + ": expected true or false, got '" + e->value + "'"});
    }
  }

  void get_string(const std::string& key, std::string& out) {
    const RawEntry* e = find(key);
    if (e) out = e->value;
  }
};

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

ConfigParseResult parse_config(const std::string& text) {
  ConfigParseResult result;
  std::map<std::string, RawEntry> entries;
  std::vector<ConfigError> errors;

  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back({lineno, "expected 'section.key = value'"});
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      errors.push_back({lineno, "expected 'section.key = value'"});
      continue;
    }
    const bool known = std::any_of(std::begin(kKnownKeys), std::end(kKnownKeys),
                                   [&](const char* k) { return key == k; });
    if (!known) {
      errors.push_back({lineno, "unknown key '" + key + "'"});
      continue;
    }
    auto [it, inserted] = entries.emplace(key, RawEntry{value, lineno});
    if (!inserted) {
      errors.push_back({lineno, "duplicate key '" + key + "' (first set on line " +
                                    std::to_string(it->second.line) + ")"});
    }
  }

  ExperimentConfig cfg;
  Extractor ex{entries, errors};
  ex.get_int("model.n", cfg.n);
  ex.get_double("model.t0", cfg.t0);
  if (const RawEntry* e = ex.find("model.f")) {
    if (e->value == "zero") {
      cfg.forcing.kind = ForcingKind::zero;
    } else if (e->value == "power") {
      cfg.forcing.kind = ForcingKind::power;
    } else if (e->value == "damped") {
      cfg.forcing.kind = ForcingKind::damped_oscillatory;
    } else {
      errors.push_back({e->line, "model.f: expected zero|power|damped, got '" + e->value + "'"});
    }
  }
  ex.get_double("model.amplitude", cfg.forcing.amplitude);
  cfg.forcing.exponent = (cfg.n >= 1) ? default_forcing_exponent(cfg.n) : 4.0;
  ex.get_double("model.exponent", cfg.forcing.exponent);
  ex.get_double("model.log_frequency", cfg.forcing.log_frequency);

  cfg.grid_T = 1000.0 * cfg.t0;
  ex.get_double("grid.T", cfg.grid_T);
  ex.get_int("grid.M", cfg.grid_M);
  if (const RawEntry* e = ex.find("grid.grading")) {
    if (e->value == "uniform") {
      cfg.grading = Grading::uniform_t;
    } else if (e->value == "quasi") {
      cfg.grading = Grading::uniform_quasi;
    } else {
      errors.push_back({e->line, "grid.grading: expected uniform|quasi, got '" + e->value + "'"});
    }
  }

  ex.get_double("solver.eps_start", cfg.solver.eps_start);
  ex.get_double("solver.eps_ratio", cfg.solver.eps_ratio);
  ex.get_double("solver.eps_floor", cfg.solver.eps_floor);
  ex.get_double("solver.newton_tol", cfg.solver.newton_tol);
  ex.get_int("solver.newton_max_iter", cfg.solver.newton_max_iter);
  ex.get_int("solver.line_search_halvings", cfg.solver.line_search_halvings);

  cfg.delta = default_delta(cfg);
  ex.get_double("analysis.delta", cfg.delta);
  ex.get_long("analysis.lemma_samples", cfg.lemma_samples);
  ex.get_u64("analysis.seed", cfg.seed);

  ex.get_string("output.dir", cfg.out_dir);
  ex.get_bool("output.csv", cfg.write_csv);
  ex.get_bool("output.manifest", cfg.write_manifest);

  // cross-field invariants, re-validated regardless of source
  auto line_of = [&](const std::string& key) {
    const RawEntry* e = ex.find(key);
    return e ? e->line : 0;
  };
  if (cfg.n < 1) errors.push_back({line_of("model.n"), "model.n: need n >= 1"});
  if (!(cfg.t0 > 1.0)) errors.push_back({line_of("model.t0"), "model.t0: need t0 > 1"});
  if (cfg.forcing.kind != ForcingKind::zero && cfg.n >= 1) {
    const double min_exp = 1.0 + 1.0 / cfg.n;
    if (!(cfg.forcing.exponent > min_exp)) {
      errors.push_back({line_of("model.exponent"),
                        "model.exponent: need N > 1 + 1/n = " + format_double(min_exp) +
                            " for an integrable profile"});
    }
  }
  if (!(cfg.grid_T > cfg.t0)) errors.push_back({line_of("grid.T"), "grid.T: need T > t0"});
  if (cfg.grid_M < 16) errors.push_back({line_of("grid.M"), "grid.M: need M >= 16"});
  if (!(cfg.solver.eps_start > 0.0)) {
    errors.push_back({line_of("solver.eps_start"), "solver.eps_start: must be positive"});
  }
  if (!(cfg.solver.eps_ratio > 0.0 && cfg.solver.eps_ratio < 1.0)) {
    errors.push_back({line_of("solver.eps_ratio"), "solver.eps_ratio: must lie in (0, 1)"});
  }
  if (!(cfg.solver.eps_floor > 0.0)) {
    errors.push_back({line_of("solver.eps_floor"), "solver.eps_floor: must be positive"});
  }
  if (!(cfg.solver.newton_tol > 0.0)) {
    errors.push_back({line_of("solver.newton_tol"), "solver.newton_tol: must be positive"});
  }
  if (cfg.solver.newton_max_iter < 1) {
    errors.push_back({line_of("solver.newton_max_iter"), "solver.newton_max_iter: must be >= 1"});
  }
  if (cfg.solver.line_search_halvings < 1) {
    errors.push_back(
        {line_of("solver.line_search_halvings"), "solver.line_search_halvings: must be >= 1"});
  }
  if (cfg.forcing.kind != ForcingKind::zero && cfg.n >= 1) {
    const double admissible = cfg.forcing.exponent - 1.0 - 1.0 / cfg.n;
    if (!(cfg.delta > 0.0 && cfg.delta < admissible)) {
      errors.push_back({line_of("analysis.delta"),
                        "analysis.delta: need 0 < delta < N - 1 - 1/n = " +
                            format_double(admissible)});
    }
  } else if (!(cfg.delta > 0.0)) {
    errors.push_back({line_of("analysis.delta"), "analysis.delta: must be positive"});
  }
  if (cfg.lemma_samples < 1) {
    errors.push_back({line_of("analysis.lemma_samples"), "analysis.lemma_samples: must be >= 1"});
  }
  if (cfg.out_dir.empty()) errors.push_back({line_of("output.dir"), "output.dir: must be set"});

  std::sort(errors.begin(), errors.end(),
            [](const ConfigError& a, const ConfigError& b) { return a.line < b.line; });
  result.errors = std::move(errors);
  if (result.errors.empty()) result.config = cfg;
  return result;
}

ConfigParseResult parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    ConfigParseResult r;
    r.errors.push_back({0, "cannot open config file '" + path + "'"});
    return r;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << "analysis.delta = " << format_double(cfg.delta) << "\n";
  out << "analysis.lemma_samples = " << cfg.lemma_samples << "\n";
  out << "analysis.seed = " << cfg.seed << "\n";
  out << "grid.M = " << cfg.grid_M << "\n";
  out << "grid.T = " << format_double(cfg.grid_T) << "\n";
  out << "grid.grading = " << (cfg.grading == Grading::uniform_t ? "uniform" : "quasi") << "\n";
  out << "model.amplitude = " << format_double(cfg.forcing.amplitude) << "\n";
  out << "model.exponent = " << format_double(cfg.forcing.exponent) << "\n";
  const char* fname = cfg.forcing.kind == ForcingKind::zero
                          ? "zero"
                          : (cfg.forcing.kind == ForcingKind::power ? "power" : "damped");
  out << "model.f = " << fname << "\n";
  out << "model.log_frequency = " << format_double(cfg.forcing.log_frequency) << "\n";
  out << "model.n = " << cfg.n << "\n";
  out << "model.t0 = " << format_double(cfg.t0) << "\n";
  out << "output.csv = " << (cfg.write_csv ? "true" : "false") << "\n";
  out << "output.dir = " << cfg.out_dir << "\n";
  out << "output.manifest = " << (cfg.write_manifest ? "true" : "false") << "\n";
  out << "solver.eps_floor = " << format_double(cfg.solver.eps_floor) << "\n";
  out << "solver.eps_ratio = " << format_double(cfg.solver.eps_ratio) << "\n";
  out << "solver.eps_start = " << format_double(cfg.solver.eps_start) << "\n";
  out << "solver.line_search_halvings = " << cfg.solver.line_search_halvings << "\n";
  out << "solver.newton_max_iter = " << cfg.solver.newton_max_iter << "\n";
  out << "solver.newton_tol = " << format_double(cfg.solver.newton_tol) << "\n";
  return out.str();
}

}  // namespace mare
