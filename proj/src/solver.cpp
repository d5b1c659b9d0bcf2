#include "mare/solver.hpp"

#include <algorithm>
#include <cmath>

namespace mare {

RadialDiscretization::RadialDiscretization(const ModelEnd& model, GridPtr grid, int gauss_points)
    : model_(model), grid_(std::move(grid)), gauss_points_(gauss_points) {
  if (!grid_) throw std::invalid_argument("RadialDiscretization: null grid");
  if (!model_.normalized()) {
    throw std::invalid_argument("RadialDiscretization: model must be normalized (c0 unset)");
  }
  inv_n_ = 1.0 / model_.n();
  const auto& t = grid_->nodes;
  const int cells = grid_->cells();
  const GaussRule rule = gauss_legendre(gauss_points_);
  cell_dt_.resize(cells);
  cell_q_.resize(cells);
  gauss_s_.resize(static_cast<std::size_t>(cells) * gauss_points_);
  gauss_w_.resize(gauss_s_.size());
  gauss_e_.resize(gauss_s_.size());
  gauss_sr_.resize(gauss_s_.size());
  auto ef = [&](double s) { return std::exp(eval_f(model_, s)); };
  for (int j = 0; j < cells; ++j) {
    const double a = t[j], b = t[j + 1];
    const double dt = b - a;
    cell_dt_[j] = dt;
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * dt;
    double q = 0.0;
    for (int g = 0; g < gauss_points_; ++g) {
      const std::size_t idx = static_cast<std::size_t>(j) * gauss_points_ + g;
      const double s = mid + half * rule.x[g];
      gauss_s_[idx] = s;
      gauss_w_[idx] = half * rule.w[g];
      gauss_sr_[idx] = std::pow(s, inv_n_);
      gauss_e_[idx] = integrate_gauss(rule, ef, a, s);
      q += gauss_w_[idx] * ef(s);
    }
    cell_q_[j] = q / dt;
  }
}

bool RadialDiscretization::positive_state(const std::vector<double>& h) const {
  for (double v : h) {
    if (!(v > 0.0)) return false;
  }
  return true;
}

std::vector<double> RadialDiscretization::residual(const std::vector<double>& u,
                                                   const std::vector<double>& h,
                                                   double eps) const {
  const auto& t = grid_->nodes;
  const int cells = grid_->cells();
  if (u.size() != t.size() || h.size() != t.size()) {
    throw std::invalid_argument("residual: state length mismatch");
  }
  if (!positive_state(h)) {
    throw std::domain_error("residual: positivity violated (h <= 0), residual undefined");
  }
  std::vector<double> r(2 * t.size());
  r[0] = h[0] - (t[0] + model_.c0());
  for (int j = 0; j < cells; ++j) {
    const double dt = cell_dt_[j];
    const double eu = std::exp(eps * 0.5 * (u[j] + u[j + 1]));
    double acc = 0.0;
    for (int g = 0; g < gauss_points_; ++g) {
      const std::size_t idx = static_cast<std::size_t>(j) * gauss_points_ + g;
      acc += gauss_w_[idx] * (std::pow(h[j] + eu * gauss_e_[idx], inv_n_) - gauss_sr_[idx]);
    }
    r[2 * j + 1] = (u[j + 1] - u[j]) / dt - acc / dt;
    r[2 * j + 2] = (h[j + 1] - h[j]) / dt - cell_q_[j] * eu;
  }
  r[2 * cells + 1] = u[cells];
  return r;
}

BandedMatrix RadialDiscretization::jacobian(const std::vector<double>& u,
                                            const std::vector<double>& h, double eps) const {
  const auto& t = grid_->nodes;
  const int cells = grid_->cells();
  if (u.size() != t.size() || h.size() != t.size()) {
    throw std::invalid_argument("jacobian: state length mismatch");
  }
  if (!positive_state(h)) {
    throw std::domain_error("jacobian: positivity violated (h <= 0)");
  }
  BandedMatrix J(unknowns(), band_lower, band_upper);
  J.at(0, 1) = 1.0;  // h_0 boundary row
  for (int j = 0; j < cells; ++j) {
    const double dt = cell_dt_[j];
    const double um = 0.5 * (u[j] + u[j + 1]);
    const double eu = std::exp(eps * um);
    double dG_dh = 0.0;   // d/dh_j of the cell integral average
    double dG_dum = 0.0;  // d/d(u_mid)
    for (int g = 0; g < gauss_points_; ++g) {
      const std::size_t idx = static_cast<std::size_t>(j) * gauss_points_ + g;
      const double base = h[j] + eu * gauss_e_[idx];
      const double dpow = inv_n_ * std::pow(base, inv_n_ - 1.0);
      dG_dh += gauss_w_[idx] * dpow;
      dG_dum += gauss_w_[idx] * dpow * eps * eu * gauss_e_[idx];
    }
    dG_dh /= dt;
    dG_dum /= dt;
    const int ru = 2 * j + 1;
    J.at(ru, 2 * j) = -1.0 / dt - 0.5 * dG_dum;      // u_j
    J.at(ru, 2 * j + 2) = 1.0 / dt - 0.5 * dG_dum;   // u_{j+1}
    J.at(ru, 2 * j + 1) = -dG_dh;                    // h_j
    const int rh = 2 * j + 2;
    const double dq = cell_q_[j] * eu * eps * 0.5;
    J.at(rh, 2 * j + 1) = -1.0 / dt;      // h_j
    J.at(rh, 2 * j + 3) = 1.0 / dt;       // h_{j+1}
    J.at(rh, 2 * j) = -dq;                // u_j
    J.at(rh, 2 * j + 2) = -dq;            // u_{j+1}
  }
  J.at(2 * cells + 1, 2 * cells) = 1.0;  // u_M boundary row
  return J;
}

std::vector<double> residual_eps(const ModelEnd& model, const Solution& sol, double eps) {
  RadialDiscretization disc(model, sol.grid);
  return disc.residual(sol.u.values, sol.h.values, eps);
}

BandedMatrix assemble_jacobian(const ModelEnd& model, const Solution& sol, double eps) {
  RadialDiscretization disc(model, sol.grid);
  return disc.jacobian(sol.u.values, sol.h.values, eps);
}

namespace {

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

Solution solve_eps(const ModelEnd& model, GridPtr grid, double eps, const SolverConfig& config,
                   const Solution* warm_start) {
  if (!model.normalized()) throw std::invalid_argument("solve_eps: model must be normalized");
  if (!(eps >= 0.0)) throw std::invalid_argument("solve_eps: eps must be >= 0");
  RadialDiscretization disc(model, grid);
  const auto& t = grid->nodes;
  const std::size_t m = t.size();

  std::vector<double> u(m, 0.0), h(m);
  if (warm_start) {
    if (warm_start->u.values.size() != m) {
      throw std::invalid_argument("solve_eps: warm start grid mismatch");
    }
    u = warm_start->u.values;
    h = warm_start->h.values;
  } else {
    for (std::size_t i = 0; i < m; ++i) h[i] = t[i] + model.c0();
  }
  NewtonReport report;
  if (!disc.positive_state(h)) {
    throw SolveError(SolveFailure::positivity, eps, "solve_eps: initial state violates h > 0", {},
                     u, h);
  }

  std::vector<double> r = disc.residual(u, h, eps);
  double rn = sup_norm(r);
  report.residual_history.push_back(rn);

  for (int iter = 0; iter < config.newton_max_iter && rn > config.newton_tol; ++iter) {
    BandedMatrix J = disc.jacobian(u, h, eps);
    try {
      J.factor();
    } catch (const SingularBandError& e) {
      throw SolveError(SolveFailure::singular_jacobian, eps,
                       std::string("solve_eps: ") + e.what(), report.residual_history, u, h);
    }
    std::vector<double> step(r);
    for (double& x : step) x = -x;
    J.solve(step);

    double lambda = 1.0;
    bool accepted = false;
    bool positivity_only = true;
    std::vector<double> ut(m), ht(m), rt;
    double rtn = 0.0;
    for (int halve = 0; halve <= config.line_search_halvings; ++halve) {
      for (std::size_t i = 0; i < m; ++i) {
        ut[i] = u[i] + lambda * step[2 * i];
        ht[i] = h[i] + lambda * step[2 * i + 1];
      }
      if (disc.positive_state(ht)) {
        positivity_only = false;
        rt = disc.residual(ut, ht, eps);
        rtn = sup_norm(rt);
        if (rtn <= (1.0 - 1e-4 * lambda) * rn || rtn <= config.newton_tol) {
          accepted = true;
          break;
        }
      }
      lambda *= 0.5;
    }
    if (!accepted) {
      throw SolveError(positivity_only ? SolveFailure::positivity : SolveFailure::non_convergence,
                       eps,
                       positivity_only
                           ? "solve_eps: positivity guard unrecoverable within line search"
                           : "solve_eps: line search stagnated",
                       report.residual_history, u, h);
    }
    u.swap(ut);
    h.swap(ht);
    r.swap(rt);
    rn = rtn;
    report.iterations = iter + 1;
    report.residual_history.push_back(rn);
    report.step_lengths.push_back(lambda);
  }

  report.final_residual = rn;
  report.converged = rn <= config.newton_tol;
  if (!report.converged) {
    throw SolveError(SolveFailure::non_convergence, eps,
                     "solve_eps: no convergence within newton_max_iter",
                     report.residual_history, u, h);
  }

  Solution sol;
  sol.grid = grid;
  sol.u = RadialField(grid, std::move(u));
  sol.h = RadialField(grid, std::move(h));
  sol.eps = eps;
  sol.newton = std::move(report);
  auto [lb, lf] = eigenvalue_ratios(model, sol);
  sol.lambda_base = std::move(lb);
  sol.lambda_fiber = std::move(lf);
  return sol;
}

ContinuationResult continue_to_limit(const ModelEnd& model, GridPtr grid,
                                     const SolverConfig& config) {
  if (!(config.eps_ratio > 0.0 && config.eps_ratio < 1.0)) {
    throw std::invalid_argument("continue_to_limit: eps_ratio must lie in (0,1)");
  }
  ContinuationResult out;
  const Solution* warm = nullptr;
  for (double e = config.eps_start; e >= config.eps_floor * (1.0 - 1e-12);
       e *= config.eps_ratio) {
    out.trace.push_back(solve_eps(model, grid, e, config, warm));
    warm = &out.trace.back();
  }
  out.limit = solve_eps(model, grid, 0.0, config, warm);
  return out;
}

Solution closed_form_eps0(const ModelEnd& model, GridPtr grid) {
  if (!model.normalized()) {
    throw std::invalid_argument("closed_form_eps0: model must be normalized");
  }
  const auto& t = grid->nodes;
  const std::size_t m = t.size();
  const double inv_n = 1.0 / model.n();
  auto em1 = [&](double s) { return std::expm1(eval_f(model, s)); };

  // tail(t) = Int_t^inf (e^f - 1): adaptive from the far node, accumulated down
  std::vector<double> tail(m);
  tail[m - 1] = forcing_tail_integral(model, t[m - 1]);
  for (std::size_t j = m - 1; j-- > 0;) {
    tail[j] = tail[j + 1] + adaptive_simpson(em1, t[j], t[j + 1], 1e-13);
  }

  std::vector<double> h(m);
  for (std::size_t i = 0; i < m; ++i) {
    h[i] = t[i] - tail[i];
    if (!(h[i] > 0.0)) {
      throw std::domain_error("closed_form_eps0: h <= 0, profile too strong for the cut");
    }
  }

  const GaussRule outer = gauss_legendre(20);
  const GaussRule inner = gauss_legendre(20);
  std::vector<double> u(m, 0.0);
  for (std::size_t j = m - 1; j-- > 0;) {
    const double a = t[j], b = t[j + 1];
    auto integrand = [&](double s) {
      const double tail_s = tail[j + 1] + integrate_gauss(inner, em1, s, b);
      return std::pow(s - tail_s, inv_n) - std::pow(s, inv_n);
    };
    u[j] = u[j + 1] - integrate_gauss(outer, integrand, a, b);
  }

  Solution sol;
  sol.grid = grid;
  sol.u = RadialField(grid, std::move(u));
  sol.h = RadialField(grid, std::move(h));
  sol.eps = 0.0;
  auto [lb, lf] = eigenvalue_ratios(model, sol);
  sol.lambda_base = std::move(lb);
  sol.lambda_fiber = std::move(lf);
  sol.newton.converged = true;
  sol.newton.iterations = 0;
  sol.newton.final_residual = sup_norm(residual_eps(model, sol, 0.0));
  sol.newton.residual_history = {sol.newton.final_residual};
  return sol;
}

std::pair<RadialField, RadialField> eigenvalue_ratios(const ModelEnd& model, const Solution& sol) {
  const auto& t = sol.grid->nodes;
  const double inv_n = 1.0 / model.n();
  std::vector<double> lb(t.size()), lf(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double hv = sol.h.values[i];
    if (!(hv > 0.0)) throw std::domain_error("eigenvalue_ratios: positivity violated");
    const double ratio = hv / t[i];
    lb[i] = std::pow(ratio, inv_n);
    lf[i] = std::exp(eval_f(model, t[i]) + sol.eps * sol.u.values[i]) * std::pow(ratio, inv_n - 1.0);
  }
  return {RadialField(sol.grid, std::move(lb)), RadialField(sol.grid, std::move(lf))};
}

RadialField ode_first_derivative(const ModelEnd& model, const Solution& sol) {
  const auto& t = sol.grid->nodes;
  const double inv_n = 1.0 / model.n();
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out[i] = std::pow(sol.h.values[i], inv_n) - std::pow(t[i], inv_n);
  }
  return RadialField(sol.grid, std::move(out));
}

RadialField ode_second_derivative(const ModelEnd& model, const Solution& sol) {
  const auto& t = sol.grid->nodes;
  const double inv_n = 1.0 / model.n();
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double hp = std::exp(eval_f(model, t[i]) + sol.eps * sol.u.values[i]);
    out[i] = inv_n * (std::pow(sol.h.values[i], inv_n - 1.0) * hp - std::pow(t[i], inv_n - 1.0));
  }
  return RadialField(sol.grid, std::move(out));
}

RadialField laplacian_of_solution(const ModelEnd& model, const Solution& sol) {
  const auto& t = sol.grid->nodes;
  const int n = model.n();
  const double inv_n = 1.0 / n;
  const RadialField d1 = ode_first_derivative(model, sol);
  const RadialField d2 = ode_second_derivative(model, sol);
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out[i] = (n - 1) * d1.values[i] * std::pow(t[i], -inv_n) +
             n * d2.values[i] * std::pow(t[i], 1.0 - inv_n);
  }
  return RadialField(sol.grid, std::move(out));
}

}  // namespace mare
