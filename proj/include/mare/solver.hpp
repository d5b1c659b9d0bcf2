#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mare/banded.hpp"
#include "mare/model_end.hpp"
#include "mare/quadrature.hpp"

namespace mare {

struct SolverConfig {
  double eps_start = 1.0;
  double eps_ratio = 0.5;
  double eps_floor = 1e-10;
  double newton_tol = 1e-11;  // residual sup-norm
  int newton_max_iter = 50;
  int line_search_halvings = 30;
};

struct NewtonReport {
  int iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
  std::vector<double> residual_history;  // sup-norm per iterate, starting at the initial guess
  std::vector<double> step_lengths;      // accepted damping factors
};

/// Discrete solution of the radial Monge-Ampere system. h is the flux
/// variable (t^{1/n} + u')^n; the lambda fields are the eigenvalue ratios of
/// the solved metric against the reference.
struct Solution {
  GridPtr grid;
  RadialField u, h;
  RadialField lambda_base, lambda_fiber;
  double eps = 0.0;
  NewtonReport newton;
};

enum class SolveFailure { non_convergence, positivity, singular_jacobian };

class SolveError : public std::runtime_error {
 public:
  SolveError(SolveFailure kind_in, double eps_in, const std::string& what_in,
             std::vector<double> residual_history_in, std::vector<double> last_u_in,
             std::vector<double> last_h_in)
      : std::runtime_error(what_in),
        kind(kind_in),
        eps(eps_in),
        residual_history(std::move(residual_history_in)),
        last_u(std::move(last_u_in)),
        last_h(std::move(last_h_in)) {}
  SolveFailure kind;
  double eps;
  std::vector<double> residual_history;
  std::vector<double> last_u, last_h;
};

/// Collocation of the first-order system h' = e^{f + eps u},
/// u' = h^{1/n} - t^{1/n} on the grid cells. The known factor e^f is
/// integrated per cell by Gauss quadrature so the eps = 0 system reproduces
/// the continuum solution at the nodes; the unknown factor e^{eps u} is taken
/// at the cell midpoint. Unknown layout x = (u_0, h_0, u_1, h_1, ...), band
/// kl = 2, ku = 1.
class RadialDiscretization {
 public:
  RadialDiscretization(const ModelEnd& model, GridPtr grid, int gauss_points = 15);

  static constexpr int band_lower = 2;
  static constexpr int band_upper = 1;

  const ModelEnd& model() const { return model_; }
  const GridPtr& grid() const { return grid_; }
  int unknowns() const { return 2 * static_cast<int>(grid_->nodes.size()); }

  std::vector<double> residual(const std::vector<double>& u, const std::vector<double>& h,
                               double eps) const;
  BandedMatrix jacobian(const std::vector<double>& u, const std::vector<double>& h,
                        double eps) const;
  bool positive_state(const std::vector<double>& h) const;
  double cell_average_ef(int cell) const { return cell_q_[cell]; }

 private:
  ModelEnd model_;
  GridPtr grid_;
  int gauss_points_;
  double inv_n_;
  std::vector<double> cell_dt_;
  std::vector<double> cell_q_;    // (1/dt) Int_cell e^f
  std::vector<double> gauss_s_;   // abscissae, flattened per cell
  std::vector<double> gauss_w_;   // weights scaled to the cell
  std::vector<double> gauss_e_;   // Int_{t_j}^{s_g} e^f
  std::vector<double> gauss_sr_;  // s_g^{1/n}
};

/// Cell residuals of the discrete system plus the two boundary residuals
/// h(t0) = t0 + c0 and u(T) = 0; zero iff sol solves the discrete system.
std::vector<double> residual_eps(const ModelEnd& model, const Solution& sol, double eps);

/// Exact Jacobian of residual_eps with respect to the node values.
BandedMatrix assemble_jacobian(const ModelEnd& model, const Solution& sol, double eps);

/// Damped Newton with backtracking line search and positivity guard.
Solution solve_eps(const ModelEnd& model, GridPtr grid, double eps, const SolverConfig& config,
                   const Solution* warm_start = nullptr);

struct ContinuationResult {
  Solution limit;               // eps = 0
  std::vector<Solution> trace;  // eps_start * eps_ratio^k down to eps_floor
};

/// Geometric eps-schedule with warm starts, then a final solve at eps = 0.
ContinuationResult continue_to_limit(const ModelEnd& model, GridPtr grid,
                                     const SolverConfig& config);

/// Quadrature-built eps = 0 solution: h(t) = t - Int_t^inf (e^f - 1),
/// u(t) = -Int_t^T (h^{1/n} - s^{1/n}). Independent oracle for the solver.
Solution closed_form_eps0(const ModelEnd& model, GridPtr grid);

/// lambda_base = (t^{1/n}+u')/t^{1/n} (multiplicity n-1),
/// lambda_fiber = ((1/n)t^{1/n-1}+u'')/((1/n)t^{1/n-1}), evaluated through the
/// solved system (u' = h^{1/n}-t^{1/n}, h' = e^{f+eps u}).
std::pair<RadialField, RadialField> eigenvalue_ratios(const ModelEnd& model, const Solution& sol);

/// u', u'' and the scaled Laplacian of u evaluated through the system
/// relations rather than difference stencils.
RadialField ode_first_derivative(const ModelEnd& model, const Solution& sol);
RadialField ode_second_derivative(const ModelEnd& model, const Solution& sol);
RadialField laplacian_of_solution(const ModelEnd& model, const Solution& sol);

}  // namespace mare
