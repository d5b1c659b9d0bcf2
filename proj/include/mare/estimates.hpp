#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "mare/model_end.hpp"
#include "mare/rng.hpp"
#include "mare/solver.hpp"

namespace mare {

/// Power-law fit of a decaying field on one window [t, 4t].
struct DecayFit {
  double exponent = 0.0;
  double constant = 0.0;
  double t_lo = 0.0;
  double t_hi = 0.0;
  double r_squared = 0.0;
  int nodes = 0;
  bool skipped = false;  // sign change or magnitude below the floor inside the window
};

/// Per-sample outcome of a lemma check: ratio attained/allowed (pass iff <= 1).
struct LemmaOutcome {
  double ratio = 0.0;
  bool feasible = true;
};

struct LemmaReport {
  long samples = 0;
  double worst_ratio = 0.0;
  bool pass = true;
  std::uint64_t worst_seed = 0;
};

/// Bounds (1+C_n sqrt(eps))^{-1} <= a_i <= 1+C_n sqrt(eps) with C_n = 3 sqrt(n)
/// for positive a with sum a <= n(1+eps); the product constraint is enforced by
/// exact projection onto prod a = 1.
LemmaOutcome check_sqrteps(std::vector<double> a, double eps);

/// sum (sqrt(a_i)-1)^2 + 2 (sum sqrt(a_i) - n (prod a_j)^{1/(2n)}) - n eps;
/// must be <= 0 on feasible inputs (the subtracted AM-GM term is >= 0).
double sqrteps_proof_gap(const std::vector<double>& a, double eps);

/// Eigenvalue pinch from a Laplacian bound: if sum mu <= C t^{-beta} and
/// prod (1+mu_i) = e^{f} with |f| <= t^{-beta}, then |mu_i| <= C' t^{-beta/2}
/// with C' from the sqrt(eps) lemma chain (rescale to product 1, apply bound).
LemmaOutcome pinch_from_laplacian(const std::vector<double>& mu, double f_val, double C,
                                  double beta, double t);

double pinch_constant_prime(int n, double C);

/// max_ij |a_ij| <= n ||A|| for hermitian A; ||A|| from the best of 2n^2
/// random unit vectors refined by power iteration. Non-hermitian input
/// (||A - A*|| > 1e-12) is rejected as infeasible.
LemmaOutcome hermitian_entry_bound(const std::vector<std::complex<double>>& A, int n, Rng& rng);

double hermitian_operator_norm(const std::vector<std::complex<double>>& A, int n, Rng& rng,
                               double rel_tol = 1e-10);

/// Log-log least-squares fits on dyadic windows [t, ratio*t] with at least
/// min_nodes nodes; windows with a sign change or values below min_abs are
/// flagged and skipped.
std::vector<DecayFit> fit_decay(const RadialField& field, double window_ratio = 4.0,
                                int min_nodes = 8, double min_abs = 0.0);

/// Last non-skipped window (the asymptotic exponent), or nullptr.
const DecayFit* last_valid_fit(const std::vector<DecayFit>& fits);

/// Main-theorem check at delta = 1/(3n): scaled Laplacian supremum, the pinch
/// constant sup |lambda-1| t^{1/(6n)}, and the fitted decay of both eigenvalue
/// fields against the envelope -1/(6n).
struct PinchReport {
  double delta_used = 0.0;
  double sup_scaled_laplacian = 0.0;  // sup_t (Lap_w u) t^delta, signed
  double pinch_constant = 0.0;        // sup_t |lambda-1| t^{delta/2}, both fields
  double fitted_pinch_exponent = 0.0;
  double base_exponent = 0.0;
  double fiber_exponent = 0.0;
  bool vacuous = false;  // identically flat fields (f = 0)
  bool envelope_ok = true;
};
PinchReport verify_main_theorem(const ModelEnd& model, const Solution& sol);

/// eps-scaling of the perturbed solutions: S(eps) = sup_t |u_eps| t^delta and
/// the gradient/Laplacian analogues, fitted against the envelope slope
/// 1 + n delta - delta/(n+1); also re-checks the trivial bound
/// sup|u_eps| <= sup|f|/eps at every trace point.
struct ScalingReport {
  double delta = 0.0;
  double envelope = 0.0;
  double slope_value = 0.0;
  double slope_gradient = 0.0;
  double slope_laplacian = 0.0;
  bool vacuous = false;
  bool trivial_bound_ok = true;
  double worst_trivial_margin = 0.0;  // max over trace of sup|u| - sup|f|/eps
  std::vector<double> eps_values, S_values, S_gradient, S_laplacian;
  bool envelope_ok = true;
};
ScalingReport verify_ueps_scaling(const ModelEnd& model, const std::vector<Solution>& trace,
                                  double delta);

// Seeded random property suites. Failures reproduce from the logged seed.
LemmaReport run_sqrteps_suite(int n, long samples, std::uint64_t seed);
LemmaReport run_proof_inequality_suite(int n, long samples, std::uint64_t seed);
LemmaReport run_pinch_suite(int n, long samples, std::uint64_t seed);
LemmaReport run_hermitian_suite(int n, long samples, std::uint64_t seed);

struct BoundedGeometrySuite {
  LemmaReport bounds;
  double max_derivative_variation = 0.0;  // relative to the scale 3/(2 beta)
  bool derivative_stable = true;
};
BoundedGeometrySuite run_bounded_geometry_suite(long samples, std::uint64_t seed);

}  // namespace mare
