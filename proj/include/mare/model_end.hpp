#pragma once

#include <complex>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mare {

enum class ForcingKind { zero, power, damped_oscillatory };

/// Forcing profile f(t): zero, A t^{-N}, or A t^{-N} cos(kappa log t).
struct ForcingSpec {
  ForcingKind kind = ForcingKind::zero;
  double amplitude = 1.0;      // A
  double exponent = 4.0;       // N
  double log_frequency = 1.0;  // kappa (damped profile only)
};

/// Radial model geometry near the divisor in the coordinate t = -log||S||^2.
/// The reference metric is a(t) w0 + b(t) i dt^dt with a = t^{1/n},
/// b = (1/n) t^{1/n-1}; the compact part of the manifold enters only through
/// the mass constant c0 fixed by normalize_mass. Immutable after construction.
class ModelEnd {
 public:
  ModelEnd(int n, double t0, ForcingSpec f);

  int n() const { return n_; }
  double t0() const { return t0_; }
  const ForcingSpec& forcing() const { return f_; }
  bool normalized() const { return normalized_; }
  double c0() const;

 private:
  friend ModelEnd normalize_mass(const ModelEnd&);
  int n_;
  double t0_;
  ForcingSpec f_;
  double c0_ = 0.0;
  bool normalized_ = false;
};

enum class Grading { uniform_t, uniform_quasi };

/// Strictly increasing nodes t0 = t_0 < ... < t_M = T, M >= 16.
/// uniform_quasi grades the nodes uniformly in sigma = t^{(n+1)/(2n)}.
struct RadialGrid {
  std::vector<double> nodes;
  Grading grading;

  RadialGrid(std::vector<double> nodes_in, Grading grading_in);
  int cells() const { return static_cast<int>(nodes.size()) - 1; }
  double front() const { return nodes.front(); }
  double back() const { return nodes.back(); }
};

using GridPtr = std::shared_ptr<const RadialGrid>;

/// Scalar function sampled on a radial grid. Derivatives use second-order
/// stencils on the graded grid, one-sided at the ends.
struct RadialField {
  GridPtr grid;
  std::vector<double> values;

  RadialField() = default;
  RadialField(GridPtr g, std::vector<double> v);
  explicit RadialField(GridPtr g, double fill = 0.0);

  double sup_abs() const;
  RadialField derivative() const;
  RadialField second_derivative() const;
};

/// (a, b) = (t^{1/n}, (1/n) t^{1/n-1}); throws std::domain_error for t < t0.
std::pair<double, double> reference_coefficients(const ModelEnd& model, double t);

double eval_f(const ModelEnd& model, double t);

/// Copy of the model with c0 = -Int_{t0}^inf (e^f - 1) ds, adaptive quadrature
/// plus an analytic tail; relative error <= 1e-10.
ModelEnd normalize_mass(const ModelEnd& model);

/// Int_t^inf (e^f - 1) ds.
double forcing_tail_integral(const ModelEnd& model, double t);

/// Trace of i ddbar(psi) against the reference metric:
/// (n-1) psi' t^{-1/n} + n psi'' t^{1-1/n}.
RadialField laplacian_radial(const ModelEnd& model, const RadialField& psi);

GridPtr quasi_grid(const ModelEnd& model, double T, int M);
GridPtr uniform_grid(const ModelEnd& model, double T, int M);
GridPtr make_grid(const ModelEnd& model, double T, int M, Grading grading);

struct BoundedGeometryValue {
  double value = 0.0;
  bool within_bounds = false;  // inside [1/(2 beta), 3/(2 beta)]
};

/// h(w) = (beta + (2 Re((w+C)^{2n/(n+1)}))^{-delta})^{-1} in the
/// quasi-coordinate cell |w| <= pi. Out-of-range values are flagged, never
/// silently returned as in-range.
BoundedGeometryValue bounded_geometry_factor(double beta, double delta, int n, double C,
                                             std::complex<double> w);

/// Smallest C for which the two-sided bound holds for every |w| <= pi.
double bounded_geometry_cmin(double beta, double delta, int n);

namespace detail {
/// Weights of the interpolating-polynomial derivative: sum_i w_i g(x0 + d_i)
/// reproduces g^{(order)}(x0) exactly for polynomials of degree < d.size().
std::vector<double> fd_weights(int order, const std::vector<double>& offsets);
}  // namespace detail

}  // namespace mare
