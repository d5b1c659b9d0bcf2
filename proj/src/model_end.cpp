#include "mare/model_end.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "mare/quadrature.hpp"

namespace mare {

namespace detail {

std::vector<double> fd_weights(int order, const std::vector<double>& offsets) {
  const int k = static_cast<int>(offsets.size());
  if (order < 0 || order >= k) throw std::invalid_argument("fd_weights: order out of range");
  // Vandermonde system sum_i w_i d_i^p = p! [p == order], p = 0..k-1.
  std::vector<double> A(static_cast<std::size_t>(k) * k);
  std::vector<double> b(k, 0.0);
  for (int p = 0; p < k; ++p) {
    for (int i = 0; i < k; ++i) A[static_cast<std::size_t>(p) * k + i] = std::pow(offsets[i], p);
  }
  double fact = 1.0;
  for (int p = 1; p <= order; ++p) fact *= p;
  b[order] = fact;
  // dense Gaussian elimination with partial pivoting (k <= 4 in practice)
  for (int col = 0; col < k; ++col) {
    int piv = col;
    for (int r = col + 1; r < k; ++r) {
      if (std::abs(A[static_cast<std::size_t>(r) * k + col]) >
          std::abs(A[static_cast<std::size_t>(piv) * k + col]))
        piv = r;
    }
    if (A[static_cast<std::size_t>(piv) * k + col] == 0.0) {
      throw std::invalid_argument("fd_weights: coincident offsets");
    }
    if (piv != col) {
      for (int c = 0; c < k; ++c)
        std::swap(A[static_cast<std::size_t>(piv) * k + c], A[static_cast<std::size_t>(col) * k + c]);
      std::swap(b[piv], b[col]);
    }
    for (int r = col + 1; r < k; ++r) {
      const double m = A[static_cast<std::size_t>(r) * k + col] / A[static_cast<std::size_t>(col) * k + col];
      if (m == 0.0) continue;
      for (int c = col; c < k; ++c)
        A[static_cast<std::size_t>(r) * k + c] -= m * A[static_cast<std::size_t>(col) * k + c];
      b[r] -= m * b[col];
    }
  }
  std::vector<double> w(k, 0.0);
  for (int r = k - 1; r >= 0; --r) {
    double acc = b[r];
    for (int c = r + 1; c < k; ++c) acc -= A[static_cast<std::size_t>(r) * k + c] * w[c];
    w[r] = acc / A[static_cast<std::size_t>(r) * k + r];
  }
  return w;
}

}  // namespace detail

ModelEnd::ModelEnd(int n, double t0, ForcingSpec f) : n_(n), t0_(t0), f_(f) {
  if (n_ < 1) throw std::invalid_argument("ModelEnd: complex dimension n must be >= 1");
  if (!(t0_ > 1.0)) throw std::invalid_argument("ModelEnd: inner cut t0 must exceed 1");
  if (f_.kind != ForcingKind::zero) {
    const double min_exp = 1.0 + 1.0 / n_;
    if (!(f_.exponent > min_exp)) {
      throw std::invalid_argument("ModelEnd: non-integrable forcing, need N > 1 + 1/n");
    }
    if (!std::isfinite(f_.amplitude)) throw std::invalid_argument("ModelEnd: bad amplitude");
  }
}

double ModelEnd::c0() const {
  if (!normalized_) throw std::logic_error("ModelEnd: c0 requested before normalize_mass");
  return c0_;
}

RadialGrid::RadialGrid(std::vector<double> nodes_in, Grading grading_in)
    : nodes(std::move(nodes_in)), grading(grading_in) {
  if (nodes.size() < 17) throw std::invalid_argument("RadialGrid: need M >= 16 cells");
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    if (!(nodes[i] > nodes[i - 1])) {
      throw std::invalid_argument("RadialGrid: nodes must be strictly increasing");
    }
  }
}

RadialField::RadialField(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid || values.size() != grid->nodes.size()) {
    throw std::invalid_argument("RadialField: values/grid length mismatch");
  }
}

RadialField::RadialField(GridPtr g, double fill) : grid(std::move(g)) {
  if (!grid) throw std::invalid_argument("RadialField: null grid");
  values.assign(grid->nodes.size(), fill);
}

double RadialField::sup_abs() const {
  double m = 0.0;
  for (double v : values) m = std::max(m, std::abs(v));
  return m;
}

namespace {

RadialField stencil_derivative(const RadialField& field, int order) {
  const auto& t = field.grid->nodes;
  const int m = static_cast<int>(t.size());
  const int pts = (order == 1) ? 3 : 3;   // interior stencil width
  const int endpts = (order == 1) ? 3 : 4;  // one-sided width keeping O(h^2)
  if (m < endpts) throw std::invalid_argument("derivative: grid too short");
  std::vector<double> out(m, 0.0);
  auto apply = [&](int node, int first, int count) {
    std::vector<double> d(count);
    for (int i = 0; i < count; ++i) d[i] = t[first + i] - t[node];
    const auto w = detail::fd_weights(order, d);
    double acc = 0.0;
    for (int i = 0; i < count; ++i) acc += w[i] * field.values[first + i];
    out[node] = acc;
  };
  apply(0, 0, endpts);
  for (int i = 1; i + 1 < m; ++i) apply(i, i - 1, pts);
  apply(m - 1, m - endpts, endpts);
  return RadialField(field.grid, std::move(out));
}

}  // namespace

RadialField RadialField::derivative() const { return stencil_derivative(*this, 1); }

RadialField RadialField::second_derivative() const { return stencil_derivative(*this, 2); }

std::pair<double, double> reference_coefficients(const ModelEnd& model, double t) {
  if (!(t >= model.t0() * (1.0 - 1e-12))) {
    throw std::domain_error("reference_coefficients: t below the inner cut");
  }
  const double inv_n = 1.0 / model.n();
  const double a = std::pow(t, inv_n);
  const double b = inv_n * std::pow(t, inv_n - 1.0);
  return {a, b};
}

double eval_f(const ModelEnd& model, double t) {
  if (!(t >= model.t0() * (1.0 - 1e-12))) throw std::domain_error("eval_f: t below the inner cut");
  const ForcingSpec& f = model.forcing();
  switch (f.kind) {
    case ForcingKind::zero:
      return 0.0;
    case ForcingKind::power:
      return f.amplitude * std::pow(t, -f.exponent);
    case ForcingKind::damped_oscillatory:
      return f.amplitude * std::pow(t, -f.exponent) * std::cos(f.log_frequency * std::log(t));
  }
  return 0.0;
}

namespace {

// Series for Int_s^inf (e^{A x^{-N}} - 1) dx = sum_k (A^k / k!) s^{1-kN}/(kN-1),
// valid (and fast) once |A| s^{-N} <= 1/2.
double power_tail_series(double A, double N, double s) {
  const double z = A * std::pow(s, -N);
  double term_pow = 1.0;  // z^k / k!
  double acc = 0.0;
  for (int k = 1; k <= 400; ++k) {
    term_pow *= z / k;
    const double term = term_pow * s / (k * N - 1.0);
    acc += term;
    if (std::abs(term) <= 1e-18 * (std::abs(acc) + 1e-300)) break;
  }
  return acc;
}

}  // namespace

double forcing_tail_integral(const ModelEnd& model, double t) {
  const ForcingSpec& f = model.forcing();
  if (f.kind == ForcingKind::zero || f.amplitude == 0.0) return 0.0;
  const double N = f.exponent;
  const double Aabs = std::abs(f.amplitude);
  auto integrand = [&](double s) { return std::expm1(eval_f(model, s)); };

  if (f.kind == ForcingKind::power) {
    double s = t;
    double acc = 0.0;
    while (Aabs * std::pow(s, -N) > 0.5) {
      acc += adaptive_simpson(integrand, s, 2.0 * s, 1e-13);
      s *= 2.0;
    }
    return acc + power_tail_series(f.amplitude, N, s);
  }

  // damped-oscillatory: dyadic blocks with the envelope bound
  // |e^f - 1| <= |f| e^{|f|} <= 1.25 |A| s^{-N} once |f| <= 0.2.
  double s = t;
  double acc = 0.0;
  const double scale = Aabs * std::pow(t, 1.0 - N) / (N - 1.0) + 1e-300;
  for (int block = 0; block < 400; ++block) {
    acc += adaptive_simpson(integrand, s, 2.0 * s, 1e-13);
    s *= 2.0;
    const double fbound = Aabs * std::pow(s, -N);
    const double tail_bound = 1.25 * Aabs * std::pow(s, 1.0 - N) / (N - 1.0);
    if (fbound <= 0.2 && tail_bound <= 1e-14 * std::max(std::abs(acc), scale)) break;
  }
  return acc;
}

ModelEnd normalize_mass(const ModelEnd& model) {
  ModelEnd out = model;
  out.c0_ = -forcing_tail_integral(model, model.t0());
  out.normalized_ = true;
  return out;
}

RadialField laplacian_radial(const ModelEnd& model, const RadialField& psi) {
  if (!psi.grid || psi.grid->nodes.size() < 4) {
    throw std::invalid_argument("laplacian_radial: grid too short for second differences");
  }
  const RadialField d1 = psi.derivative();
  const RadialField d2 = psi.second_derivative();
  const int n = model.n();
  const double inv_n = 1.0 / n;
  std::vector<double> out(psi.values.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double t = psi.grid->nodes[i];
    out[i] = (n - 1) * d1.values[i] * std::pow(t, -inv_n) +
             n * d2.values[i] * std::pow(t, 1.0 - inv_n);
  }
  return RadialField(psi.grid, std::move(out));
}

GridPtr quasi_grid(const ModelEnd& model, double T, int M) {
  return make_grid(model, T, M, Grading::uniform_quasi);
}

GridPtr uniform_grid(const ModelEnd& model, double T, int M) {
  return make_grid(model, T, M, Grading::uniform_t);
}

GridPtr make_grid(const ModelEnd& model, double T, int M, Grading grading) {
  if (!(T > model.t0())) throw std::invalid_argument("make_grid: T must exceed t0");
  if (M < 16) throw std::invalid_argument("make_grid: need M >= 16");
  const double t0 = model.t0();
  std::vector<double> nodes(static_cast<std::size_t>(M) + 1);
  if (grading == Grading::uniform_t) {
    for (int i = 0; i <= M; ++i) nodes[i] = t0 + (T - t0) * i / M;
  } else {
    // uniform in the quasi-coordinate radius sigma = t^{(n+1)/(2n)}
    const double p = (model.n() + 1.0) / (2.0 * model.n());
    const double s0 = std::pow(t0, p);
    const double s1 = std::pow(T, p);
    for (int i = 0; i <= M; ++i) {
      const double s = s0 + (s1 - s0) * i / M;
      nodes[i] = std::pow(s, 1.0 / p);
    }
  }
  nodes.front() = t0;
  nodes.back() = T;
  return std::make_shared<const RadialGrid>(std::move(nodes), grading);
}

BoundedGeometryValue bounded_geometry_factor(double beta, double delta, int n, double C,
                                             std::complex<double> w) {
  if (!(beta > 0.0) || !(delta > 0.0) || n < 1 || !(C > 0.0)) {
    throw std::invalid_argument("bounded_geometry_factor: parameters must be positive");
  }
  const double q = 2.0 * n / (n + 1.0);
  const double tval = 2.0 * std::real(std::pow(w + C, q));
  BoundedGeometryValue out;
  if (!(tval > 0.0)) {
    out.value = std::numeric_limits<double>::quiet_NaN();
    out.within_bounds = false;
    return out;
  }
  out.value = 1.0 / (beta + std::pow(tval, -delta));
  const double lo = 0.5 / beta;
  const double hi = 1.5 / beta;
  out.within_bounds = out.value >= lo * (1.0 - 1e-12) && out.value <= hi * (1.0 + 1e-12);
  return out;
}

namespace {

// min over |w| = pi of Re((w + C)^q); harmonic, so the disc minimum sits on
// the boundary. Sampled circle plus local parabolic refinement.
double boundary_min_re(double C, double q) {
  const int samples = 256;
  double best = std::numeric_limits<double>::infinity();
  int best_i = 0;
  std::vector<double> vals(samples);
  for (int i = 0; i < samples; ++i) {
    const double th = 2.0 * std::numbers::pi * i / samples;
    const std::complex<double> w(std::numbers::pi * std::cos(th), std::numbers::pi * std::sin(th));
    vals[i] = std::real(std::pow(w + C, q));
    if (vals[i] < best) {
      best = vals[i];
      best_i = i;
    }
  }
  // parabolic refinement around the sampled minimum
  const double h = 2.0 * std::numbers::pi / samples;
  const double fm = vals[(best_i + samples - 1) % samples];
  const double f0 = vals[best_i];
  const double fp = vals[(best_i + 1) % samples];
  const double denom = fm - 2.0 * f0 + fp;
  if (denom > 0.0) {
    const double shift = 0.5 * (fm - fp) / denom;
    const double th = 2.0 * std::numbers::pi * best_i / samples + shift * h;
    const std::complex<double> w(std::numbers::pi * std::cos(th), std::numbers::pi * std::sin(th));
    best = std::min(best, std::real(std::pow(w + C, q)));
  }
  return best;
}

}  // namespace

double bounded_geometry_cmin(double beta, double delta, int n) {
  if (!(beta > 0.0) || !(delta > 0.0) || n < 1) {
    throw std::invalid_argument("bounded_geometry_cmin: parameters must be positive");
  }
  const double q = 2.0 * n / (n + 1.0);
  const double need = std::pow(beta, -1.0 / delta);  // require 2 min Re >= need
  // Re((w+C)^q) <= (C-pi)^q at w = -pi, so this seed is a lower bound for C_min
  // (and exact for n = 1).
  double lo = std::numbers::pi + std::pow(0.5 * need, 1.0 / q);
  auto ok = [&](double C) { return 2.0 * boundary_min_re(C, q) >= need; };
  if (ok(lo)) return lo * (1.0 + 1e-12);
  double hi = lo;
  for (int k = 0; k < 400 && !ok(hi); ++k) hi = hi * 1.5 + 1.0;
  for (int it = 0; it < 120; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (ok(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi * (1.0 + 1e-12);
}

}  // namespace mare
