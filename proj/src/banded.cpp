#include "mare/banded.hpp"

#include <algorithm>
#include <cmath>

namespace mare {

BandedMatrix::BandedMatrix(int n, int kl, int ku) : n_(n), kl_(kl), ku_(ku) {
  if (n < 1 || kl < 0 || ku < 0) throw std::invalid_argument("BandedMatrix: bad shape");
  ld_ = 2 * kl_ + ku_ + 1;
  a_.assign(static_cast<std::size_t>(ld_) * n_, 0.0);
  piv_.assign(n_, 0);
}

double& BandedMatrix::at(int i, int j) {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_ + kl_) {
    throw std::out_of_range("BandedMatrix::at outside band envelope");
  }
  return ref(i, j);
}

double BandedMatrix::get(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i - j > kl_ || j - i > ku_ + kl_) return 0.0;
  return cref(i, j);
}

void BandedMatrix::factor() {
  for (int j = 0; j < n_; ++j) {
    const int ilast = std::min(n_ - 1, j + kl_);
    int imax = j;
    double amax = std::abs(cref(j, j));
    for (int i = j + 1; i <= ilast; ++i) {
      const double v = std::abs(cref(i, j));
      if (v > amax) {
        amax = v;
        imax = i;
      }
    }
    if (amax == 0.0) throw SingularBandError(j);
    piv_[j] = imax;
    const int kend = std::min(n_ - 1, j + ku_ + kl_);
    if (imax != j) {
      for (int k = j; k <= kend; ++k) std::swap(ref(j, k), ref(imax, k));
    }
    const double d = cref(j, j);
    for (int i = j + 1; i <= ilast; ++i) {
      const double m = cref(i, j) / d;
      ref(i, j) = m;
      if (m != 0.0) {
        for (int k = j + 1; k <= kend; ++k) ref(i, k) -= m * cref(j, k);
      }
    }
  }
  factored_ = true;
}

void BandedMatrix::solve(std::vector<double>& rhs) const {
  if (!factored_) throw std::logic_error("BandedMatrix::solve before factor");
  if (static_cast<int>(rhs.size()) != n_) throw std::invalid_argument("BandedMatrix::solve size");
  for (int j = 0; j < n_; ++j) {
    if (piv_[j] != j) std::swap(rhs[j], rhs[piv_[j]]);
    const int ilast = std::min(n_ - 1, j + kl_);
    for (int i = j + 1; i <= ilast; ++i) rhs[i] -= cref(i, j) * rhs[j];
  }
  for (int j = n_ - 1; j >= 0; --j) {
    rhs[j] /= cref(j, j);
    const int ifirst = std::max(0, j - ku_ - kl_);
    for (int i = ifirst; i < j; ++i) rhs[i] -= cref(i, j) * rhs[j];
  }
}

}  // namespace mare
