#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace mare {

class SingularBandError : public std::runtime_error {
 public:
  explicit SingularBandError(int pivot)
      : std::runtime_error("banded LU: zero pivot at column " + std::to_string(pivot)),
        pivot_index(pivot) {}
  int pivot_index;
};

/// Band matrix with kl sub- and ku super-diagonals, LAPACK-style storage with
/// kl fill rows for partial pivoting. LU in place, then repeated solves.
class BandedMatrix {
 public:
  BandedMatrix(int n, int kl, int ku);

  int size() const { return n_; }
  int lower_bandwidth() const { return kl_; }
  int upper_bandwidth() const { return ku_; }

  /// Writable entry; (i, j) must lie in the envelope kl below / ku+kl above.
  double& at(int i, int j);
  /// Entry value, zero outside the band.
  double get(int i, int j) const;

  void factor();  // throws SingularBandError on a zero pivot
  void solve(std::vector<double>& rhs) const;
  bool factored() const { return factored_; }

 private:
  int n_, kl_, ku_, ld_;
  std::vector<double> a_;
  std::vector<int> piv_;
  bool factored_ = false;

  double& ref(int i, int j) { return a_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)]; }
  double cref(int i, int j) const {
    return a_[static_cast<std::size_t>(j) * ld_ + (kl_ + ku_ + i - j)];
  }
};

}  // namespace mare
