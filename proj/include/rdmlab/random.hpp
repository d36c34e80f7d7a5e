#pragma once

// Seeded random instances: Hermitian and unitary matrices, representable
// density matrices and positive pair interactions.

#include "rdmlab/fock.hpp"
#include "rdmlab/optim.hpp"

#include <random>

namespace rdmlab {

class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(seed) {}

  double normal() { return normal_(engine_); }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }

  Vector complex_vector(Eigen::Index d) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = cd(normal(), normal());
    return v;
  }

  Vector unit_vector(Eigen::Index d) {
    Vector v = complex_vector(d);
    return v / v.norm();
  }

  Matrix hermitian(Eigen::Index d, double scale = 1.0) {
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cd(normal(), normal());
    }
    return scale * hermitian_part(m);
  }

  Matrix psd(Eigen::Index d, double scale = 1.0) {
    Matrix b = hermitian(d);
    return scale * (b * b.adjoint()) / static_cast<double>(d);
  }

  Matrix unitary(Eigen::Index d) {
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = cd(normal(), normal());
    }
    Eigen::HouseholderQR<Matrix> qr(m);
    return qr.householderQ() * Matrix::Identity(d, d);
  }

  /// Density matrix (PSD, unit trace) on a space of dimension dim.
  Matrix state(Eigen::Index dim, Eigen::Index rank = -1) {
    if (rank < 0) rank = dim;
    Matrix b(dim, rank);
    for (Eigen::Index i = 0; i < dim; ++i) {
      for (Eigen::Index j = 0; j < rank; ++j) b(i, j) = cd(normal(), normal());
    }
    Matrix s = b * b.adjoint();
    return s / s.trace().real();
  }

  /// Eigenvalues in [lo, hi] summing to n, by rescaling toward n/d.
  RealVector occupations(int d, int n, double lo = 0.0, double hi = 1.0) {
    const double mean = static_cast<double>(n) / d;
    RealVector x(d);
    for (int i = 0; i < d; ++i) x(i) = uniform(lo, hi);
    const RealVector dev = x.array() - x.mean();
    // shift to the right mean, then shrink deviations until inside [lo, hi]
    double shrink = 1.0;
    for (int i = 0; i < d; ++i) {
      if (dev(i) > 0) shrink = std::min(shrink, (hi - mean) / dev(i));
      if (dev(i) < 0) shrink = std::min(shrink, (lo - mean) / dev(i));
    }
    return (mean + shrink * dev.array()).matrix();
  }

  /// gamma = U diag(occupations) U^+ with occupations in [lo, hi].
  Matrix representable_rdm(int d, int n, double lo = 0.0, double hi = 1.0) {
    const Matrix u = unitary(d);
    return hermitian_part(u * occupations(d, n, lo, hi).cast<cd>().asDiagonal() * u.adjoint());
  }

  /// Rank-n orthogonal projection.
  Matrix projection(int d, int n) {
    const Matrix u = unitary(d);
    return hermitian_part(u.leftCols(n) * u.leftCols(n).adjoint());
  }

  /// W = sum_{p<q} U_pq n_p n_q with U_pq in [0, max_u]: diagonal in the
  /// occupation basis and nonnegative.
  TwoBodyTensor pair_interaction(int d, double max_u) {
    TwoBodyTensor w;
    w.d = d;
    w.interaction = true;
    for (int p = 0; p < d; ++p) {
      for (int q = p + 1; q < d; ++q) {
        const double u = uniform(0.0, max_u);
        // n_p n_q = a+_p a+_q a_q a_p, split over (p,q) and (q,p)
        w.entries.push_back({p, q, p, q, cd(u)});
        w.entries.push_back({q, p, q, p, cd(u)});
      }
    }
    return w;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

}  // namespace rdmlab
