#pragma once

// Reference computations for the tests. Everything here works in first
// quantization on the full tensor power (C^d)^N or through generalized
// eigenproblems, so it shares no code path with the sector machinery.

#include "rdmlab/rdmlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

using rdmlab::cd;
using rdmlab::Matrix;
using rdmlab::RealVector;
using rdmlab::Vector;

inline long ipow(int base, int exp) {
  long out = 1;
  for (int i = 0; i < exp; ++i) out *= base;
  return out;
}

inline std::vector<int> digits(long index, int d, int n) {
  std::vector<int> out(n);
  for (int k = n - 1; k >= 0; --k) {
    out[k] = static_cast<int>(index % d);
    index /= d;
  }
  return out;
}

inline long flatten(const std::vector<int>& idx, int d) {
  long out = 0;
  for (int i : idx) out = out * d + i;
  return out;
}

inline int permutation_sign(const std::vector<int>& perm) {
  int inversions = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    for (std::size_t j = i + 1; j < perm.size(); ++j) inversions += perm[i] > perm[j];
  }
  return inversions % 2 ? -1 : 1;
}

/// Columns are the normalized antisymmetrized tensors e_{o1} ^ ... ^ e_{oN}
/// for the occupied orbitals o1 < ... < oN of each sector basis state, in
/// the library's sector order (ascending creation order, no extra signs).
inline Matrix antisymmetric_embedding(int d, int n) {
  const rdmlab::FockSector sector(d, n);
  const long full = ipow(d, n);
  Matrix e = Matrix::Zero(full, sector.dim());
  double norm = 1.0;
  for (int k = 2; k <= n; ++k) norm *= k;
  norm = 1.0 / std::sqrt(norm);
  for (Eigen::Index col = 0; col < sector.dim(); ++col) {
    const std::vector<int> occ = rdmlab::mask_to_orbitals(sector.mask(col));
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<int> idx(n);
      for (int k = 0; k < n; ++k) idx[k] = occ[perm[k]];
      e(flatten(idx, d), col) = permutation_sign(perm) * norm;
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return e;
}

/// gamma_pq = N sum_rest Psi(p, rest) conj Psi(q, rest), for a mixed sector
/// state lifted to the tensor power.
inline Matrix tensor_partial_trace(const Matrix& state, int d, int n) {
  const Matrix e = antisymmetric_embedding(d, n);
  const Matrix big = e * state * e.adjoint();
  const long rest = ipow(d, n - 1);
  Matrix out = Matrix::Zero(d, d);
  for (int p = 0; p < d; ++p) {
    for (int q = 0; q < d; ++q) {
      cd acc = 0.0;
      for (long r = 0; r < rest; ++r) acc += big(p * rest + r, q * rest + r);
      out(p, q) = static_cast<double>(n) * acc;
    }
  }
  return out;
}

/// sum_k A acting on tensor slot k, compressed to the sector.
inline Matrix first_quantized_one_body(const Matrix& a, int n) {
  const int d = static_cast<int>(a.rows());
  const Matrix e = antisymmetric_embedding(d, n);
  const long full = ipow(d, n);
  Matrix big = Matrix::Zero(full, full);
  for (long col = 0; col < full; ++col) {
    const std::vector<int> idx = digits(col, d, n);
    for (int k = 0; k < n; ++k) {
      std::vector<int> out = idx;
      for (int p = 0; p < d; ++p) {
        out[k] = p;
        big(flatten(out, d), col) += a(p, idx[k]);
      }
    }
  }
  return e.adjoint() * big * e;
}

/// Dense w[p][q][r][s] with <pq|w|rs> = w_pqrs.
inline std::vector<cd> dense_tensor(const rdmlab::TwoBodyTensor& w) {
  const int d = w.d;
  std::vector<cd> out(static_cast<std::size_t>(d) * d * d * d, 0.0);
  for (const auto& e : w.entries) out[((e.p * d + e.q) * d + e.r) * d + e.s] += e.value;
  return out;
}

/// 1/2 sum over ordered slot pairs k != l of w acting on (k, l).
inline Matrix first_quantized_two_body(const rdmlab::TwoBodyTensor& w, int n) {
  const int d = w.d;
  const std::vector<cd> dense = dense_tensor(w);
  const Matrix e = antisymmetric_embedding(d, n);
  const long full = ipow(d, n);
  Matrix big = Matrix::Zero(full, full);
  for (long col = 0; col < full; ++col) {
    const std::vector<int> idx = digits(col, d, n);
    for (int k = 0; k < n; ++k) {
      for (int l = 0; l < n; ++l) {
        if (k == l) continue;
        std::vector<int> out = idx;
        const int r = idx[k], s = idx[l];
        for (int p = 0; p < d; ++p) {
          for (int q = 0; q < d; ++q) {
            const cd value = dense[((p * d + q) * d + r) * d + s];
            if (value == cd(0.0)) continue;
            out[k] = p;
            out[l] = q;
            big(flatten(out, d), col) += 0.5 * value;
          }
        }
      }
    }
  }
  return e.adjoint() * big * e;
}

/// Random two-body tensor with w_pqrs = w_qpsr and w_pqrs = conj(w_rspq).
inline rdmlab::TwoBodyTensor random_two_body(rdmlab::RandomSource& rng, int d) {
  std::vector<cd> dense(static_cast<std::size_t>(d) * d * d * d, 0.0);
  auto at = [&](int p, int q, int r, int s) -> cd& { return dense[((p * d + q) * d + r) * d + s]; };
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s) {
          const cd z(rng.normal(), rng.normal());
          at(p, q, r, s) += z;
          at(q, p, s, r) += z;
          at(r, s, p, q) += std::conj(z);
          at(s, r, q, p) += std::conj(z);
        }
  rdmlab::TwoBodyTensor w;
  w.d = d;
  for (int p = 0; p < d; ++p)
    for (int q = 0; q < d; ++q)
      for (int r = 0; r < d; ++r)
        for (int s = 0; s < d; ++s) w.entries.push_back({p, q, r, s, 0.25 * at(p, q, r, s)});
  return w;
}

/// max |lambda| of the pencil V x = lambda (I + T) x.
inline double pencil_dual_norm(const Matrix& v, const Matrix& t) {
  const Matrix a = Matrix::Identity(t.rows(), t.cols()) + t;
  Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> pencil(v, a, Eigen::EigenvaluesOnly);
  return pencil.eigenvalues().cwiseAbs().maxCoeff();
}

/// Minimal a >= 0 with a T + b I +- V >= 0 for positive definite T, as the
/// top eigenvalue of the pencils (+-V - b I) x = a T x.
inline double pencil_T_bound(const Matrix& v, const Matrix& t, double b) {
  const Matrix id = Matrix::Identity(v.rows(), v.cols());
  double a = 0.0;
  for (double sign : {1.0, -1.0}) {
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> pencil(sign * v - b * id, t,
                                                            Eigen::EigenvaluesOnly);
    a = std::max(a, pencil.eigenvalues().maxCoeff());
  }
  return a;
}

/// Energy of the Slater determinant spanned by the orthonormal columns of c.
inline double slater_energy(const Matrix& h_sector, const Matrix& c) {
  const Vector psi = rdmlab::build_slater_state(c).amplitudes;
  return (psi.adjoint() * h_sector * psi)(0, 0).real();
}

inline double max_abs(const Matrix& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace oracle
