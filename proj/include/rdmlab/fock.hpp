#pragma once

// N-fermion sectors of the occupation-number space over d orbitals.
//
// Sign convention: a_p |m> = (-1)^{#occupied orbitals below p} |m without p>.
// With this ordering the occupation state of the subset s_0 < ... < s_{N-1}
// equals a+_{s_0} ... a+_{s_{N-1}} |vac> = e_{s_0} ^ ... ^ e_{s_{N-1}}, so the
// occupation basis and the wedge basis coincide without extra signs.
// Sector bases are ordered colexicographically, which for bitmasks is plain
// numeric order.

#include "rdmlab/core.hpp"
#include "rdmlab/optim.hpp"

#include <bit>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace rdmlab {

inline constexpr int kMaxOrbitals = 14;

/// Dense conversion of a sector operator is refused above this many bytes.
inline constexpr std::size_t kDenseMemoryCap = std::size_t{1} << 30;

inline std::uint64_t binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t out = 1;
  for (int i = 1; i <= k; ++i) out = out * static_cast<std::uint64_t>(n - k + i) / i;
  return out;
}

struct SlaterIndex {
  std::vector<int> orbitals;
  std::uint64_t rank = 0;
};

inline void validate_orbitals(std::span<const int> orbitals, int d) {
  for (std::size_t i = 0; i < orbitals.size(); ++i) {
    if (orbitals[i] < 0 || orbitals[i] >= d) {
      throw Error(ErrorCode::OrbitalOutOfRange,
                  "orbital " + std::to_string(orbitals[i]) + " outside [0, " +
                      std::to_string(d) + ")");
    }
    if (i > 0 && orbitals[i] <= orbitals[i - 1]) {
      throw Error(ErrorCode::NonIncreasingOrbitals, "orbital list must be strictly increasing");
    }
  }
}

/// Colexicographic rank: sum_i C(s_i, i+1).
inline std::uint64_t rank_slater(std::span<const int> orbitals, int d) {
  validate_orbitals(orbitals, d);
  std::uint64_t r = 0;
  for (std::size_t i = 0; i < orbitals.size(); ++i) {
    r += binomial(orbitals[i], static_cast<int>(i) + 1);
  }
  return r;
}

inline SlaterIndex unrank_slater(std::uint64_t rank, int d, int n) {
  if (rank >= binomial(d, n)) {
    throw Error(ErrorCode::IndexOutOfRange, "rank " + std::to_string(rank) + " >= C(d,N)");
  }
  SlaterIndex out;
  out.rank = rank;
  out.orbitals.resize(n);
  int s = d - 1;
  for (int i = n - 1; i >= 0; --i) {
    while (binomial(s, i + 1) > rank) --s;
    out.orbitals[i] = s;
    rank -= binomial(s, i + 1);
    --s;
  }
  return out;
}

inline std::uint32_t orbitals_to_mask(std::span<const int> orbitals) {
  std::uint32_t m = 0;
  for (int p : orbitals) m |= 1u << p;
  return m;
}

inline std::vector<int> mask_to_orbitals(std::uint32_t mask) {
  std::vector<int> out;
  while (mask) {
    out.push_back(std::countr_zero(mask));
    mask &= mask - 1;
  }
  return out;
}

inline void require_orbital_count(int d) {
  if (d < 1 || d > kMaxOrbitals) {
    throw Error(ErrorCode::DimensionTooLarge,
                "orbital count " + std::to_string(d) + " outside [1, " +
                    std::to_string(kMaxOrbitals) + "]");
  }
}

/// Basis bookkeeping for the n-particle sector over d orbitals.
class FockSector {
 public:
  FockSector(int d, int n) : d_(d), n_(n) {
    require_orbital_count(d);
    if (n < 0 || n > d) {
      throw Error(ErrorCode::IndexOutOfRange, "particle number outside [0, d]");
    }
    index_.assign(std::size_t{1} << d, -1);
    for (std::uint32_t m = 0; m < (1u << d); ++m) {
      if (std::popcount(m) == n) {
        index_[m] = static_cast<std::int64_t>(masks_.size());
        masks_.push_back(m);
      }
    }
  }

  int orbitals() const { return d_; }
  int particles() const { return n_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(masks_.size()); }
  std::uint32_t mask(Eigen::Index rank) const { return masks_[rank]; }
  std::int64_t index(std::uint32_t mask) const { return index_[mask]; }

  /// Selection matrix from the full 2^d space onto this sector.
  SparseMatrix selector() const {
    SparseMatrix r(dim(), Eigen::Index{1} << d_);
    std::vector<Eigen::Triplet<cd>> t;
    t.reserve(masks_.size());
    for (std::size_t i = 0; i < masks_.size(); ++i) {
      t.emplace_back(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(masks_[i]), 1.0);
    }
    r.setFromTriplets(t.begin(), t.end());
    return r;
  }

 private:
  int d_;
  int n_;
  std::vector<std::uint32_t> masks_;
  std::vector<std::int64_t> index_;
};

inline double jordan_wigner_sign(std::uint32_t mask, int p) {
  return (std::popcount(mask & ((1u << p) - 1u)) % 2) ? -1.0 : 1.0;
}

/// a_p on the full 2^d occupation space.
inline SparseMatrix full_annihilator(int d, int p) {
  require_orbital_count(d);
  if (p < 0 || p >= d) throw Error(ErrorCode::IndexOutOfRange, "orbital index out of range");
  const Eigen::Index full = Eigen::Index{1} << d;
  std::vector<Eigen::Triplet<cd>> t;
  t.reserve(full / 2);
  for (std::uint32_t m = 0; m < static_cast<std::uint32_t>(full); ++m) {
    if (m & (1u << p)) t.emplace_back(m ^ (1u << p), m, jordan_wigner_sign(m, p));
  }
  SparseMatrix a(full, full);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

/// Annihilators restricted between sectors n -> n-1 and, when n >= 2,
/// n-1 -> n-2. Creators are their adjoints.
class SectorLadder {
 public:
  SectorLadder(int d, int n) : sector_(d, n) {
    if (n == 0) return;
    const FockSector lower(d, n - 1);
    const SparseMatrix r_n = sector_.selector();
    const SparseMatrix r_lower = lower.selector();
    std::optional<FockSector> lower2;
    SparseMatrix r_lower2;
    if (n >= 2) {
      lower2.emplace(d, n - 2);
      r_lower2 = lower2->selector();
    }
    for (int p = 0; p < d; ++p) {
      const SparseMatrix a = full_annihilator(d, p);
      down_.push_back(SparseMatrix(r_lower * a * SparseMatrix(r_n.adjoint())));
      if (n >= 2) down2_.push_back(SparseMatrix(r_lower2 * a * SparseMatrix(r_lower.adjoint())));
    }
  }

  const FockSector& sector() const { return sector_; }
  int orbitals() const { return sector_.orbitals(); }
  int particles() const { return sector_.particles(); }
  Eigen::Index dim() const { return sector_.dim(); }

  /// a_p : sector n -> n-1.
  const SparseMatrix& annihilator(int p) const { return down_.at(p); }
  /// a_p : sector n-1 -> n-2.
  const SparseMatrix& lower_annihilator(int p) const { return down2_.at(p); }

 private:
  FockSector sector_;
  std::vector<SparseMatrix> down_;
  std::vector<SparseMatrix> down2_;
};

struct LadderMatrices {
  std::vector<SparseMatrix> annihilators;  ///< a_p : n -> n-1
  std::vector<SparseMatrix> creators;      ///< a_p^+ : n-1 -> n
};

inline LadderMatrices ladder_matrices(int d, int n) {
  const SectorLadder ladder(d, n);
  LadderMatrices out;
  if (n == 0) return out;
  for (int p = 0; p < d; ++p) {
    out.annihilators.push_back(ladder.annihilator(p));
    out.creators.push_back(SparseMatrix(ladder.annihilator(p).adjoint()));
  }
  return out;
}

/// Hermitian operator on an N-particle sector, stored sparse.
struct ManyBodyOperator {
  int d = 0;
  int n = 0;
  SparseMatrix matrix;

  Eigen::Index dim() const { return matrix.rows(); }

  Matrix dense(std::size_t memory_cap = kDenseMemoryCap) const {
    const auto bytes = static_cast<std::size_t>(dim()) * static_cast<std::size_t>(dim()) *
                       sizeof(cd);
    if (bytes > memory_cap) {
      throw Error(ErrorCode::DenseLimitExceeded,
                  "dense sector operator would need " + std::to_string(bytes) + " bytes");
    }
    return Matrix(matrix);
  }
};

inline ManyBodyOperator second_quantize_one_body(const Matrix& a, const SectorLadder& ladder) {
  require_hermitian(a, "one-body operator");
  require_square(a, ladder.orbitals(), "one-body operator");
  const int d = ladder.orbitals();
  const int n = ladder.particles();
  ManyBodyOperator out{d, n, SparseMatrix(ladder.dim(), ladder.dim())};
  if (n == 0) return out;
  for (int p = 0; p < d; ++p) {
    SparseMatrix row(ladder.annihilator(0).rows(), ladder.dim());
    for (int q = 0; q < d; ++q) {
      if (a(p, q) != cd(0.0)) row += a(p, q) * ladder.annihilator(q);
    }
    out.matrix += SparseMatrix(ladder.annihilator(p).adjoint()) * row;
  }
  out.matrix.prune(cd(0.0));
  return out;
}

inline ManyBodyOperator second_quantize_one_body(const Matrix& a, int n) {
  return second_quantize_one_body(a, SectorLadder(static_cast<int>(a.rows()), n));
}

/// Sparse two-body coefficients w_pqrs of W = 1/2 sum w_pqrs a+_p a+_q a_s a_r.
struct TwoBodyTensor {
  struct Entry {
    int p, q, r, s;
    cd value;
  };
  int d = 0;
  std::vector<Entry> entries;
  bool interaction = false;  ///< the assembled operator must be PSD
};

inline ManyBodyOperator second_quantize_two_body(const TwoBodyTensor& w,
                                                 const SectorLadder& ladder) {
  const int d = ladder.orbitals();
  const int n = ladder.particles();
  if (w.d != d) throw Error(ErrorCode::ShapeMismatch, "two-body tensor dimension mismatch");
  for (const auto& e : w.entries) {
    for (int idx : {e.p, e.q, e.r, e.s}) {
      if (idx < 0 || idx >= d) {
        throw Error(ErrorCode::IndexOutOfRange,
                    "two-body index " + std::to_string(idx) + " outside [0, d)");
      }
    }
  }
  ManyBodyOperator out{d, n, SparseMatrix(ladder.dim(), ladder.dim())};
  if (n < 2) return out;
  auto pair = [&](int outer_orbital, int inner_orbital) {
    // a_outer a_inner : n -> n-2
    return SparseMatrix(ladder.lower_annihilator(outer_orbital) *
                        ladder.annihilator(inner_orbital));
  };
  for (const auto& e : w.entries) {
    if (e.value == cd(0.0)) continue;
    const SparseMatrix create = pair(e.q, e.p).adjoint();  // a+_p a+_q
    out.matrix += (0.5 * e.value) * SparseMatrix(create * pair(e.s, e.r));
  }
  out.matrix.prune(cd(0.0));
  const SparseMatrix diff = out.matrix - SparseMatrix(out.matrix.adjoint());
  double defect = 0.0;
  for (Eigen::Index k = 0; k < diff.outerSize(); ++k) {
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) {
      defect = std::max(defect, std::abs(it.value()));
    }
  }
  if (defect > kHermitianTol) {
    throw Error(ErrorCode::NonHermitianInput,
                "assembled two-body operator deviates from Hermitian by " + std::to_string(defect));
  }
  if (w.interaction) {
    const double low = lambda_min(out.dense());
    if (low < -kOrderTol) {
      throw Error(ErrorCode::NotPositive,
                  "interaction operator has eigenvalue " + std::to_string(low));
    }
  }
  return out;
}

inline ManyBodyOperator second_quantize_two_body(const TwoBodyTensor& w, int n) {
  return second_quantize_two_body(w, SectorLadder(w.d, n));
}

struct WaveFunction {
  int d = 0;
  int n = 0;
  Vector amplitudes;
  bool normalized = false;
};

/// Unnormalized wedge product of the columns of coeffs (d x n): the
/// amplitude at subset S is det(coeffs[S, :]).
inline Vector wedge_amplitudes(const Matrix& coeffs) {
  const int d = static_cast<int>(coeffs.rows());
  const int n = static_cast<int>(coeffs.cols());
  const FockSector sector(d, n);
  Vector out(sector.dim());
  Matrix block(n, n);
  for (Eigen::Index k = 0; k < sector.dim(); ++k) {
    const std::vector<int> rows = mask_to_orbitals(sector.mask(k));
    for (int i = 0; i < n; ++i) block.row(i) = coeffs.row(rows[i]);
    out(k) = n == 0 ? cd(1.0) : block.determinant();
  }
  return out;
}

inline WaveFunction build_slater_state(const Matrix& coeffs) {
  const double gram_det = (coeffs.adjoint() * coeffs).determinant().real();
  if (!(gram_det > 1e-12)) {
    throw Error(ErrorCode::LinearlyDependentOrbitals,
                "Gram determinant " + std::to_string(gram_det) + " <= 1e-12");
  }
  WaveFunction out{static_cast<int>(coeffs.rows()), static_cast<int>(coeffs.cols()),
                   wedge_amplitudes(coeffs) / std::sqrt(gram_det), true};
  return out;
}

inline WaveFunction build_slater_state(std::span<const Vector> orbitals, int d) {
  Matrix coeffs(d, static_cast<Eigen::Index>(orbitals.size()));
  for (std::size_t i = 0; i < orbitals.size(); ++i) {
    if (orbitals[i].size() != d) throw Error(ErrorCode::ShapeMismatch, "orbital length != d");
    coeffs.col(static_cast<Eigen::Index>(i)) = orbitals[i];
  }
  return build_slater_state(coeffs);
}

}  // namespace rdmlab
