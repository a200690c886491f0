#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "opext/types.hpp"

namespace opext {

// ---------------------------------------------------------------------------
// Dense complex kernels shared by every module. Conventions fixed here once:
//   * vec is column-stacking, so vec(A X B) = (B^T (x) A) vec(X);
//   * orthonormal bases are stored as matrix columns.
// ---------------------------------------------------------------------------

/// Orthonormal family of vectors in C^ambient, stored as columns.
struct SubspaceBasis {
  Index ambient_dim = 0;
  CMatrix vectors;  // ambient_dim x dim, unitary columns

  Index dim() const { return vectors.cols(); }

  double gram_residual() const {
    if (dim() == 0) return 0.0;
    return (vectors.adjoint() * vectors - CMatrix::Identity(dim(), dim()))
        .cwiseAbs()
        .maxCoeff();
  }
};

inline CMatrix adjoint(const CMatrix& a) { return a.adjoint(); }

inline CMatrix hermitize(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

/// Largest singular value, via the top eigenvalue of the Gram matrix of the
/// shorter side (much cheaper than an SVD at the sizes the vectorized maps
/// reach).
inline double op_norm(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  const CMatrix gram = (a.rows() <= a.cols()) ? CMatrix(a * a.adjoint())
                                              : CMatrix(a.adjoint() * a);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(gram),
                                            Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

inline double spectral_radius(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::ComplexEigenSolver<CMatrix> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

/// Column-stacking vectorization: vec([[1,2],[3,4]]) = (1,3,2,4).
inline CVector vec(const CMatrix& a) {
  return Eigen::Map<const CVector>(a.data(), a.size());
}

inline CMatrix unvec(const CVector& v, Index rows, Index cols) {
  if (v.size() != rows * cols)
    throw validation_error("unvec: vector length does not match rows*cols");
  return Eigen::Map<const CMatrix>(v.data(), rows, cols);
}

/// Kronecker product, consistent with the column-stacking vec above.
inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Hermitian PSD square root. Rejects inputs that are non-Hermitian or
/// indefinite beyond tol; eigenvalues in [-tol, 0) are clipped to zero since
/// they arise as noise on limits of PSD sequences.
inline CMatrix psd_sqrt(const CMatrix& q, double tol = 1e-10) {
  if (q.rows() != q.cols()) throw validation_error("psd_sqrt: matrix not square");
  if (q.size() == 0) return q;
  double herm = (q - q.adjoint()).cwiseAbs().maxCoeff();
  if (herm > tol)
    throw validation_error("psd_sqrt: input not Hermitian (defect " +
                           std::to_string(herm) + ")");
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(q));
  RVector lam = es.eigenvalues();
  if (lam.minCoeff() < -tol)
    throw validation_error("psd_sqrt: input indefinite (min eigenvalue " +
                           std::to_string(lam.minCoeff()) + ")");
  RVector s = lam.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * s.asDiagonal() * es.eigenvectors().adjoint();
}

// Dense SVDs use two paths: exact JacobiSVD at small sizes, and a Gram
// eigendecomposition at the sizes the vectorized maps reach. Gram
// eigenvalues only resolve singular values down to sqrt(eps)*sigma_max, so
// any direction in the boundary band is re-measured directly (||A v|| is
// accurate at every magnitude); the band is far above every rank threshold
// in use and far below the smallest nonzero singular values that occur.
inline constexpr Index kJacobiSizeLimit = 64;

/// Orthonormal basis of the range: left singular vectors with
/// sigma > rank_tol * sigma_max. Rank zero yields an empty basis.
inline SubspaceBasis range_basis(const CMatrix& a, double rank_tol = 1e-9) {
  SubspaceBasis out;
  out.ambient_dim = a.rows();
  if (a.size() == 0) {
    out.vectors = CMatrix(a.rows(), 0);
    return out;
  }
  if (std::max(a.rows(), a.cols()) <= kJacobiSizeLimit) {
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU);
    const RVector sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    Index r = 0;
    while (r < sv.size() && sv(r) > rank_tol * smax && smax > 0.0) ++r;
    out.vectors = svd.matrixU().leftCols(r);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a * a.adjoint()));
  const RVector lam = es.eigenvalues();  // ascending
  const double smax = std::sqrt(std::max(0.0, lam.maxCoeff()));
  if (smax == 0.0) {
    out.vectors = CMatrix(a.rows(), 0);
    return out;
  }
  const double boundary = 1e-6 * smax;
  std::vector<Index> kept;
  for (Index i = lam.size() - 1; i >= 0; --i) {
    double sigma = std::sqrt(std::max(0.0, lam(i)));
    if (sigma < boundary) sigma = (a.adjoint() * es.eigenvectors().col(i)).norm();
    if (sigma > rank_tol * smax) kept.push_back(i);
  }
  out.vectors = CMatrix(a.rows(), static_cast<Index>(kept.size()));
  for (Index i = 0; i < out.vectors.cols(); ++i)
    out.vectors.col(i) = es.eigenvectors().col(kept[i]);
  return out;
}

/// Orthonormal basis of the null space: right singular vectors with
/// sigma <= tol * max(1, sigma_max).
inline SubspaceBasis null_space(const CMatrix& a, double tol = 1e-9) {
  SubspaceBasis out;
  out.ambient_dim = a.cols();
  if (a.size() == 0 || a.rows() == 0) {
    out.vectors = CMatrix::Identity(a.cols(), a.cols());
    return out;
  }
  if (std::max(a.rows(), a.cols()) <= kJacobiSizeLimit) {
    Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullV);
    const RVector sv = svd.singularValues();
    const double cut = tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > cut) ++rank;
    out.vectors = svd.matrixV().rightCols(a.cols() - rank);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a.adjoint() * a));
  const RVector lam = es.eigenvalues();  // ascending
  const double smax = std::sqrt(std::max(0.0, lam.maxCoeff()));
  const double cut = tol * std::max(1.0, smax);
  const double boundary = std::max(1e-6 * std::max(1.0, smax), 10.0 * cut);
  std::vector<Index> kept;
  for (Index i = 0; i < lam.size(); ++i) {
    double sigma = std::sqrt(std::max(0.0, lam(i)));
    if (sigma >= boundary) break;  // ascending order: the rest is nonzero
    if (sigma > cut) sigma = (a * es.eigenvectors().col(i)).norm();
    if (sigma <= cut) kept.push_back(i);
  }
  out.vectors = CMatrix(a.cols(), static_cast<Index>(kept.size()));
  for (Index i = 0; i < out.vectors.cols(); ++i)
    out.vectors.col(i) = es.eigenvectors().col(kept[i]);
  return out;
}

inline Index numerical_rank(const CMatrix& a, double rank_tol = 1e-9) {
  return range_basis(a, rank_tol).dim();
}

/// Unitary polar factor: the closest unitary in Frobenius distance.
/// Requires full rank.
inline CMatrix nearest_unitary(const CMatrix& a) {
  if (a.rows() != a.cols())
    throw validation_error("nearest_unitary: matrix not square");
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const RVector sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= 1e-12 * std::max(1.0, sv(0)))
    throw validation_error("nearest_unitary: input is rank deficient");
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
inline CMatrix pinv(const CMatrix& a, double rank_tol = 1e-12) {
  if (a.size() == 0) return CMatrix(a.cols(), a.rows());
  Eigen::JacobiSVD<CMatrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector sv = svd.singularValues();
  const double cut = rank_tol * std::max(1.0, sv.size() ? sv(0) : 0.0);
  RVector inv = RVector::Zero(sv.size());
  for (Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cut) inv(i) = 1.0 / sv(i);
  return svd.matrixV() * inv.asDiagonal() *
         svd.matrixU().adjoint();
}

inline double min_hermitian_eigenvalue(const CMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitize(a),
                                            Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

/// Residual of membership of v in the span of an orthonormal basis.
inline double span_membership_residual(const SubspaceBasis& basis, const CVector& v) {
  if (basis.dim() == 0) return v.norm();
  return (v - basis.vectors * (basis.vectors.adjoint() * v)).norm();
}

/// Coordinates of v in an orthonormal basis; the second member is the
/// out-of-span residual.
inline std::pair<CVector, double> span_coordinates(const SubspaceBasis& basis,
                                                   const CVector& v) {
  CVector c = basis.vectors.adjoint() * v;
  double res = (v - basis.vectors * c).norm();
  return {std::move(c), res};
}

/// Principal angles (radians, ascending) between two orthonormal bases.
inline RVector principal_angles(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.dim() != b.dim())
    throw validation_error("principal_angles: dimensions differ");
  if (a.dim() == 0) return RVector(0);
  Eigen::JacobiSVD<CMatrix> svd(a.vectors.adjoint() * b.vectors);
  RVector cosines = svd.singularValues().cwiseMin(1.0);
  RVector angles(cosines.size());
  for (Index i = 0; i < cosines.size(); ++i)
    angles(i) = std::acos(cosines(cosines.size() - 1 - i));
  return angles;
}

/// Max principal angle, with dimension mismatch reported as pi/2.
inline double subspace_distance(const SubspaceBasis& a, const SubspaceBasis& b) {
  if (a.dim() != b.dim()) return std::acos(0.0);
  if (a.dim() == 0) return 0.0;
  RVector ang = principal_angles(a, b);
  return ang(ang.size() - 1);
}

}  // namespace opext
