#pragma once

#include <functional>

#include "mpoforge/types.hpp"

namespace mpoforge::linalg {

/// m = U * S.asDiagonal() * V.adjoint(); singular values descending >= 0.
template <class M>
struct SvdResult {
  M U;
  Vec S;
  M V;
};

SvdResult<Mat> svd(const Mat& m);
SvdResult<CMat> svd(const CMat& m);

/// Right eigenpairs of a general square matrix, sorted by descending |value|.
/// vector_condition estimates cond_2 of the eigenvector matrix (large values
/// flag near-defective input).
struct EigResult {
  CVec values;
  CMat vectors;
  double vector_condition = 0;
};

EigResult eig_general(const Mat& m);
EigResult eig_general(const CMat& m);

/// Thin QR, rows >= cols required: m = Q * R, Q with orthonormal columns,
/// R upper triangular cols x cols.
template <class M>
struct QrResult {
  M Q;
  M R;
};

QrResult<Mat> qr_economical(const Mat& m);
QrResult<CMat> qr_economical(const CMat& m);

/// Minimum-norm least squares via SVD with singular values below
/// max(rows,cols)*eps*sigma_max treated as zero.
Vec solve_least_squares(const Mat& a, const Vec& b);
CVec solve_least_squares(const CMat& a, const CVec& b);
Mat solve_least_squares(const Mat& a, const Mat& b);
CMat solve_least_squares(const CMat& a, const CMat& b);

/// Dominant-magnitude eigenpair of a linear map given as a matrix or as a
/// matvec callback. Deterministic: the start vector is all-ones, normalized,
/// unless an explicit start is supplied.
struct EigenPairOptions {
  bool symmetric = false;     ///< real symmetric map: Lanczos path
  int max_space = 120;        ///< Krylov vectors per restart cycle
  int max_restarts = 20;
  double tol = 1e-12;         ///< residual target, relative to |value|
  const Vec* start = nullptr; ///< optional deterministic warm start
};

struct RealEigenPair {
  double value = 0;
  Vec vector;
  int iterations = 0;   ///< total matvecs
  double residual = 0;  ///< ||A v - value v|| at exit
};

struct ComplexEigenPair {
  cplx value;
  CVec vector;
  int iterations = 0;
  double residual = 0;
};

using RealApply = std::function<Vec(const Vec&)>;
using ComplexApply = std::function<CVec(const CVec&)>;

/// The complex callback variant carries a distinct name: lambdas convert to
/// both std::function aliases (Eigen's unconstrained converting constructors
/// defeat overload resolution), so a shared name would be ambiguous.
RealEigenPair leading_eigenpair(std::size_t dim, const RealApply& apply,
                                const EigenPairOptions& opts = {});
RealEigenPair leading_eigenpair(const Mat& m, const EigenPairOptions& opts = {});
ComplexEigenPair leading_eigenpair_complex(std::size_t dim, const ComplexApply& apply,
                                           const EigenPairOptions& opts = {});
ComplexEigenPair leading_eigenpair(const CMat& m,
                                   const EigenPairOptions& opts = {});

/// exp(m) for 2x2 via the closed cosh/sinh form of the traceless part.
Mat expm_2x2(const Mat& m);

}  // namespace mpoforge::linalg
