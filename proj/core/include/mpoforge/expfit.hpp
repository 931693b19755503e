#pragma once

#include <string>

#include "mpoforge/types.hpp"

namespace mpoforge::expfit {

enum class PencilMethod { Direct, Qr };

/// Fit of f(r) ~ sum_c x_c lambda_c^r for r = 1..N, f given as f[r-1].
struct ExpSumFit {
  CVec exponents;  ///< lambda_c
  CVec weights;    ///< x_c
  double l1_cost = 0;      ///< sum_r |f(r) - fit(r)| over the data window
  double max_abs_dev = 0;  ///< max_r |f(r) - fit(r)|
  int requested_terms = 0;
  bool rank_deficient = false;
  std::string diagnostic;
};

/// Hankel matrix F(i,j) = f[i+j], shape (N-n+1) x n; requires N >= 2n.
Mat build_hankel(const Vec& f, int n);

/// Matrix-pencil exponents: eigenvalues of pinv(F1) F2 where F1/F2 drop the
/// last/first Hankel row. Qr runs the pencil on the thin Q factor instead,
/// which keeps the eigenproblem well-scaled, and collapses the pencil to the
/// numerical rank of F when the data supports fewer than n exponents.
CVec fit_exponents(const Vec& f, int n, PencilMethod method, bool* rank_deficient = nullptr,
                   std::string* diagnostic = nullptr);

/// Least-squares weights for fixed exponents; exponents closer than 1e-10
/// (relative) are merged before solving so the Vandermonde stays full rank.
ExpSumFit fit_weights(const Vec& f, const CVec& exponents);

/// Convenience: fit_exponents then fit_weights, carrying the diagnostics.
ExpSumFit fit_exp_sum(const Vec& f, int n, PencilMethod method = PencilMethod::Qr);

/// sum_c x_c lambda_c^r (real part; conjugate pairs cancel), r >= 1.
double evaluate(const ExpSumFit& fit, int r);

}  // namespace mpoforge::expfit
