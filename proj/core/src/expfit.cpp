#include "mpoforge/expfit.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "mpoforge/linalg.hpp"

namespace mpoforge::expfit {

Mat build_hankel(const Vec& f, int n) {
  const long N = f.size();
  if (n < 1) throw Error("expfit: need n >= 1");
  if (N < 2 * n) throw Error("expfit: need N >= 2n data points");
  Mat h(N - n + 1, n);
  for (long i = 0; i <= N - n; ++i)
    for (long j = 0; j < n; ++j) h(i, j) = f(i + j);
  return h;
}

namespace {

CVec pencil_eigenvalues(const Mat& q) {
  const Mat q1 = q.topRows(q.rows() - 1);
  const Mat q2 = q.bottomRows(q.rows() - 1);
  const Mat m = linalg::solve_least_squares(q1, q2);
  return linalg::eig_general(m).values;
}

}  // namespace

CVec fit_exponents(const Vec& f, int n, PencilMethod method, bool* rank_deficient,
                   std::string* diagnostic) {
  const Mat h = build_hankel(f, n);
  if (rank_deficient) *rank_deficient = false;
  if (method == PencilMethod::Direct) return pencil_eigenvalues(h);

  Eigen::ColPivHouseholderQR<Mat> qr(h);
  qr.setThreshold(1e-13);
  const int rank = static_cast<int>(qr.rank());
  const Mat qthin = qr.householderQ() * Mat::Identity(h.rows(), n);
  if (rank >= n) return pencil_eigenvalues(qthin);

  // Data only supports `rank` exponents; the trailing Q columns are noise.
  // Collapse the pencil to the leading block instead of fitting ghosts.
  if (rank_deficient) *rank_deficient = true;
  if (diagnostic) {
    std::ostringstream os;
    os << "hankel rank " << rank << " < requested " << n << "; collapsed";
    *diagnostic = os.str();
  }
  if (rank == 0) return CVec();
  return pencil_eigenvalues(qthin.leftCols(rank));
}

ExpSumFit fit_weights(const Vec& f, const CVec& exponents) {
  const long N = f.size();
  std::vector<cplx> kept;
  for (long c = 0; c < exponents.size(); ++c) {
    bool dup = false;
    for (const cplx& k : kept)
      if (std::abs(exponents(c) - k) <= 1e-10 * (1.0 + std::abs(k))) dup = true;
    if (!dup) kept.push_back(exponents(c));
  }
  ExpSumFit fit;
  fit.exponents = CVec::Map(kept.data(), static_cast<long>(kept.size()));
  if (kept.empty()) {
    fit.l1_cost = f.cwiseAbs().sum();
    fit.max_abs_dev = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
    return fit;
  }
  CMat vand(N, fit.exponents.size());
  for (long c = 0; c < fit.exponents.size(); ++c) {
    cplx p = fit.exponents(c);
    for (long r = 0; r < N; ++r) {
      vand(r, c) = p;
      p *= fit.exponents(c);
    }
  }
  fit.weights = linalg::solve_least_squares(vand, f.cast<cplx>().eval());
  const CVec resid = vand * fit.weights - f.cast<cplx>();
  fit.l1_cost = resid.cwiseAbs().sum();
  fit.max_abs_dev = resid.cwiseAbs().maxCoeff();
  return fit;
}

ExpSumFit fit_exp_sum(const Vec& f, int n, PencilMethod method) {
  bool deficient = false;
  std::string diag;
  const CVec lambda = fit_exponents(f, n, method, &deficient, &diag);
  ExpSumFit fit = fit_weights(f, lambda);
  fit.requested_terms = n;
  fit.rank_deficient = deficient || fit.exponents.size() < lambda.size();
  if (fit.exponents.size() < lambda.size())
    diag += (diag.empty() ? "" : "; ") + std::string("duplicate exponents merged");
  fit.diagnostic = diag;
  return fit;
}

double evaluate(const ExpSumFit& fit, int r) {
  if (r < 1) throw Error("expfit: evaluate needs r >= 1");
  cplx acc = 0;
  for (long c = 0; c < fit.exponents.size(); ++c)
    acc += fit.weights(c) * std::pow(fit.exponents(c), r);
  return acc.real();
}

}  // namespace mpoforge::expfit
