#include "mpoforge/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace mpoforge::linalg {

namespace {

template <class M>
SvdResult<M> svd_impl(const M& m) {
  Eigen::JacobiSVD<M> dec(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success)
    throw Error("svd: factorization did not converge for " +
                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

template <class M>
QrResult<M> qr_impl(const M& m) {
  if (m.rows() < m.cols())
    throw Error("qr_economical: need rows >= cols, got " +
                std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  Eigen::HouseholderQR<M> dec(m);
  M q = dec.householderQ() * M::Identity(m.rows(), m.cols());
  M r = dec.matrixQR()
            .topRows(m.cols())
            .template triangularView<Eigen::Upper>();
  return {std::move(q), std::move(r)};
}

template <class M, class V>
V lstsq_impl(const M& a, const V& b) {
  auto dec = svd_impl(a);
  const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) *
                        std::numeric_limits<double>::epsilon() *
                        (dec.S.size() > 0 ? dec.S(0) : 0.0);
  V y = dec.U.adjoint() * b;
  for (Eigen::Index i = 0; i < dec.S.size(); ++i)
    y.row(i) *= (dec.S(i) > cutoff) ? 1.0 / dec.S(i) : 0.0;
  return dec.V * y;
}

double vector_condition_of(const CMat& vectors) {
  Eigen::JacobiSVD<CMat> dec(vectors);
  const auto& s = dec.singularValues();
  if (s.size() == 0 || s(s.size() - 1) <= 0) return 0;
  return s(0) / s(s.size() - 1);
}

EigResult sort_eig(CVec values, CMat vectors) {
  std::vector<Eigen::Index> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) {
    return std::abs(values(i)) > std::abs(values(j));
  });
  CVec sv(values.size());
  CMat sm(vectors.rows(), vectors.cols());
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    sv(k) = values(order[k]);
    sm.col(k) = vectors.col(order[k]);
  }
  const double cond = vector_condition_of(sm);
  return {std::move(sv), std::move(sm), cond};
}

}  // namespace

SvdResult<Mat> svd(const Mat& m) { return svd_impl(m); }
SvdResult<CMat> svd(const CMat& m) { return svd_impl(m); }

EigResult eig_general(const Mat& m) {
  if (m.rows() != m.cols()) throw Error("eig_general: matrix must be square");
  Eigen::EigenSolver<Mat> dec(m);
  if (dec.info() != Eigen::Success)
    throw Error("eig_general: iteration did not converge");
  return sort_eig(dec.eigenvalues(), dec.eigenvectors());
}

EigResult eig_general(const CMat& m) {
  if (m.rows() != m.cols()) throw Error("eig_general: matrix must be square");
  Eigen::ComplexEigenSolver<CMat> dec(m);
  if (dec.info() != Eigen::Success)
    throw Error("eig_general: iteration did not converge");
  return sort_eig(dec.eigenvalues(), dec.eigenvectors());
}

QrResult<Mat> qr_economical(const Mat& m) { return qr_impl(m); }
QrResult<CMat> qr_economical(const CMat& m) { return qr_impl(m); }

Vec solve_least_squares(const Mat& a, const Vec& b) { return lstsq_impl(a, b); }
CVec solve_least_squares(const CMat& a, const CVec& b) {
  return lstsq_impl(a, b);
}
Mat solve_least_squares(const Mat& a, const Mat& b) { return lstsq_impl(a, b); }
CMat solve_least_squares(const CMat& a, const CMat& b) {
  return lstsq_impl(a, b);
}

namespace {

void check_unambiguous(double dom, double second) {
  // |second| within 1e-12 of |dom| means the dominant-magnitude eigenpair is
  // not unique (e.g. a +/- pair); report rather than return an arbitrary mix.
  if (std::abs(dom) - std::abs(second) <= 1e-12 * std::max(1.0, std::abs(dom)))
    throw Error("leading_eigenpair: dominant eigenvalue magnitude is ambiguous "
                "(|l1|=" + std::to_string(std::abs(dom)) +
                ", |l2|=" + std::to_string(std::abs(second)) + ")");
}

Vec start_vector(std::size_t dim, const EigenPairOptions& opts) {
  Vec v;
  if (opts.start && opts.start->size() == static_cast<Eigen::Index>(dim) &&
      opts.start->norm() > 0) {
    v = *opts.start;
  } else {
    v = Vec::Ones(dim);
  }
  return v / v.norm();
}

RealEigenPair lanczos(std::size_t dim, const RealApply& apply,
                      const EigenPairOptions& opts) {
  Vec v = start_vector(dim, opts);
  int matvecs = 0;
  for (int cycle = 0; cycle < opts.max_restarts; ++cycle) {
    const int m = std::min<std::size_t>(opts.max_space, dim);
    std::vector<Vec> basis;
    basis.reserve(m);
    std::vector<double> alpha, beta;  // beta[j] couples v_j and v_{j+1}
    basis.push_back(v);
    bool exhausted = false;
    for (int j = 0; j < m; ++j) {
      Vec w = apply(basis[j]);
      ++matvecs;
      alpha.push_back(basis[j].dot(w));
      // full reorthogonalization, twice
      for (int pass = 0; pass < 2; ++pass)
        for (const Vec& q : basis) w -= q.dot(w) * q;
      const double nb = w.norm();
      if (j + 1 == m) break;
      if (nb <= 1e-14) {
        exhausted = true;  // invariant subspace reached
        break;
      }
      beta.push_back(nb);
      basis.push_back(w / nb);
    }
    const int k = static_cast<int>(alpha.size());
    Mat tri = Mat::Zero(k, k);
    for (int j = 0; j < k; ++j) {
      tri(j, j) = alpha[j];
      if (j + 1 < k) tri(j, j + 1) = tri(j + 1, j) = beta[j];
    }
    Eigen::SelfAdjointEigenSolver<Mat> dec(tri);
    const Vec& theta = dec.eigenvalues();  // ascending
    int dom = std::abs(theta(0)) > std::abs(theta(k - 1)) ? 0 : k - 1;
    Vec y = Vec::Zero(dim);
    for (int j = 0; j < k; ++j) y += dec.eigenvectors()(j, dom) * basis[j];
    y.normalize();
    Vec r = apply(y) - theta(dom) * y;
    ++matvecs;
    const double res = r.norm();
    if (res <= opts.tol * std::max(1e-300, std::abs(theta(dom))) || exhausted ||
        static_cast<std::size_t>(k) == dim) {
      if (k > 1) {
        double second = theta(dom == 0 ? k - 1 : 0);
        for (int j = 0; j < k; ++j)
          if (j != dom && std::abs(theta(j)) > std::abs(second))
            second = theta(j);
        check_unambiguous(theta(dom), second);
      }
      return {theta(dom), std::move(y), matvecs, res};
    }
    v = y;
  }
  throw Error("leading_eigenpair: Lanczos did not converge in " +
              std::to_string(opts.max_restarts) + " restarts");
}

// Arnoldi over scalar S (double keeps a real map real; complex Ritz values on
// the real path signal a conjugate dominant pair, i.e. ambiguous magnitude).
template <class S, class ApplyFn>
std::tuple<cplx, Eigen::Matrix<S, Eigen::Dynamic, 1>, int, double, cplx>
arnoldi(std::size_t dim, const ApplyFn& apply,
        const Eigen::Matrix<S, Eigen::Dynamic, 1>& start,
        const EigenPairOptions& opts) {
  using VecS = Eigen::Matrix<S, Eigen::Dynamic, 1>;
  using MatS = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  VecS v = start / start.norm();
  int matvecs = 0;
  for (int cycle = 0; cycle < opts.max_restarts; ++cycle) {
    const int m = std::min<std::size_t>(opts.max_space, dim);
    std::vector<VecS> basis{v};
    MatS h = MatS::Zero(m + 1, m);
    int k = 0;
    bool exhausted = false;
    for (int j = 0; j < m; ++j) {
      VecS w = apply(basis[j]);
      ++matvecs;
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          S c = basis[i].dot(w);
          h(i, j) += c;
          w -= c * basis[i];
        }
      k = j + 1;
      const double nb = w.norm();
      if (j + 1 == m || nb <= 1e-14) {
        exhausted = nb <= 1e-14;
        h(j + 1, j) = static_cast<S>(nb);
        break;
      }
      h(j + 1, j) = static_cast<S>(nb);
      basis.push_back(w / static_cast<S>(nb));
    }
    MatS hk = h.topLeftCorner(k, k);
    CVec theta;
    CMat svecs;
    if constexpr (std::is_same_v<S, double>) {
      Eigen::EigenSolver<Mat> dec(hk);
      theta = dec.eigenvalues();
      svecs = dec.eigenvectors();
    } else {
      Eigen::ComplexEigenSolver<CMat> dec(hk);
      theta = dec.eigenvalues();
      svecs = dec.eigenvectors();
    }
    int dom = 0;
    for (int j = 1; j < k; ++j)
      if (std::abs(theta(j)) > std::abs(theta(dom))) dom = j;
    cplx second(0, 0);
    for (int j = 0; j < k; ++j)
      if (j != dom && std::abs(theta(j)) > std::abs(second)) second = theta(j);
    const double hres = std::abs(h(k, k - 1)) * std::abs(svecs(k - 1, dom));
    const bool done =
        hres <= opts.tol * std::max(1e-300, std::abs(theta(dom))) || exhausted ||
        static_cast<std::size_t>(k) == dim;
    if (done && k > 1)
      check_unambiguous(std::abs(theta(dom)), std::abs(second));
    if constexpr (std::is_same_v<S, double>) {
      // real map: build the restart / result vector from the real part
      if (std::abs(theta(dom).imag()) >
          1e-12 * std::max(1.0, std::abs(theta(dom))))
        throw Error("leading_eigenpair: dominant eigenvalue magnitude is "
                    "ambiguous (complex conjugate pair on a real map)");
      Vec y = Vec::Zero(dim);
      for (int j = 0; j < k; ++j) y += svecs(j, dom).real() * basis[j];
      y.normalize();
      if (done) return {theta(dom), y, matvecs, hres, second};
      v = y;
    } else {
      CVec y = CVec::Zero(dim);
      for (int j = 0; j < k; ++j) y += svecs(j, dom) * basis[j];
      y.normalize();
      if (done) return {theta(dom), y, matvecs, hres, second};
      v = y;
    }
  }
  throw Error("leading_eigenpair: Arnoldi did not converge in " +
              std::to_string(opts.max_restarts) + " restarts");
}

}  // namespace

RealEigenPair leading_eigenpair(std::size_t dim, const RealApply& apply,
                                const EigenPairOptions& opts) {
  if (dim == 0) throw Error("leading_eigenpair: empty map");
  if (dim == 1) {
    Vec v = Vec::Ones(1);
    Vec w = apply(v);
    return {w(0), std::move(v), 1, 0.0};
  }
  if (opts.symmetric) return lanczos(dim, apply, opts);
  auto [value, vec, matvecs, res, second] =
      arnoldi<double>(dim, apply, start_vector(dim, opts), opts);
  // residual from the exact matvec, not just the Hessenberg bound
  Vec check = apply(vec) - value.real() * vec;
  return {value.real(), std::move(vec), matvecs + 1, check.norm()};
}

RealEigenPair leading_eigenpair(const Mat& m, const EigenPairOptions& opts) {
  if (m.rows() != m.cols()) throw Error("leading_eigenpair: matrix not square");
  return leading_eigenpair(
      static_cast<std::size_t>(m.rows()),
      [&m](const Vec& v) -> Vec { return m * v; }, opts);
}

ComplexEigenPair leading_eigenpair_complex(std::size_t dim, const ComplexApply& apply,
                                           const EigenPairOptions& opts) {
  if (dim == 0) throw Error("leading_eigenpair: empty map");
  if (dim == 1) {
    CVec v = CVec::Ones(1);
    CVec w = apply(v);
    return {w(0), std::move(v), 1, 0.0};
  }
  CVec start = CVec::Ones(dim);
  if (opts.start && opts.start->size() == static_cast<Eigen::Index>(dim))
    start = opts.start->cast<cplx>();
  auto [value, vec, matvecs, res, second] =
      arnoldi<cplx>(dim, apply, start, opts);
  CVec check = apply(vec) - value * vec;
  return {value, std::move(vec), matvecs + 1, check.norm()};
}

ComplexEigenPair leading_eigenpair(const CMat& m, const EigenPairOptions& opts) {
  if (m.rows() != m.cols()) throw Error("leading_eigenpair: matrix not square");
  return leading_eigenpair_complex(
      static_cast<std::size_t>(m.rows()),
      [&m](const CVec& v) -> CVec { return m * v; }, opts);
}

Mat expm_2x2(const Mat& m) {
  if (m.rows() != 2 || m.cols() != 2) throw Error("expm_2x2: need a 2x2 matrix");
  const double a = 0.5 * (m(0, 0) + m(1, 1));
  Mat t = m - a * Mat::Identity(2, 2);
  const double disc = t(0, 0) * t(0, 0) + t(0, 1) * t(1, 0);  // t^2 = disc * I
  double ch, shn;  // cosh(sqrt(disc)), sinh(sqrt(disc))/sqrt(disc)
  if (disc > 0) {
    const double w = std::sqrt(disc);
    ch = std::cosh(w);
    shn = std::sinh(w) / w;
  } else if (disc < 0) {
    const double w = std::sqrt(-disc);
    ch = std::cos(w);
    shn = std::sin(w) / w;
  } else {
    ch = 1.0;
    shn = 1.0;
  }
  return std::exp(a) * (ch * Mat::Identity(2, 2) + shn * t);
}

}  // namespace mpoforge::linalg
