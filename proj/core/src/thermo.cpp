#include "mpoforge/thermo.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "mpoforge/linalg.hpp"

namespace mpoforge::thermo {
namespace {

using imps::UniformMPS;

// Dense chain solves are O(dim^3); beyond this the evaluator refuses rather
// than silently crawling. dim = D^2 * Dm for energy, D^2 * Dm^2 for variance.
constexpr int kMaxDenseDim = 3000;

constexpr double kChainTol = 1e-8;    // generalized-chain residual, relative
constexpr double kMarkerTol = 1e-10;  // marker eigenvector residual, relative
constexpr double kChainDead = 1e-3;   // residual above this: the chain simply ends
constexpr double kNormGuard = 1e8;    // solution/rhs growth treated as a dead chain

template <class S>
using MatOf = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VecOf = Eigen::Vector<S, Eigen::Dynamic>;

double real_checked(double v, double, const char*) { return v; }
double real_checked(cplx v, double tol, const char* what) {
  if (std::abs(v.imag()) > tol * (1.0 + std::abs(v.real())))
    throw Error(std::string(what) + ": non-real value, imag = " + std::to_string(v.imag()));
  return v.real();
}

template <class S>
MatOf<S> cast_op(const CMat& m) {
  if constexpr (std::is_same_v<S, double>)
    return m.real();
  else
    return m;
}

// E_H = sum_{j,i,k} <k|X_j|i> A_i (x) B_j (x) A_k acting on vectors indexed
// [alpha, m, beta] with flat index (alpha*Dm + m)*D + beta. alpha carries the
// ket symbol leg, beta the bra one; A is real symmetric in the pipeline so
// the distinction only matters through the coefficient orientation, which the
// dense window oracles pin down.
template <class S>
struct HTransfer {
  std::vector<MatOf<S>> A;
  std::vector<Mat> B;
  std::vector<MatOf<S>> X;
  int D = 0, Dm = 0, n = 0;

  HTransfer(const UniformMPS& mps, const ham::HamiltonianMPO& h) {
    if (mps.d() != 2) throw Error("thermo: physical dimension must be 2");
    D = mps.bond();
    Dm = h.bond();
    n = D * Dm * D;
    for (const Mat& a : mps.a) A.push_back(a.template cast<S>());
    B = h.B;
    for (const CMat& op : h.ops) X.push_back(cast_op<S>(op));
  }

  VecOf<S> embed(const Mat& x, const Vec& marker) const {
    VecOf<S> q = VecOf<S>::Zero(n);
    for (int al = 0; al < D; ++al)
      for (int m = 0; m < Dm; ++m) {
        if (marker(m) == 0.0) continue;
        q.segment((al * Dm + m) * D, D) =
            (marker(m) * x.row(al).transpose()).eval().template cast<S>();
      }
    return q;
  }

  VecOf<S> apply(const VecOf<S>& v, bool transpose) const {
    VecOf<S> out = VecOf<S>::Zero(n);
    std::vector<MatOf<S>> slice(Dm);
    MatOf<S> op(D, D);
    for (std::size_t j = 0; j < B.size(); ++j) {
      for (int m = 0; m < Dm; ++m) slice[m] = MatOf<S>::Zero(D, D);
      for (int m = 0; m < Dm; ++m)
        for (int mp = 0; mp < Dm; ++mp) {
          double w = transpose ? B[j](mp, m) : B[j](m, mp);
          if (w == 0.0) continue;
          for (int al = 0; al < D; ++al)
            slice[m].row(al) += w * v.segment((al * Dm + mp) * D, D).transpose();
        }
      for (int m = 0; m < Dm; ++m) {
        op.setZero();
        for (int k = 0; k < 2; ++k)
          for (int i = 0; i < 2; ++i) {
            S c = X[j](k, i);
            if (c == S(0)) continue;
            if (transpose)
              op += c * (A[i].transpose() * slice[m] * A[k]);
            else
              op += c * (A[i] * slice[m] * A[k].transpose());
          }
        for (int al = 0; al < D; ++al)
          out.segment((al * Dm + m) * D, D) += op.row(al).transpose();
      }
    }
    return out;
  }

  MatOf<S> dense() const {
    MatOf<S> e(n, n);
    for (int t = 0; t < n; ++t) e.col(t) = apply(VecOf<S>::Unit(n, t), false);
    return e;
  }
};

// E_{H^2}: per site sum_{j,jj} (X_j X_jj)(k, i) A_i (x) B_j (x) B_jj (x) A_k
// on [alpha, m, nn, beta], flat ((alpha*Dm + m)*Dm + nn)*D + beta.
template <class S>
struct H2Transfer {
  std::vector<MatOf<S>> A;
  std::vector<Mat> B;
  std::vector<MatOf<S>> P;  // P[j*ns + jj] = X_j * X_jj
  int D = 0, Dm = 0, ns = 0, n = 0;

  H2Transfer(const UniformMPS& mps, const ham::HamiltonianMPO& h) {
    if (mps.d() != 2) throw Error("thermo: physical dimension must be 2");
    D = mps.bond();
    Dm = h.bond();
    ns = h.symbols();
    n = D * Dm * Dm * D;
    for (const Mat& a : mps.a) A.push_back(a.template cast<S>());
    B = h.B;
    P.reserve(static_cast<std::size_t>(ns) * ns);
    for (int j = 0; j < ns; ++j)
      for (int jj = 0; jj < ns; ++jj) P.push_back(cast_op<S>((h.ops[j] * h.ops[jj]).eval()));
  }

  int flat(int al, int m, int nn, int be) const { return ((al * Dm + m) * Dm + nn) * D + be; }

  VecOf<S> embed(const Mat& x, const Vec& marker) const {
    VecOf<S> q = VecOf<S>::Zero(n);
    for (int al = 0; al < D; ++al)
      for (int m = 0; m < Dm; ++m)
        for (int nn = 0; nn < Dm; ++nn) {
          double w = marker(m) * marker(nn);
          if (w == 0.0) continue;
          q.segment(flat(al, m, nn, 0), D) =
              (w * x.row(al).transpose()).eval().template cast<S>();
        }
    return q;
  }

  // Lift an energy-space vector [alpha, m, beta] into [alpha, m, nn, beta]
  // with the marker on the leg selected by `second`.
  VecOf<S> lift(const CVec& v, const Vec& marker, bool second) const {
    VecOf<S> q = VecOf<S>::Zero(n);
    for (int al = 0; al < D; ++al)
      for (int m = 0; m < Dm; ++m)
        for (int nn = 0; nn < Dm; ++nn) {
          double w = second ? marker(nn) : marker(m);
          if (w == 0.0) continue;
          int src = (al * Dm + (second ? m : nn)) * D;
          for (int be = 0; be < D; ++be) {
            cplx z = w * v(src + be);
            if constexpr (std::is_same_v<S, double>)
              q(flat(al, m, nn, be)) = z.real();
            else
              q(flat(al, m, nn, be)) = z;
          }
        }
    return q;
  }

  VecOf<S> apply(const VecOf<S>& v, bool transpose) const {
    VecOf<S> out = VecOf<S>::Zero(n);
    VecOf<S> tmp(n), w(n);
    MatOf<S> op(D, D);
    for (int j = 0; j < ns; ++j) {
      // B_j on the m leg
      tmp.setZero();
      for (int m = 0; m < Dm; ++m)
        for (int mp = 0; mp < Dm; ++mp) {
          double bw = transpose ? B[j](mp, m) : B[j](m, mp);
          if (bw == 0.0) continue;
          for (int al = 0; al < D; ++al)
            for (int nn = 0; nn < Dm; ++nn)
              tmp.segment(flat(al, m, nn, 0), D) += bw * v.segment(flat(al, mp, nn, 0), D);
        }
      for (int jj = 0; jj < ns; ++jj) {
        // B_jj on the nn leg
        w.setZero();
        for (int nn = 0; nn < Dm; ++nn)
          for (int np = 0; np < Dm; ++np) {
            double bw = transpose ? B[jj](np, nn) : B[jj](nn, np);
            if (bw == 0.0) continue;
            for (int al = 0; al < D; ++al)
              for (int m = 0; m < Dm; ++m)
                w.segment(flat(al, m, nn, 0), D) += bw * tmp.segment(flat(al, m, np, 0), D);
          }
        const MatOf<S>& p = P[j * ns + jj];
        for (int m = 0; m < Dm; ++m)
          for (int nn = 0; nn < Dm; ++nn) {
            MatOf<S> sl(D, D);
            for (int al = 0; al < D; ++al)
              sl.row(al) = w.segment(flat(al, m, nn, 0), D).transpose();
            op.setZero();
            bool any = false;
            for (int k = 0; k < 2; ++k)
              for (int i = 0; i < 2; ++i) {
                S c = p(k, i);
                if (c == S(0)) continue;
                any = true;
                if (transpose)
                  op += c * (A[i].transpose() * sl * A[k]);
                else
                  op += c * (A[i] * sl * A[k].transpose());
              }
            if (!any) continue;
            for (int al = 0; al < D; ++al)
              out.segment(flat(al, m, nn, 0), D) += op.row(al).transpose();
          }
      }
    }
    return out;
  }

  MatOf<S> dense() const {
    MatOf<S> e(n, n);
    for (int t = 0; t < n; ++t) e.col(t) = apply(VecOf<S>::Unit(n, t), false);
    return e;
  }
};

// Min-norm least-squares solve of (E - d0) q~ = rhs followed by exact
// projection against `kernel` vectors (Hermitian dot). The min-norm solution
// already lies orthogonal to the kernel up to roundoff; the projection makes
// the deflation gauge exact.
template <class S>
struct ChainSolver {
  Eigen::CompleteOrthogonalDecomposition<MatOf<S>> cod;
  const MatOf<S>& shifted;

  explicit ChainSolver(const MatOf<S>& e_shifted) : cod(e_shifted), shifted(e_shifted) {}

  // kernel must hold actual null vectors of the shifted operator; projecting
  // the solution along anything else would change shifted * q and corrupt the
  // residual test below.
  VecOf<S> solve(const VecOf<S>& rhs, const std::vector<VecOf<S>>& kernel,
                 double* residual) const {
    VecOf<S> q = cod.solve(rhs);
    for (const auto& k : kernel) q -= k * (k.dot(q) / k.squaredNorm());
    *residual = (shifted * q - rhs).norm() / rhs.norm();
    return q;
  }
};

// One Jordan-chain extension step. True and *out filled on success; false
// when the equation has no solution and the chain legitimately ends (O(1)
// residual, or the solution norm diverging as the block coupling vanishes).
// The band between the two is reported, never guessed through.
template <class S>
bool extend_chain(const ChainSolver<S>& solver, const VecOf<S>& rhs,
                  const std::vector<VecOf<S>>& kernel, VecOf<S>* out, double* residual) {
  double res = 0;
  VecOf<S> x = solver.solve(rhs, kernel, &res);
  if (x.norm() > kNormGuard * rhs.norm()) return false;
  if (res <= kChainTol) {
    *out = std::move(x);
    *residual = std::max(*residual, res);
    return true;
  }
  if (res >= kChainDead) return false;
  throw Error("thermo: ambiguous Jordan chain, residual " + std::to_string(res));
}

template <class S>
S bilinear(const VecOf<S>& a, const VecOf<S>& b) {
  return a.cwiseProduct(b).sum();  // transpose pairing, no conjugation
}

Mat right_matrix(const FixedPoints& fp) {
  int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(fp.right.size()))));
  return Eigen::Map<const Mat>(fp.right.data(), d, d);
}
Mat left_matrix(const FixedPoints& fp) {
  int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(fp.left.size()))));
  return Eigen::Map<const Mat>(fp.left.data(), d, d);
}

void require_normalized(const FixedPoints& fp) {
  if (std::abs(fp.value - 1.0) > 1e-6)
    throw Error("thermo: state not normalized, E0 eigenvalue = " + std::to_string(fp.value));
}

template <class S>
JordanEvaluation energy_impl(const UniformMPS& mps, const ham::HamiltonianMPO& h,
                             const FixedPoints& fp) {
  HTransfer<S> t(mps, h);
  if (t.n > kMaxDenseDim)
    throw Error("thermo: dense Jordan solve dimension " + std::to_string(t.n) +
                " exceeds cap " + std::to_string(kMaxDenseDim));
  const double lam = fp.value;
  MatOf<S> e = t.dense();
  VecOf<S> qr = t.embed(right_matrix(fp), h.v_left);
  VecOf<S> ql = t.embed(left_matrix(fp), h.v_right);

  JordanEvaluation ev;
  ev.d0 = lam;
  ev.dim = t.n;
  ev.complex_path = !std::is_same_v<S, double>;
  ev.marker_residual = std::max((e * qr - lam * qr).norm() / qr.norm(),
                                (e.transpose() * ql - lam * ql).norm() / ql.norm());
  if (ev.marker_residual > kMarkerTol)
    throw Error("thermo: marker eigenvector residual " + std::to_string(ev.marker_residual));

  MatOf<S> shifted = e - lam * MatOf<S>::Identity(t.n, t.n);
  MatOf<S> shifted_t = shifted.transpose();
  ChainSolver<S> right(shifted), left(shifted_t);
  VecOf<S> qtr, qtl;
  ev.chain_residual = 0;
  const bool have_r = extend_chain(right, qr, {qr}, &qtr, &ev.chain_residual);
  const bool have_l = extend_chain(left, ql, {ql}, &qtl, &ev.chain_residual);
  if (have_r != have_l)
    throw Error("thermo: left/right Jordan chain length mismatch");
  ev.chain_length = have_r ? 2 : 1;
  if (!have_r) {
    // Diagonal block: the window has no linear term, so e = 0 exactly and
    // there is no generalized pairing to report.
    ev.q_r = qr.template cast<cplx>();
    ev.q_l = ql.template cast<cplx>();
    ev.qt_r = CVec::Zero(t.n);
    ev.qt_l = CVec::Zero(t.n);
    ev.q_small = CMat::Zero(2, 2);
    return ev;
  }
  ev.gauge_overlap = std::abs(qr.dot(qtr)) / (qr.norm() * qtr.norm());

  MatOf<S> m2(2, 2);
  m2 << bilinear<S>(ql, qr), bilinear<S>(ql, qtr), bilinear<S>(qtl, qr), bilinear<S>(qtl, qtr);
  S det = m2(0, 0) * m2(1, 1) - m2(0, 1) * m2(1, 0);
  if (std::abs(det) < 1e-12) throw Error("thermo: degenerate Jordan pairing matrix");
  MatOf<S> q2(2, 2);
  q2 << m2(1, 1), -m2(0, 1), -m2(1, 0), m2(0, 0);
  q2 /= det;

  ev.energy = real_checked(q2(0, 1), 1e-7, "thermo: energy density");
  ev.pairing = cplx(m2(0, 1));
  ev.q_r = qr.template cast<cplx>();
  ev.q_l = ql.template cast<cplx>();
  ev.qt_r = qtr.template cast<cplx>();
  ev.qt_l = qtl.template cast<cplx>();
  ev.q_small = q2.template cast<cplx>();
  return ev;
}

template <class S>
double window_impl(const UniformMPS& mps, const ham::HamiltonianMPO& h, const FixedPoints& fp,
                   int n) {
  HTransfer<S> t(mps, h);
  VecOf<S> cur = t.embed(right_matrix(fp), h.v_right);
  for (int i = 0; i < n; ++i) cur = t.apply(cur, false);
  VecOf<S> l = t.embed(left_matrix(fp), h.v_left);
  return real_checked(bilinear<S>(l, cur), 1e-7, "thermo: window expectation");
}

template <class S>
double window2_impl(const UniformMPS& mps, const ham::HamiltonianMPO& h, const FixedPoints& fp,
                    int n) {
  H2Transfer<S> t(mps, h);
  VecOf<S> cur = t.embed(right_matrix(fp), h.v_right);
  for (int i = 0; i < n; ++i) cur = t.apply(cur, false);
  VecOf<S> l = t.embed(left_matrix(fp), h.v_left);
  return real_checked(bilinear<S>(l, cur), 1e-7, "thermo: window variance");
}

template <class S>
VarianceResult variance_impl(const UniformMPS& mps, const ham::HamiltonianMPO& h,
                             const FixedPoints& fp, const JordanEvaluation& energy_ev) {
  H2Transfer<S> t(mps, h);
  if (t.n > kMaxDenseDim)
    throw Error("thermo: dense variance dimension " + std::to_string(t.n) + " exceeds cap " +
                std::to_string(kMaxDenseDim));
  const double lam = fp.value;
  Mat xr = right_matrix(fp), xl = left_matrix(fp);
  MatOf<S> e = t.dense();
  VecOf<S> r1 = t.embed(xr, h.v_left);
  VecOf<S> l1 = t.embed(xl, h.v_right);

  VarianceResult out;
  out.dim = t.n;
  double marker = std::max((e * r1 - lam * r1).norm() / r1.norm(),
                           (e.transpose() * l1 - lam * l1).norm() / l1.norm());
  if (marker > kMarkerTol)
    throw Error("thermo: variance marker residual " + std::to_string(marker));

  // The antisymmetric lifts of the energy-level chain vectors are exact
  // size-1 blocks at lam (J2 (x) J2 = J3 + J1). The min-norm chain solutions
  // pick up bilinear components along them that obstruct the next solve and
  // leak into the pairing matrix; deflate both chains against them. Window
  // boundaries never see them: lw, rw are m <-> nn symmetric, anti is odd.
  VecOf<S> anti = VecOf<S>::Zero(t.n), l_anti = VecOf<S>::Zero(t.n);
  S anti_den = S(0);
  bool have_anti = false;
  if (energy_ev.chain_length >= 2) {
    anti = 0.5 * (t.lift(energy_ev.qt_r, h.v_left, true) -
                  t.lift(energy_ev.qt_r, h.v_left, false));
    l_anti = 0.5 * (t.lift(energy_ev.qt_l, h.v_right, true) -
                    t.lift(energy_ev.qt_l, h.v_right, false));
    anti_den = bilinear<S>(l_anti, anti);
    have_anti = std::abs(anti_den) > 1e-12 * anti.norm() * l_anti.norm() && anti.norm() > 0;
  }
  auto drop_anti_r = [&](VecOf<S>& v) {
    if (have_anti) v -= anti * (bilinear<S>(l_anti, v) / anti_den);
  };
  auto drop_anti_l = [&](VecOf<S>& v) {
    if (have_anti) v -= l_anti * (bilinear<S>(v, anti) / anti_den);
  };

  MatOf<S> shifted = e - lam * MatOf<S>::Identity(t.n, t.n);
  MatOf<S> shifted_t = shifted.transpose();
  ChainSolver<S> right(shifted), left(shifted_t);
  out.chain_residual = 0;
  VecOf<S> r2, r3, l2, l3;
  int len_r = 1, len_l = 1;
  if (extend_chain(right, r1, {r1}, &r2, &out.chain_residual)) {
    len_r = 2;
    drop_anti_r(r2);
    if (extend_chain(right, r2, {r1}, &r3, &out.chain_residual)) len_r = 3;
  }
  if (extend_chain(left, l1, {l1}, &l2, &out.chain_residual)) {
    len_l = 2;
    drop_anti_l(l2);
    if (extend_chain(left, l2, {l1}, &l3, &out.chain_residual)) {
      len_l = 3;
      drop_anti_l(l3);
    }
  }
  if (len_r != len_l) throw Error("thermo: left/right variance chain length mismatch");
  out.chain_length = len_r;

  // <L| E^N |R> = a . J^N . g with J the k x k unipotent Jordan factor and
  // g = (L^T R)^-1 (L^T |R>): c0 + c1 N + c2 N(N-1)/2.
  VecOf<S> lw = t.embed(xl, h.v_left);
  VecOf<S> rw = t.embed(xr, h.v_right);
  if (out.chain_length >= 2) {
    const int k = out.chain_length;
    const VecOf<S>* rs[3] = {&r1, &r2, &r3};
    const VecOf<S>* ls[3] = {&l1, &l2, &l3};
    MatOf<S> mk(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) mk(i, j) = bilinear<S>(*ls[i], *rs[j]);
    Eigen::FullPivLU<MatOf<S>> lu(mk);
    if (!lu.isInvertible()) throw Error("thermo: singular variance pairing matrix");
    VecOf<S> a(k), b(k);
    for (int i = 0; i < k; ++i) {
      a(i) = bilinear<S>(lw, *rs[i]);
      b(i) = bilinear<S>(*ls[i], rw);
    }
    VecOf<S> g = lu.solve(b);
    out.c0 = real_checked(bilinear<S>(a, g), 1e-7, "thermo: variance c0");
    if (k == 3) {
      out.c1 = real_checked(a(0) * g(1) + a(1) * g(2), 1e-7, "thermo: variance c1");
      out.c2 = real_checked(a(0) * g(2), 1e-7, "thermo: variance c2");
    } else {
      out.c1 = real_checked(a(0) * g(1), 1e-7, "thermo: variance c1");
      out.c2 = 0;
    }
  }
  // chain_length == 1: all blocks diagonal, c1 = c2 = 0; the constant is not
  // determined by the chain algebra (documented in the header).

  double an = anti.norm();
  out.antisym_overlap = an < 1e-300 ? 0.0 : std::abs(bilinear<S>(lw, anti)) / (lw.norm() * an);
  return out;
}

UniformMPS symmetrized(const UniformMPS& mps) {
  UniformMPS out = mps;
  for (Mat& a : out.a) a = 0.5 * (a + a.transpose()).eval();
  return out;
}

}  // namespace

FixedPoints fixed_points(const UniformMPS& mps) {
  const int d = mps.bond();
  if (d == 0) throw Error("fixed_points: empty state");
  for (const Mat& a : mps.a)
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + a.cwiseAbs().maxCoeff()))
      throw Error("fixed_points: tensors must be symmetric");
  linalg::EigenPairOptions opts;
  opts.symmetric = true;
  auto ep = linalg::leading_eigenpair(
      static_cast<std::size_t>(d) * d,
      [&](const Vec& v) {
        Eigen::Map<const Mat> x(v.data(), d, d);
        Mat out = Mat::Zero(d, d);
        for (const Mat& a : mps.a) out += a * x * a.transpose();
        return Vec(Eigen::Map<const Vec>(out.data(), d * d));
      },
      opts);
  Mat x = Eigen::Map<const Mat>(ep.vector.data(), d, d);
  x = 0.5 * (x + x.transpose()).eval();
  if (x.trace() < 0) x = -x;
  x /= x.norm();
  FixedPoints fp;
  fp.right = Eigen::Map<const Vec>(x.data(), d * d);
  fp.left = fp.right;  // E0 is symmetric for symmetric tensors
  fp.value = ep.value;
  fp.iterations = ep.iterations;
  return fp;
}

JordanEvaluation energy_density(const UniformMPS& mps, const ham::HamiltonianMPO& h) {
  FixedPoints fp = fixed_points(mps);
  require_normalized(fp);
  if (h.real_ops()) return energy_impl<double>(mps, h, fp);
  return energy_impl<cplx>(mps, h, fp);
}

double finite_window_expectation(const UniformMPS& mps, const ham::HamiltonianMPO& h, int n) {
  if (n < 0) throw Error("finite_window_expectation: negative window");
  FixedPoints fp = fixed_points(mps);
  require_normalized(fp);
  if (h.real_ops()) return window_impl<double>(mps, h, fp, n);
  return window_impl<cplx>(mps, h, fp, n);
}

VarianceResult variance_density(const UniformMPS& mps, const ham::HamiltonianMPO& h,
                                double lambda_shift) {
  ham::HamiltonianMPO shifted = ham::with_site_shift(h, -lambda_shift);
  FixedPoints fp = fixed_points(mps);
  require_normalized(fp);
  if (shifted.real_ops()) {
    JordanEvaluation ev = energy_impl<double>(mps, shifted, fp);
    return variance_impl<double>(mps, shifted, fp, ev);
  }
  JordanEvaluation ev = energy_impl<cplx>(mps, shifted, fp);
  return variance_impl<cplx>(mps, shifted, fp, ev);
}

double finite_window_variance(const UniformMPS& mps, const ham::HamiltonianMPO& h,
                              double lambda_shift, int n) {
  if (n < 0) throw Error("finite_window_variance: negative window");
  ham::HamiltonianMPO shifted = ham::with_site_shift(h, -lambda_shift);
  FixedPoints fp = fixed_points(mps);
  require_normalized(fp);
  if (shifted.real_ops()) return window2_impl<double>(mps, shifted, fp, n);
  return window2_impl<cplx>(mps, shifted, fp, n);
}

GradientResult gradient_optimize(const UniformMPS& start, const ham::HamiltonianMPO& h,
                                 int max_iters) {
  constexpr double kDiffStep = 1e-6;
  constexpr double kGradTol = 1e-8;
  constexpr double kStep0 = 0.1;
  constexpr int kMaxHalvings = 40;

  auto objective = [&](const UniformMPS& m) {
    UniformMPS nm = imps::normalize(m);
    return energy_density(nm, h).energy;
  };

  GradientResult res;
  UniformMPS cur = symmetrized(start);
  double e = objective(cur);
  res.trace.push_back(e);

  const int d = cur.d(), bond = cur.bond();
  for (int iter = 0; iter < max_iters; ++iter) {
    res.iterations = iter + 1;
    // central differences over the symmetric entries (a <= b), the mirrored
    // pair moving together
    std::vector<Mat> grad(d, Mat::Zero(bond, bond));
    double gnorm2 = 0;
    for (int i = 0; i < d; ++i)
      for (int ra = 0; ra < bond; ++ra)
        for (int rb = ra; rb < bond; ++rb) {
          UniformMPS probe = cur;
          probe.a[i](ra, rb) += kDiffStep;
          probe.a[i](rb, ra) = probe.a[i](ra, rb);
          double ep = objective(probe);
          probe = cur;
          probe.a[i](ra, rb) -= kDiffStep;
          probe.a[i](rb, ra) = probe.a[i](ra, rb);
          double em = objective(probe);
          double g = (ep - em) / (2.0 * kDiffStep);
          grad[i](ra, rb) = g;
          grad[i](rb, ra) = g;
          gnorm2 += g * g;
        }
    if (std::sqrt(gnorm2) < kGradTol) {
      res.gradient_converged = true;
      break;
    }
    double step = kStep0;
    bool accepted = false;
    for (int half = 0; half < kMaxHalvings && !accepted; ++half, step *= 0.5) {
      UniformMPS cand = cur;
      for (int i = 0; i < d; ++i) cand.a[i] -= step * grad[i];
      double ec;
      try {
        ec = objective(cand);
      } catch (const Error&) {
        continue;  // candidate broke the Jordan structure; shrink the step
      }
      if (ec < e) {
        cur = std::move(cand);
        e = ec;
        res.trace.push_back(e);
        accepted = true;
      }
    }
    if (!accepted) break;  // line search exhausted: return the best point
  }
  res.state = imps::normalize(cur);
  res.energy = e;
  return res;
}

CMat dense_energy_transfer(const UniformMPS& mps, const ham::HamiltonianMPO& h) {
  HTransfer<cplx> t(mps, h);
  if (t.n > kMaxDenseDim) throw Error("dense_energy_transfer: dimension exceeds cap");
  return t.dense();
}

}  // namespace mpoforge::thermo
