#include "mpoforge/umps.hpp"

#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

#include "mpoforge/linalg.hpp"
#include "mpoforge/tensor.hpp"

namespace mpoforge::imps {

namespace {

template <class S>
using Matrix = typename BasicUniformMPS<S>::Matrix;

template <class S>
Matrix<S> to_scalar(const Mat& m) {
  if constexpr (std::is_same_v<S, double>)
    return m;
  else
    return m.cast<cplx>();
}

/// vec(X) with Eigen's column-major layout; only internal consistency between
/// vec/unvec matters, the transfer map stays symmetric either way.
template <class S>
Eigen::Vector<S, Eigen::Dynamic> vec_of(const Matrix<S>& m) {
  return Eigen::Map<const Eigen::Vector<S, Eigen::Dynamic>>(m.data(), m.size());
}

template <class S>
Matrix<S> unvec(const Eigen::Vector<S, Eigen::Dynamic>& v, long d) {
  return Eigen::Map<const Matrix<S>>(v.data(), d, d);
}

template <class S>
Matrix<S> transfer_step(const std::vector<Matrix<S>>& a, const Matrix<S>& x) {
  Matrix<S> out = Matrix<S>::Zero(x.rows(), x.cols());
  for (const auto& ai : a) out += ai * x * ai.transpose();
  return out;
}

struct FixedPoint {
  double value = 0;      ///< |leading eigenvalue|
  cplx value_c = 0;      ///< leading eigenvalue (complex path)
  Mat x;                 ///< symmetrized fixed point, ||x||_F = 1, tr x >= 0
  CMat xc;
  int iterations = 0;
};

FixedPoint transfer_fixed_point(const std::vector<Mat>& a, Vec* warm) {
  const long d = a[0].rows();
  linalg::EigenPairOptions opts;
  opts.symmetric = true;
  Vec start;
  if (warm && warm->size() == d * d) {
    start = *warm;
    opts.start = &start;
  }
  const auto pair = linalg::leading_eigenpair(
      static_cast<std::size_t>(d * d),
      [&](const Vec& v) { return vec_of<double>(transfer_step<double>(a, unvec<double>(v, d))); },
      opts);
  if (warm) *warm = pair.vector;
  FixedPoint fp;
  fp.value = pair.value;
  fp.iterations = pair.iterations;
  Mat x = unvec<double>(pair.vector, d);
  x = 0.5 * (x + x.transpose()).eval();
  if (x.trace() < 0) x = -x;
  const double nrm = x.norm();
  if (nrm == 0) throw Error("transfer fixed point vanished");
  fp.x = x / nrm;
  return fp;
}

FixedPoint transfer_fixed_point_complex(const std::vector<CMat>& a) {
  const long d = a[0].rows();
  const auto pair = linalg::leading_eigenpair_complex(
      static_cast<std::size_t>(d * d), [&](const CVec& v) {
        return vec_of<cplx>(transfer_step<cplx>(a, unvec<cplx>(v, d)));
      });
  FixedPoint fp;
  fp.value_c = pair.value;
  fp.value = std::abs(pair.value);
  fp.iterations = pair.iterations;
  CMat x = unvec<cplx>(pair.vector, d);
  x = 0.5 * (x + x.transpose()).eval();
  const double nrm = x.norm();
  if (nrm == 0) throw Error("transfer fixed point vanished");
  fp.xc = x / nrm;
  return fp;
}

}  // namespace

UniformMPS product_state(const Vec& amplitudes) {
  UniformMPS mps;
  for (long i = 0; i < amplitudes.size(); ++i)
    mps.a.push_back(amplitudes(i) * Mat::Identity(1, 1));
  return mps;
}

template <class S>
BasicUniformMPS<S> apply_gate(const BasicUniformMPS<S>& mps, const gate::GateMPO& g) {
  if (mps.d() != static_cast<int>(g.op_basis[0].rows()))
    throw Error("apply_gate: physical dimension mismatch");
  const int dphys = mps.d();
  const long dim = static_cast<long>(mps.bond()) * g.bond();
  BasicUniformMPS<S> out;
  for (int i = 0; i < dphys; ++i) {
    Matrix<S> acc = Matrix<S>::Zero(dim, dim);
    for (int k = 0; k < g.symbols(); ++k)
      for (int j = 0; j < dphys; ++j) {
        const double c = g.op_basis[k](i, j);
        if (c != 0.0) acc += c * kron(mps.a[j], to_scalar<S>(g.site[k]));
      }
    out.a.push_back(std::move(acc));
  }
  return out;
}

template UniformMPS apply_gate<double>(const UniformMPS&, const gate::GateMPO&);
template CUniformMPS apply_gate<cplx>(const CUniformMPS&, const gate::GateMPO&);

std::pair<UniformMPS, TruncationReport> truncate(const UniformMPS& mps, int d_target,
                                                 Vec* warm) {
  const long d = mps.bond();
  for (const Mat& ai : mps.a)
    if ((ai - ai.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, ai.norm()))
      throw Error("truncate: input matrices must be symmetric");
  const FixedPoint fp = transfer_fixed_point(mps.a, warm);
  const Eigen::SelfAdjointEigenSolver<Mat> es(fp.x);
  if (es.info() != Eigen::Success) throw Error("truncate: eigendecomposition failed");
  const long k = std::min<long>(d_target, d);
  // Eigen sorts ascending; the dominant block is the tail.
  Mat p(d, k);
  for (long c = 0; c < k; ++c) p.col(c) = es.eigenvectors().col(d - 1 - c);
  UniformMPS out;
  for (const Mat& ai : mps.a) out.a.push_back((p.transpose() * ai * p).eval());
  TruncationReport rep;
  rep.kept = static_cast<int>(k);
  rep.transfer_value = fp.value;
  rep.eig_iterations = fp.iterations;
  const double total = es.eigenvalues().cwiseAbs().sum();
  double dropped = 0;
  for (long c = 0; c < d - k; ++c) dropped += std::abs(es.eigenvalues()(c));
  rep.discarded_weight = total > 0 ? std::min(1.0, std::max(0.0, dropped / total)) : 0.0;
  return {std::move(out), rep};
}

std::pair<CUniformMPS, TruncationReport> truncate(const CUniformMPS& mps, int d_target,
                                                  CVec*) {
  const long d = mps.bond();
  for (const CMat& ai : mps.a)
    if ((ai - ai.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, ai.norm()))
      throw Error("truncate: input matrices must be symmetric");
  const FixedPoint fp = transfer_fixed_point_complex(mps.a);
  // Complex symmetric x: eigenvectors are pairwise w^T w orthogonal; scaling
  // them to w^T w = 1 makes P complex orthogonal, so full-rank truncation is
  // a pure gauge transform. Isotropic vectors (w^T w ~ 0) mean the input
  // needs gauge conditioning first.
  const linalg::EigResult eig = linalg::eig_general(fp.xc);
  const long k = std::min<long>(d_target, d);
  CMat p(d, k);
  for (long c = 0; c < k; ++c) {
    CVec w = eig.vectors.col(c);
    const cplx s = (w.transpose() * w)(0);
    if (std::abs(s) < 1e-8)
      throw Error("truncate: isotropic transfer eigenvector; gauge-condition first");
    p.col(c) = w / std::sqrt(s);
  }
  if ((p.transpose() * p - CMat::Identity(k, k)).cwiseAbs().maxCoeff() > 1e-8)
    throw Error("truncate: transfer eigenbasis not orthogonal (degenerate x?)");
  CUniformMPS out;
  for (const CMat& ai : mps.a) out.a.push_back((p.transpose() * ai * p).eval());
  TruncationReport rep;
  rep.kept = static_cast<int>(k);
  rep.transfer_value = fp.value;
  rep.eig_iterations = fp.iterations;
  const double total = eig.values.cwiseAbs().sum();
  double dropped = 0;
  for (long c = k; c < d; ++c) dropped += std::abs(eig.values(c));
  rep.discarded_weight = total > 0 ? std::min(1.0, std::max(0.0, dropped / total)) : 0.0;
  return {std::move(out), rep};
}

template <class S>
BasicUniformMPS<S> normalize(const BasicUniformMPS<S>& mps, double* value_out) {
  BasicUniformMPS<S> out = mps;
  if constexpr (std::is_same_v<S, double>) {
    const FixedPoint fp = transfer_fixed_point(mps.a, nullptr);
    if (fp.value <= 0) throw Error("normalize: transfer spectrum vanished");
    if (value_out) *value_out = fp.value;
    const double s = std::sqrt(fp.value);
    for (auto& ai : out.a) ai /= s;
  } else {
    const FixedPoint fp = transfer_fixed_point_complex(mps.a);
    if (fp.value <= 0) throw Error("normalize: transfer spectrum vanished");
    if (value_out) *value_out = fp.value;
    const cplx s = std::sqrt(fp.value_c);
    for (auto& ai : out.a) ai /= s;
  }
  return out;
}

template UniformMPS normalize<double>(const UniformMPS&, double*);
template CUniformMPS normalize<cplx>(const CUniformMPS&, double*);

namespace {

/// Energy density from a precomputed fixed point; valid for any overall
/// normalization because lambda divides each insertion.
double energy_with(const UniformMPS& mps, const FixedPoint& fp, const Mat& h2,
                   const Mat& h1) {
  const int dp = mps.d();
  const Mat& x = fp.x;
  double e = 0;
  if (h2.size()) {
    if (h2.rows() != dp * dp) throw Error("measure: two-site term size mismatch");
    std::vector<std::vector<Mat>> pair(dp, std::vector<Mat>(dp));
    for (int i = 0; i < dp; ++i)
      for (int j = 0; j < dp; ++j) pair[i][j] = mps.a[i] * mps.a[j];
    for (int i1 = 0; i1 < dp; ++i1)
      for (int i2 = 0; i2 < dp; ++i2)
        for (int j1 = 0; j1 < dp; ++j1)
          for (int j2 = 0; j2 < dp; ++j2) {
            const double c = h2(i1 * dp + i2, j1 * dp + j2);
            if (c != 0.0)
              e += c * (x.transpose() * pair[j1][j2] * x * pair[i1][i2].transpose()).trace();
          }
    e /= fp.value * fp.value;
  }
  if (h1.size()) {
    if (h1.rows() != dp) throw Error("measure: one-site term size mismatch");
    double e1 = 0;
    for (int i = 0; i < dp; ++i)
      for (int j = 0; j < dp; ++j) {
        const double c = h1(i, j);
        if (c != 0.0) e1 += c * (x.transpose() * mps.a[j] * x * mps.a[i].transpose()).trace();
      }
    e += e1 / fp.value;
  }
  return e;
}

}  // namespace

double measure_bond_energy(const UniformMPS& mps, const Mat& two_site_term,
                           const Mat& one_site_term) {
  const FixedPoint fp = transfer_fixed_point(mps.a, nullptr);
  if (std::abs(fp.value - 1.0) > 1e-6)
    throw Error("measure_bond_energy: state not normalized (lambda = " +
                std::to_string(fp.value) + ")");
  return energy_with(mps, fp, two_site_term, one_site_term);
}

double correlation(const UniformMPS& mps, const Mat& op0, const Mat& opr, int r) {
  if (r < 1) throw Error("correlation: r must be >= 1");
  const int dp = mps.d();
  const FixedPoint fp = transfer_fixed_point(mps.a, nullptr);
  auto insert = [&](const Mat& op, const Mat& x) {
    Mat out = Mat::Zero(x.rows(), x.cols());
    for (int i = 0; i < dp; ++i)
      for (int j = 0; j < dp; ++j)
        if (op(i, j) != 0.0) out += op(i, j) * mps.a[j] * x * mps.a[i].transpose();
    return out;
  };
  Mat y = insert(opr, fp.x);
  for (int k = 0; k < r - 1; ++k) y = transfer_step<double>(mps.a, y);
  y = insert(op0, y);
  return (fp.x.transpose() * y).trace() / std::pow(fp.value, r + 1);
}

namespace {

double sv_ratio(const CMat& m) {
  const Vec s = linalg::svd(m).S;
  if (s.size() == 0 || s(0) == 0) return 0;
  return s(s.size() - 1) / s(0);
}

CMat expm_hermitian(const CMat& h) {
  const Eigen::SelfAdjointEigenSolver<CMat> es(h);
  return es.eigenvectors() * es.eigenvalues().array().exp().matrix().asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace

GaugeReport gauge_condition(const CMat& x, double eps0, int max_iter) {
  const long d = x.rows();
  GaugeReport rep;
  rep.q = CMat::Identity(d, d);
  rep.x = 0.5 * (x + x.transpose());
  rep.ratio_before = rep.ratio_after = sv_ratio(rep.x);
  double eps = eps0;
  while (rep.steps < max_iter) {
    const auto svd = linalg::svd(rep.x);
    const CVec v1 = svd.U.col(0);
    const CVec vd = svd.U.col(d - 1);
    const Mat g = ((v1 * v1.adjoint() - vd * vd.adjoint()).imag()).eval();
    if (g.cwiseAbs().maxCoeff() < 1e-14) break;  // real case: nothing to gain
    bool accepted = false;
    for (const double sgn : {1.0, -1.0}) {
      const CMat f = expm_hermitian(cplx(0, sgn * eps) * g.cast<cplx>());
      const CMat cand = f * rep.x * f.transpose();
      const double rc = sv_ratio(cand);
      if (rc > rep.ratio_after) {
        const double gain = rc - rep.ratio_after;
        rep.x = cand;
        rep.q = (f * rep.q).eval();
        rep.ratio_after = rc;
        ++rep.steps;
        accepted = true;
        if (gain < 1e-8) return rep;
        break;
      }
    }
    if (!accepted) {
      eps *= 0.5;
      ++rep.steps;
      if (eps < 1e-10) break;
    }
  }
  return rep;
}

std::vector<StageConfig> default_schedule(double eps_final) {
  static const double ladder[] = {1e-1, 5e-2, 2e-2, 1e-2, 5e-3, 2.5e-3, 1e-3,
                                  5e-4, 2e-4, 1e-4, 5e-5, 2e-5, 1e-5};
  // Imaginary-time budget per stage; front-loaded where sweeps are cheap.
  static const double beta[] = {80, 50, 40, 40, 30, 20, 15, 15, 15, 15, 15, 15, 15};
  std::vector<StageConfig> out;
  for (std::size_t i = 0; i < std::size(ladder); ++i) {
    const double eps = ladder[i];
    StageConfig st;
    st.epsilon = eps;
    st.max_sweeps = static_cast<int>(beta[i] / eps);
    // Well below the c2 eps^2 stage bias, so stages stop relaxed, not stalled.
    st.tol = 1e-4 * eps * eps;
    out.push_back(st);
    if (eps <= eps_final) break;
  }
  return out;
}

namespace {

/// Aitken limit of the in-stage energy relaxation from three trace samples
/// m sweeps apart. The tail of a stage decays geometrically (single slowest
/// transfer mode), so the delta^2 step recovers the stage fixed point from a
/// run stopped at finite slope. Falls back to the raw value when the samples
/// do not look geometric.
double stage_limit(const std::vector<SweepRecord>& trace, int stage_sweeps) {
  const double raw = trace.back().energy;
  if (stage_sweeps < 3) return raw;
  const int m = std::max(1, stage_sweeps / 8);
  if (2 * m > stage_sweeps - 1) return raw;
  const std::size_t last = trace.size() - 1;
  const double e0 = trace[last - 2 * m].energy;
  const double e1 = trace[last - m].energy;
  const double e2 = trace[last].energy;
  const double d1 = e1 - e0, d2 = e2 - e1;
  const double denom = d2 - d1;
  if (d1 * d2 <= 0) return raw;  // not monotone: no geometric tail visible
  if (std::abs(denom) < 1e-3 * std::abs(d2)) return raw;
  const double corr = d2 * d2 / denom;
  if (std::abs(corr) > 10.0 * std::abs(d2)) return raw;
  return e2 - corr;
}

/// Least-squares fit e(eps) = e0 + c2 t^2 + c3 t^3 (+ c4 t^4 with >= 4
/// points), t = eps/eps_max, over the final converged stages; returns the
/// eps -> 0 intercept. First-order Trotter leaves no linear term in the
/// per-stage fixed-point energies, which the gapped-model ladder confirms.
bool extrapolate_stages(const std::vector<StageSummary>& stages, double* e0) {
  std::vector<const StageSummary*> tail;
  for (auto it = stages.rbegin(); it != stages.rend() && tail.size() < 4; ++it)
    tail.push_back(&*it);
  if (tail.size() < 3) return false;
  const int n = static_cast<int>(tail.size());
  const int terms = n >= 4 ? 4 : 3;
  double emax = 0;
  for (const auto* s : tail) emax = std::max(emax, s->epsilon);
  Mat v(n, terms);
  Vec rhs(n);
  for (int r = 0; r < n; ++r) {
    const double t = tail[r]->epsilon / emax;
    v(r, 0) = 1;
    v(r, 1) = t * t;
    v(r, 2) = t * t * t;
    if (terms == 4) v(r, 3) = t * t * t * t;
    rhs(r) = tail[r]->energy;
  }
  const Vec coef = linalg::solve_least_squares(v, rhs);
  *e0 = coef(0);
  return true;
}

}  // namespace

GroundStateResult ground_state_search(
    gate::Model model, double field, int d_max, const std::vector<StageConfig>& schedule,
    const std::function<void(const SweepRecord&)>& on_sweep) {
  if (d_max < 1) throw Error("ground_state_search: d_max must be >= 1");
  GroundStateResult res;
  Vec amp(2);
  amp << 1, 0;
  UniformMPS state = product_state(amp);
  std::vector<Vec> warm;
  Vec warm_measure;
  int global_sweep = 0;

  for (const StageConfig& st : schedule) {
    const gate::TrotterPlan plan = gate::trotter_plan(model, st.epsilon, field);
    const double tol = st.tol > 0 ? st.tol : 0.1 * st.epsilon * st.epsilon;
    if (warm.size() < plan.gates.size()) warm.resize(plan.gates.size());
    double prev_e = std::numeric_limits<double>::quiet_NaN();
    double first_e = std::numeric_limits<double>::quiet_NaN();
    double min_e = std::numeric_limits<double>::infinity();
    bool stage_converged = false;
    int stage_sweeps = 0;

    for (int sweep = 0; sweep < st.max_sweeps; ++sweep) {
      ++stage_sweeps;
      double discarded = 0;
      for (std::size_t gi = 0; gi < plan.gates.size(); ++gi) {
        state = apply_gate(state, plan.gates[gi]);
        if (state.bond() > d_max) {
          auto [trunc, rep] = truncate(state, d_max, &warm[gi]);
          state = std::move(trunc);
          discarded += rep.discarded_weight;
        }
      }
      // One transfer solve serves both the normalization and the measurement.
      const FixedPoint fp = transfer_fixed_point(state.a, &warm_measure);
      if (fp.value <= 0) throw Error("ground_state_search: transfer spectrum vanished");
      const double e = energy_with(state, fp, plan.bond_term, plan.site_term);
      const double s = std::sqrt(fp.value);
      for (auto& ai : state.a) ai /= s;
      warm_measure /= warm_measure.norm();

      ++global_sweep;
      SweepRecord rec{global_sweep, st.epsilon, state.bond(), e, discarded};
      res.trace.push_back(rec);
      if (on_sweep) on_sweep(rec);

      if (sweep == 0) first_e = e;
      min_e = std::min(min_e, e);
      if (sweep > 0 && std::abs(e - prev_e) < tol) {
        stage_converged = true;
        prev_e = e;
        break;
      }
      prev_e = e;
    }

    StageSummary sum;
    sum.epsilon = st.epsilon;
    sum.energy_raw = prev_e;
    sum.energy = stage_limit(res.trace, stage_sweeps);
    sum.sweeps = stage_sweeps;
    sum.converged = stage_converged;
    res.stages.push_back(sum);

    if (!stage_converged && min_e >= first_e - 1e-10) {
      std::ostringstream os;
      os << "stage eps=" << st.epsilon << " never lowered the energy (start " << first_e
         << ", best " << min_e << "); aborting";
      res.diagnostic = os.str();
      res.state = std::move(state);
      res.energy = res.energy_measured = prev_e;
      res.total_sweeps = global_sweep;
      res.converged = false;
      return res;
    }
    res.converged = stage_converged;
    res.energy_measured = prev_e;
  }
  res.energy = res.energy_measured;
  double e0 = 0;
  if (extrapolate_stages(res.stages, &e0)) {
    res.energy = e0;
    res.extrapolated = true;
  }
  res.state = std::move(state);
  res.total_sweeps = global_sweep;
  return res;
}

}  // namespace mpoforge::imps
