#include "mpoforge/ham_mpo.hpp"

#include <cmath>
#include <sstream>

#include "mpoforge/expfit.hpp"
#include "mpoforge/gate_mpo.hpp"
#include "mpoforge/linalg.hpp"
#include "mpoforge/tensor.hpp"

namespace mpoforge::ham {

bool HamiltonianMPO::real_ops() const {
  for (const auto& op : ops)
    if (op.imag().cwiseAbs().maxCoeff() > 0.0) return false;
  return true;
}

namespace {

Mat unit(int d, int r, int c) {
  Mat m = Mat::Zero(d, d);
  m(r, c) = 1.0;
  return m;
}

void append_field(HamiltonianMPO& h, const Mat& field) {
  if (field.rows() != 2 || field.cols() != 2) throw Error("ham: field op must be 2x2");
  if (field.cwiseAbs().maxCoeff() == 0.0) return;
  h.B.push_back(unit(h.bond(), h.start, h.stop));
  h.ops.push_back(field.cast<cplx>());
}

}  // namespace

HamiltonianMPO build_nn_mpo(const std::array<double, 3>& mu, const Mat& field) {
  HamiltonianMPO h;
  h.label = "nn";
  h.start = 0;
  h.stop = 4;
  const int d = 5;
  h.B.push_back(unit(d, 0, 0) + unit(d, 4, 4));
  h.ops.push_back(CMat::Identity(2, 2));
  const CMat sigma[3] = {gate::pauli_x().cast<cplx>(), gate::pauli_y(),
                         gate::pauli_z().cast<cplx>()};
  for (int a = 0; a < 3; ++a) {
    h.B.push_back(unit(d, 0, 1 + a) + mu[a] * unit(d, 1 + a, 4));
    h.ops.push_back(sigma[a]);
  }
  h.v_left = Vec::Unit(d, 0);
  h.v_right = Vec::Unit(d, 4);
  append_field(h, field);
  return h;
}

HamiltonianMPO build_ising_mpo(double mu, const Mat& field) {
  HamiltonianMPO h;
  h.label = "ising";
  h.start = 0;
  h.stop = 2;
  h.B.push_back(unit(3, 0, 0) + unit(3, 2, 2));
  h.ops.push_back(CMat::Identity(2, 2));
  h.B.push_back(unit(3, 0, 1) + mu * unit(3, 1, 2));
  h.ops.push_back(gate::pauli_z().cast<cplx>());
  h.v_left = Vec::Unit(3, 0);
  h.v_right = Vec::Unit(3, 2);
  append_field(h, field);
  return h;
}

HamiltonianMPO build_expdecay_mpo(const std::array<double, 3>& mu,
                                  const std::array<double, 3>& lambda, const Mat& field) {
  for (double l : lambda)
    if (std::abs(l) >= 1.0)
      throw Error("expdecay: |lambda| must be < 1, got " + std::to_string(l));
  HamiltonianMPO h = build_nn_mpo(mu, field);
  h.label = "expdecay";
  // Channel a idles with weight lambda_a, turning mu_a into mu_a lambda_a^{r-1}.
  for (int a = 0; a < 3; ++a) h.B[0](1 + a, 1 + a) = lambda[a];
  return h;
}

HamiltonianMPO build_powerlaw_mpo(double p, int n, int n_fit, const Mat& op) {
  if (n < 1 || n_fit < 2 * n) throw Error("powerlaw: need n >= 1 and n_fit >= 2n");
  Vec f(n_fit);
  for (int r = 1; r <= n_fit; ++r) f(r - 1) = std::pow(static_cast<double>(r), -p);
  const auto fit = expfit::fit_exp_sum(f, n, expfit::PencilMethod::Qr);
  const int nc = static_cast<int>(fit.exponents.size());
  Vec lam(nc), wt(nc);
  for (int c = 0; c < nc; ++c) {
    const cplx l = fit.exponents(c);
    const cplx x = fit.weights(c);
    if (std::abs(l.imag()) > 1e-8 * (1.0 + std::abs(l)) || std::abs(x.imag()) > 1e-8)
      throw Error("powerlaw: fit produced complex exponents; reduce n or raise n_fit");
    if (std::abs(l.real()) >= 1.0)
      throw Error("powerlaw: fit produced non-decaying exponent " + std::to_string(l.real()));
    lam(c) = l.real();
    wt(c) = x.real();
  }
  HamiltonianMPO h;
  std::ostringstream label;
  label << "powerlaw p=" << p << " n=" << nc;
  h.label = label.str();
  h.start = 0;
  h.stop = nc + 1;
  const int d = nc + 2;
  Mat b0 = unit(d, 0, 0) + unit(d, d - 1, d - 1);
  // Weights fold into the opening hop so J(r) = sum_c wt_c lam_c^r exactly.
  Mat bop = Mat::Zero(d, d);
  for (int c = 0; c < nc; ++c) {
    b0(1 + c, 1 + c) = lam(c);
    bop(0, 1 + c) = wt(c) * lam(c);
    bop(1 + c, d - 1) = 1.0;
  }
  h.B = {b0, bop};
  h.ops = {CMat::Identity(2, 2), op.cast<cplx>()};
  h.v_left = Vec::Unit(d, 0);
  h.v_right = Vec::Unit(d, d - 1);
  return h;
}

double realized_coupling(const HamiltonianMPO& h, int symbol, int r) {
  if (symbol < 0 || symbol >= h.symbols()) throw Error("realized_coupling: bad symbol");
  if (r < 1) throw Error("realized_coupling: r must be >= 1");
  Vec v = h.B[symbol].transpose() * h.v_left;
  for (int k = 0; k < r - 1; ++k) v = h.B[0].transpose() * v;
  v = h.B[symbol].transpose() * v;
  return v.dot(h.v_right);
}

HamiltonianMPO with_site_shift(const HamiltonianMPO& h, double c) {
  HamiltonianMPO out = h;
  out.B.push_back(unit(h.bond(), h.start, h.stop));
  out.ops.push_back(c * CMat::Identity(2, 2));
  return out;
}

Mat materialize_finite(const HamiltonianMPO& h, int n_sites) {
  if (n_sites < 1 || n_sites > 12) throw Error("materialize_finite: n_sites out of range");
  const int d = h.bond();
  const int nsym = h.symbols();
  const int half = n_sites / 2;

  // Left blocks L[m] = <v_l| chain up to the cut; right blocks R[m] = chain
  // after the cut |v_r>; only one boundary row/column is ever needed.
  std::vector<CMat> lblk(d), rblk(d);
  for (int m = 0; m < d; ++m) {
    lblk[m] = h.v_left(m) * CMat::Identity(1, 1);
    rblk[m] = h.v_right(m) * CMat::Identity(1, 1);
  }
  for (int s = 0; s < half; ++s) {
    std::vector<CMat> next(d);
    const long dim = lblk[0].rows() * 2;
    for (int c = 0; c < d; ++c) {
      CMat acc = CMat::Zero(dim, dim);
      for (int j = 0; j < nsym; ++j)
        for (int b = 0; b < d; ++b)
          if (h.B[j](b, c) != 0.0) acc += h.B[j](b, c) * kron(lblk[b].eval(), h.ops[j]);
      next[c] = std::move(acc);
    }
    lblk = std::move(next);
  }
  for (int s = 0; s < n_sites - half; ++s) {
    std::vector<CMat> next(d);
    const long dim = rblk[0].rows() * 2;
    for (int b = 0; b < d; ++b) {
      CMat acc = CMat::Zero(dim, dim);
      for (int j = 0; j < nsym; ++j)
        for (int c = 0; c < d; ++c)
          if (h.B[j](b, c) != 0.0) acc += h.B[j](b, c) * kron(h.ops[j], rblk[c].eval());
      next[b] = std::move(acc);
    }
    rblk = std::move(next);
  }
  const long dim = 1L << n_sites;
  CMat out = CMat::Zero(dim, dim);
  for (int m = 0; m < d; ++m)
    if (lblk[m].cwiseAbs().maxCoeff() != 0.0 && rblk[m].cwiseAbs().maxCoeff() != 0.0)
      out += kron(lblk[m], rblk[m]);
  const double scale = out.cwiseAbs().maxCoeff();
  const double imag = out.imag().cwiseAbs().maxCoeff();
  if (imag > 1e-12 * std::max(1.0, scale))
    throw Error("materialize_finite: operator has uncancelled imaginary part");
  return out.real();
}

int operator_schmidt_rank(const Mat& op, int n_sites, int cut, double tol) {
  if (cut < 1 || cut >= n_sites) throw Error("operator_schmidt_rank: bad cut");
  const long dl = 1L << cut, dr = 1L << (n_sites - cut);
  if (op.rows() != dl * dr || op.cols() != dl * dr)
    throw Error("operator_schmidt_rank: size mismatch");
  Mat m(dl * dl, dr * dr);
  for (long rl = 0; rl < dl; ++rl)
    for (long cl = 0; cl < dl; ++cl)
      for (long rr = 0; rr < dr; ++rr)
        for (long cr = 0; cr < dr; ++cr)
          m(rl * dl + cl, rr * dr + cr) = op(rl * dr + rr, cl * dr + cr);
  const Eigen::JacobiSVD<Mat> svd(m);
  const Vec s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (long i = 0; i < s.size(); ++i)
    if (s(i) > tol * s(0)) ++rank;
  return rank;
}

}  // namespace mpoforge::ham
