#include "mpoforge/gate_mpo.hpp"

#include <cmath>

#include "mpoforge/linalg.hpp"
#include "mpoforge/tensor.hpp"

namespace mpoforge::gate {

Mat pauli_x() {
  Mat x(2, 2);
  x << 0, 1, 1, 0;
  return x;
}

Mat pauli_z() {
  Mat z(2, 2);
  z << 1, 0, 0, -1;
  return z;
}

Mat pauli_yt() {
  Mat y(2, 2);
  y << 0, 1, -1, 0;
  return y;
}

CMat pauli_y() {
  CMat y(2, 2);
  y << 0, cplx(0, -1), cplx(0, 1), 0;
  return y;
}

namespace {

/// Shared core of the ZZ/XX builders: C^0 = diag(cosh, s*sinh),
/// C^1 = sqrt(sinh cosh) * antidiag(1,1), valid for any diagonal-in-basis
/// coupling with eigenvalue pattern +,-,-,+ across the four basis products.
GateMPO two_channel_gate(double eps, double sign, Mat op, std::string label) {
  if (eps < 0) throw Error("gate: eps must be >= 0, got " + std::to_string(eps));
  const double ch = std::cosh(eps);
  const double sh = std::sinh(eps);
  GateMPO g;
  g.epsilon = eps;
  g.label = std::move(label);
  Mat c0(2, 2), c1(2, 2);
  c0 << ch, 0, 0, sign * sh;
  c1 << 0, std::sqrt(sh * ch), std::sqrt(sh * ch), 0;
  g.site = {c0, c1};
  g.op_basis = {Mat::Identity(2, 2), std::move(op)};
  return g;
}

}  // namespace

GateMPO build_zz_gate(double eps) { return two_channel_gate(eps, 1.0, pauli_z(), "zz"); }

GateMPO build_xx_gate(double eps) { return two_channel_gate(eps, 1.0, pauli_x(), "xx"); }

GateMPO build_tilde_yy_gate(double eps) {
  // exp(-eps YY) = exp(+eps YtYt) with Yt = iY; Yt Yt has eigenvalue pattern
  // -,+,+,- on the Z product basis, so C^0 picks up the sign on sinh.
  return two_channel_gate(eps, -1.0, pauli_yt(), "tilde-yy");
}

GateMPO build_local_field_gate(double eps, const Mat& op) {
  if (op.rows() != 2 || op.cols() != 2) throw Error("gate: local field op must be 2x2");
  GateMPO g;
  g.epsilon = eps;
  g.label = "field";
  g.site = {Mat::Identity(1, 1)};
  g.op_basis = {linalg::expm_2x2(eps * op)};
  return g;
}

TrotterPlan trotter_plan(Model model, double eps, double field) {
  TrotterPlan plan;
  plan.model = model;
  plan.epsilon = eps;
  plan.field = field;
  const Mat x = pauli_x();
  const Mat z = pauli_z();
  const Mat yt = pauli_yt();
  if (model == Model::Tfi) {
    // H = -sum ZZ - B sum X; exp(-eps H) ~ exp(eps sum ZZ) exp(eps B sum X).
    plan.gates = {build_zz_gate(eps), build_local_field_gate(eps, field * x)};
    plan.bond_term = -kron(z, z);
    plan.site_term = -field * x;
  } else {
    // Rotated frame: Ht = -XX + YY - ZZ = XX-part of exp(-eps Ht)
    //   exp(eps sum ZZ) exp(eps sum XX) exp(-eps sum YY), all real gates.
    plan.sublattice_rotated = true;
    plan.gates = {build_zz_gate(eps), build_xx_gate(eps), build_tilde_yy_gate(eps)};
    // Ht two-site term; Y (x) Y = -Yt (x) Yt keeps everything real.
    plan.bond_term = -kron(x, x) - kron(yt, yt) - kron(z, z);
    plan.site_term = Mat::Zero(2, 2);
  }
  return plan;
}

Mat materialize_ring(const GateMPO& g, int n_sites) {
  if (n_sites < 1 || n_sites > 12) throw Error("materialize_ring: n_sites out of range");
  const int chi = g.bond();
  const int nsym = g.symbols();
  const int half = n_sites / 2;

  // Block chain over a site range: W[a][b] = sum over symbol strings of
  // (product of C's)[a,b] * kron of the X's, built one site at a time.
  auto build_chain = [&](int len) {
    std::vector<std::vector<Mat>> w(chi, std::vector<Mat>(chi));
    for (int a = 0; a < chi; ++a)
      for (int b = 0; b < chi; ++b) w[a][b] = a == b ? Mat(Mat::Identity(1, 1)) : Mat(Mat::Zero(1, 1));
    for (int s = 0; s < len; ++s) {
      std::vector<std::vector<Mat>> next(chi, std::vector<Mat>(chi));
      const long dim = w[0][0].rows() * 2;
      for (int a = 0; a < chi; ++a)
        for (int c = 0; c < chi; ++c) {
          Mat acc = Mat::Zero(dim, dim);
          for (int k = 0; k < nsym; ++k)
            for (int b = 0; b < chi; ++b)
              if (g.site[k](b, c) != 0.0) acc += g.site[k](b, c) * kron(w[a][b], g.op_basis[k]);
          next[a][c] = std::move(acc);
        }
      w = std::move(next);
    }
    return w;
  };

  const auto w1 = build_chain(half);
  const auto w2 = build_chain(n_sites - half);
  const long dim = 1L << n_sites;
  Mat out = Mat::Zero(dim, dim);
  for (int a = 0; a < chi; ++a)
    for (int b = 0; b < chi; ++b)
      if (w1[a][b].cwiseAbs().maxCoeff() != 0.0 && w2[b][a].cwiseAbs().maxCoeff() != 0.0)
        out += kron(w1[a][b], w2[b][a]);
  return out;
}

}  // namespace mpoforge::gate
