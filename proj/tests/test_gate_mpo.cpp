#include "mpoforge/gate_mpo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "test_util.hpp"

using namespace mpoforge;
namespace tu = testutil;

namespace {

// exp(s * sum_bonds O_i O_{i+1}) on an N-ring for O^2 = 1: the bond terms
// commute, so the exponential is the product of per-bond closed forms
// cosh(s) + sinh(s) * O_i O_{i+1}.
Mat ring_exp_oracle(const Mat& o, double s, int n) {
  Mat h2 = tu::kron(o, o);
  Mat out = Mat::Identity(1 << n, 1 << n);
  for (int i = 0; i < n; ++i) {
    Mat bond = std::cosh(s) * Mat::Identity(1 << n, 1 << n) +
               std::sinh(s) * tu::bond_at(h2, i, n, true);
    out = out * bond;
  }
  return out;
}

}  // namespace

TEST(GateMpo, BuilderShapes) {
  auto g = gate::build_zz_gate(0.3);
  EXPECT_EQ(g.bond(), 2);
  EXPECT_EQ(g.symbols(), 2);
  double c = std::cosh(0.3), s = std::sinh(0.3);
  EXPECT_NEAR(g.site[0](0, 0), c, 1e-15);
  EXPECT_NEAR(g.site[0](1, 1), s, 1e-15);
  EXPECT_NEAR(g.site[0](0, 1), 0.0, 1e-15);
  EXPECT_NEAR(g.site[1](0, 1), std::sqrt(s * c), 1e-15);
  EXPECT_NEAR(g.site[1](1, 0), std::sqrt(s * c), 1e-15);
  EXPECT_THROW(gate::build_zz_gate(-0.1), Error);
}

TEST(GateMpo, SingleSiteRingIsExpEps) {
  // N=1 ring: sum_k Tr(C^k) X^k = exp(eps op^2). op^2 = I for Z and X but
  // Yt^2 = -I, so the tilde gate contracts to e^{-eps} on the one-site ring.
  for (double eps : {0.05, 0.4}) {
    for (auto [builder, sign] :
         {std::pair{gate::build_zz_gate, 1.0}, {gate::build_xx_gate, 1.0},
          {gate::build_tilde_yy_gate, -1.0}}) {
      Mat m = gate::materialize_ring(builder(eps), 1);
      EXPECT_LT(tu::max_abs(Mat(m - std::exp(sign * eps) * Mat::Identity(2, 2))), 1e-13);
    }
  }
}

TEST(GateMpo, ZzExactOnRings) {
  for (double eps : {0.01, 0.5}) {
    for (int n = 2; n <= 6; ++n) {
      Mat ref = ring_exp_oracle(tu::pauli_z(), eps, n);
      Mat got = gate::materialize_ring(gate::build_zz_gate(eps), n);
      EXPECT_LT(tu::max_abs(Mat(got - ref)), 1e-12 * ref.cwiseAbs().maxCoeff())
          << "eps=" << eps << " n=" << n;
    }
  }
}

TEST(GateMpo, XxExactOnRings) {
  Mat ref = ring_exp_oracle(tu::pauli_x(), 0.2, 5);
  Mat got = gate::materialize_ring(gate::build_xx_gate(0.2), 5);
  EXPECT_LT(tu::max_abs(Mat(got - ref)), 1e-12 * ref.cwiseAbs().maxCoeff());
}

TEST(GateMpo, TildeYyIsExpMinusYy) {
  // exp(-eps sum YY); kron(Y,Y) is real and squares to 1
  CMat yy = tu::kron(tu::pauli_y(), tu::pauli_y());
  EXPECT_LT(tu::max_abs(CMat(yy.imag().cast<cplx>())), 1e-15);
  Mat h2 = yy.real();
  for (double eps : {0.1, 0.7}) {
    for (int n : {2, 4, 5}) {
      Mat ref = Mat::Identity(1 << n, 1 << n);
      for (int i = 0; i < n; ++i)
        ref = ref * (std::cosh(eps) * Mat::Identity(1 << n, 1 << n) -
                     std::sinh(eps) * tu::bond_at(h2, i, n, true));
      Mat got = gate::materialize_ring(gate::build_tilde_yy_gate(eps), n);
      EXPECT_LT(tu::max_abs(Mat(got - ref)), 1e-12 * ref.cwiseAbs().maxCoeff())
          << "eps=" << eps << " n=" << n;
    }
  }
}

TEST(GateMpo, LocalFieldGate) {
  double eps = 0.15, b = 1.3;
  Mat g1 = (eps * b * tu::pauli_x()).exp();
  Mat ref = Mat::Identity(1, 1);
  for (int i = 0; i < 4; ++i) ref = tu::kron(ref, g1);
  Mat got = gate::materialize_ring(gate::build_local_field_gate(eps, b * tu::pauli_x()), 4);
  EXPECT_LT(tu::max_abs(Mat(got - ref)), 1e-12 * ref.cwiseAbs().maxCoeff());
}

TEST(TrotterPlan, TfiStructure) {
  auto plan = gate::trotter_plan(gate::Model::Tfi, 0.05, 1.0);
  EXPECT_EQ(plan.gates.size(), 2u);
  EXPECT_FALSE(plan.sublattice_rotated);
  Mat zz = tu::kron(tu::pauli_z(), tu::pauli_z());
  EXPECT_LT(tu::max_abs(Mat(plan.bond_term + zz)), 1e-15);
  EXPECT_LT(tu::max_abs(Mat(plan.site_term + tu::pauli_x())), 1e-15);
}

TEST(TrotterPlan, HeisenbergStructure) {
  auto plan = gate::trotter_plan(gate::Model::Heisenberg, 0.05);
  EXPECT_EQ(plan.gates.size(), 3u);
  EXPECT_TRUE(plan.sublattice_rotated);
  Mat expect = -tu::kron(tu::pauli_x(), tu::pauli_x()) -
               tu::kron(tu::pauli_yt(), tu::pauli_yt()) -
               tu::kron(tu::pauli_z(), tu::pauli_z());
  EXPECT_LT(tu::max_abs(Mat(plan.bond_term - expect)), 1e-15);
  ASSERT_EQ(plan.site_term.rows(), 2);
  EXPECT_EQ(tu::max_abs(plan.site_term), 0.0);
}

TEST(TrotterPlan, FirstOrderErrorIsQuadratic) {
  // product of the plan's gate rings vs exp(-eps H_ring): error O(eps^2)
  for (auto model : {gate::Model::Tfi, gate::Model::Heisenberg}) {
    int n = 4;
    double errs[2];
    double epss[2] = {2e-2, 1e-2};
    for (int t = 0; t < 2; ++t) {
      double eps = epss[t];
      double field = model == gate::Model::Tfi ? 0.8 : 0.0;
      auto plan = gate::trotter_plan(model, eps, field);
      Mat h = tu::dense_hamiltonian(plan.bond_term,
                                    plan.site_term.size() ? plan.site_term : Mat(),
                                    n, true);
      Mat ref = (-eps * h).exp();
      Mat got = Mat::Identity(1 << n, 1 << n);
      for (const auto& g : plan.gates) got = gate::materialize_ring(g, n) * got;
      errs[t] = tu::max_abs(Mat(got - ref));
    }
    double ratio = errs[0] / errs[1];
    EXPECT_GT(ratio, 3.0) << "model " << static_cast<int>(model);
    EXPECT_LT(ratio, 5.0) << "model " << static_cast<int>(model);
  }
}

TEST(TrotterPlan, SublatticeRotationPreservesSpectrum) {
  // on even rings the rotated Hamiltonian sum(-XX -YtYt -ZZ) = sum(-XX+YY-ZZ)
  // is unitarily equivalent to the Heisenberg sum(XX+YY+ZZ)
  int n = 4;
  auto plan = gate::trotter_plan(gate::Model::Heisenberg, 0.1);
  Mat rotated = tu::dense_hamiltonian(plan.bond_term, Mat(), n, true);
  CMat y = tu::pauli_y();
  CMat heis = CMat::Zero(1 << n, 1 << n);
  CMat xc = tu::pauli_x().cast<cplx>(), zc = tu::pauli_z().cast<cplx>();
  for (int i = 0; i < n; ++i) {
    int j = (i + 1) % n;
    auto place = [&](const CMat& op, int site) {
      CMat out = CMat::Identity(1, 1);
      for (int s = 0; s < n; ++s)
        out = tu::kron(out, s == site ? op : CMat::Identity(2, 2));
      return out;
    };
    heis += place(xc, i) * place(xc, j) + place(y, i) * place(y, j) + place(zc, i) * place(zc, j);
  }
  Eigen::SelfAdjointEigenSolver<Mat> er(rotated);
  Eigen::SelfAdjointEigenSolver<CMat> eh(heis);
  EXPECT_LT((er.eigenvalues() - eh.eigenvalues()).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(GateMpo, MaterializeRejectsLargeN) {
  EXPECT_THROW(gate::materialize_ring(gate::build_zz_gate(0.1), 13), Error);
}
