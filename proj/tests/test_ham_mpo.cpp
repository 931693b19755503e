#include "mpoforge/ham_mpo.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "test_util.hpp"

using namespace mpoforge;
namespace tu = testutil;

namespace {

CMat cplace(const CMat& op, int i, int n) {
  CMat out = CMat::Identity(1, 1);
  for (int s = 0; s < n; ++s) out = tu::kron(out, s == i ? op : CMat::Identity(2, 2));
  return out;
}

// H = sum_{i, r>=1} sum_channels J_c(r) O_i O_{i+r} + sum_i field, open chain
Mat long_range_oracle(const std::vector<CMat>& ops,
                      const std::vector<std::function<double(int)>>& coupling, const Mat& field,
                      int n) {
  CMat h = CMat::Zero(1 << n, 1 << n);
  for (std::size_t c = 0; c < ops.size(); ++c)
    for (int i = 0; i < n; ++i)
      for (int r = 1; i + r < n; ++r) {
        double j = coupling[c](r);
        if (j == 0.0) continue;
        h += j * (cplace(ops[c], i, n) * cplace(ops[c], i + r, n));
      }
  if (field.size() > 0 && field.cwiseAbs().maxCoeff() > 0)
    for (int i = 0; i < n; ++i) h += cplace(field.cast<cplx>(), i, n);
  EXPECT_LT(tu::max_abs(CMat(h.imag().cast<cplx>())), 1e-13 * (1 + tu::max_abs(h)));
  return h.real();
}

}  // namespace

TEST(HamMpo, NnMatchesExplicitSum) {
  Mat field = 0.3 * tu::pauli_x() + 0.1 * tu::pauli_z();
  auto h = ham::build_nn_mpo({0.7, -0.4, 1.1}, field);
  EXPECT_EQ(h.bond(), 5);
  std::vector<CMat> ops = {tu::pauli_x().cast<cplx>(), tu::pauli_y(),
                           tu::pauli_z().cast<cplx>()};
  auto nn = [](double mu) {
    return [mu](int r) { return r == 1 ? mu : 0.0; };
  };
  for (int n : {2, 4, 6, 8}) {
    Mat ref = long_range_oracle(ops, {nn(0.7), nn(-0.4), nn(1.1)}, field, n);
    Mat got = ham::materialize_finite(h, n);
    EXPECT_LT(tu::max_abs(Mat(got - ref)), 1e-12 * (1 + tu::max_abs(ref))) << "n=" << n;
  }
}

TEST(HamMpo, IsingMatchesExplicitSum) {
  auto h = ham::build_ising_mpo(-1.0, Mat::Zero(2, 2));
  EXPECT_EQ(h.bond(), 3);
  for (int n : {2, 5}) {
    Mat ref = long_range_oracle({tu::pauli_z().cast<cplx>()},
                                {[](int r) { return r == 1 ? -1.0 : 0.0; }}, Mat(), n);
    EXPECT_LT(tu::max_abs(Mat(ham::materialize_finite(h, n) - ref)), 1e-12);
  }
}

TEST(HamMpo, ExpDecayMatchesExplicitSum) {
  std::array<double, 3> mu = {0.5, 0.25, -0.8};
  std::array<double, 3> lam = {0.6, 0.3, 0.45};
  Mat field = 0.2 * tu::pauli_x();
  auto h = ham::build_expdecay_mpo(mu, lam, field);
  std::vector<CMat> ops = {tu::pauli_x().cast<cplx>(), tu::pauli_y(),
                           tu::pauli_z().cast<cplx>()};
  std::vector<std::function<double(int)>> coup;
  for (int c = 0; c < 3; ++c)
    coup.push_back([mu, lam, c](int r) { return mu[c] * std::pow(lam[c], r - 1); });
  for (int n : {2, 4, 7}) {
    Mat ref = long_range_oracle(ops, coup, field, n);
    Mat got = ham::materialize_finite(h, n);
    EXPECT_LT(tu::max_abs(Mat(got - ref)), 1e-12 * (1 + tu::max_abs(ref))) << "n=" << n;
  }
  EXPECT_THROW(ham::build_expdecay_mpo(mu, {1.0, 0.3, 0.4}, field), Error);
}

TEST(HamMpo, RealizedCoupling) {
  auto h = ham::build_expdecay_mpo({0.5, 0.0, 0.0}, {0.6, 0.5, 0.5}, Mat::Zero(2, 2));
  for (int r = 1; r <= 6; ++r)
    EXPECT_NEAR(ham::realized_coupling(h, 1, r), 0.5 * std::pow(0.6, r - 1), 1e-13);

  auto nn = ham::build_nn_mpo({1.0, 0.0, 0.0}, Mat::Zero(2, 2));
  EXPECT_NEAR(ham::realized_coupling(nn, 1, 1), 1.0, 1e-14);
  EXPECT_NEAR(ham::realized_coupling(nn, 1, 2), 0.0, 1e-14);
  EXPECT_NEAR(ham::realized_coupling(nn, 1, 5), 0.0, 1e-14);
}

TEST(HamMpo, PowerLawCouplingTracksTarget) {
  auto h = ham::build_powerlaw_mpo(3.0, 8, 400, tu::pauli_z());
  EXPECT_EQ(h.bond(), 10);
  for (int r = 1; r <= 30; ++r) {
    double target = std::pow(r, -3.0);
    EXPECT_NEAR(ham::realized_coupling(h, 1, r), target, 1e-6 + 1e-4 * target) << "r=" << r;
  }
  // materialization against the realized couplings themselves is exact
  std::vector<std::function<double(int)>> coup = {
      [&](int r) { return ham::realized_coupling(h, 1, r); }};
  for (int n : {4, 6}) {
    Mat ref = long_range_oracle({tu::pauli_z().cast<cplx>()}, coup, Mat(), n);
    EXPECT_LT(tu::max_abs(Mat(ham::materialize_finite(h, n) - ref)), 1e-12);
  }
}

TEST(HamMpo, SchmidtRanks) {
  // the paper's D=5 (generic nn) and D=3 (Ising-type) optimality claims
  auto nn = ham::build_nn_mpo({0.9, 0.7, 1.2}, 0.4 * tu::pauli_x());
  Mat dense_nn = ham::materialize_finite(nn, 6);
  EXPECT_EQ(ham::operator_schmidt_rank(dense_nn, 6, 3), 5);

  auto ising = ham::build_ising_mpo(1.0, 0.6 * tu::pauli_x());
  Mat dense_ising = ham::materialize_finite(ising, 6);
  EXPECT_EQ(ham::operator_schmidt_rank(dense_ising, 6, 3), 3);
}

TEST(HamMpo, SiteShift) {
  auto h = ham::build_ising_mpo(0.8, 0.1 * tu::pauli_x());
  auto shifted = ham::with_site_shift(h, -0.35);
  for (int n : {3, 5}) {
    Mat a = ham::materialize_finite(h, n);
    Mat b = ham::materialize_finite(shifted, n);
    EXPECT_LT(tu::max_abs(Mat(b - a + 0.35 * n * Mat::Identity(1 << n, 1 << n))), 1e-12);
  }
}

TEST(HamMpo, BoundaryMarkers) {
  auto h = ham::build_nn_mpo({1, 1, 1}, Mat::Zero(2, 2));
  EXPECT_EQ(h.start, 0);
  EXPECT_EQ(h.stop, 4);
  EXPECT_EQ(h.v_left(h.start), 1.0);
  EXPECT_EQ(h.v_right(h.stop), 1.0);
  EXPECT_NEAR(h.v_left.sum(), 1.0, 1e-15);
  EXPECT_NEAR(h.v_right.sum(), 1.0, 1e-15);
  EXPECT_FALSE(h.real_ops());
  auto ising = ham::build_ising_mpo(1.0, Mat::Zero(2, 2));
  EXPECT_TRUE(ising.real_ops());
}
