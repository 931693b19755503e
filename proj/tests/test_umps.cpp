#include "mpoforge/umps.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mpoforge/gate_mpo.hpp"
#include "test_util.hpp"

using namespace mpoforge;
namespace tu = testutil;

namespace {

/// psi[s1..sN] = Tr(A^{s1}...A^{sN}), site 0 in the most significant bit to
/// match the kron order of the dense oracles.
Vec ring_vector(const imps::UniformMPS& mps, int n) {
  Vec psi(1L << n);
  for (long idx = 0; idx < psi.size(); ++idx) {
    Mat m = Mat::Identity(mps.bond(), mps.bond());
    for (int i = 0; i < n; ++i) m = m * mps.a[(idx >> (n - 1 - i)) & 1];
    psi(idx) = m.trace();
  }
  return psi;
}

CVec ring_vector_c(const imps::CUniformMPS& mps, int n) {
  CVec psi(1L << n);
  for (long idx = 0; idx < psi.size(); ++idx) {
    CMat m = CMat::Identity(mps.bond(), mps.bond());
    for (int i = 0; i < n; ++i) m = m * mps.a[(idx >> (n - 1 - i)) & 1];
    psi(idx) = m.trace();
  }
  return psi;
}

imps::UniformMPS plus_product() {
  Vec amp(2);
  amp << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  return imps::product_state(amp);
}

imps::UniformMPS zero_product() {
  Vec amp(2);
  amp << 1.0, 0.0;
  return imps::product_state(amp);
}

/// Energy per site of the ring Hamiltonian sum h2(i,i+1) + sum h1(i).
double ring_energy(const imps::UniformMPS& mps, const Mat& h2, const Mat& h1, int n) {
  Vec psi = ring_vector(mps, n);
  Mat h = tu::dense_hamiltonian(h2, h1, n, true);
  return psi.dot(h * psi) / psi.squaredNorm() / n;
}

/// Short imaginary-time run used as a source of realistic pipeline states.
imps::UniformMPS tfi_state(double field, int d, double eps, int sweeps) {
  std::vector<imps::StageConfig> sched{{0.1, 200, 0.0}, {eps, sweeps, 0.0}};
  auto res = imps::ground_state_search(gate::Model::Tfi, field, d, sched);
  return imps::normalize(res.state);
}

}  // namespace

TEST(MeasureBondEnergy, ProductExamples) {
  Mat zz = tu::kron(tu::pauli_z(), tu::pauli_z());
  EXPECT_NEAR(imps::measure_bond_energy(zero_product(), zz, Mat()), 1.0, 1e-14);
  Mat mx = -tu::pauli_x();
  EXPECT_NEAR(imps::measure_bond_energy(plus_product(), zz, mx), -1.0, 1e-14);
  // unnormalized input rejected
  Vec amp(2);
  amp << 2.0, 0.0;
  EXPECT_THROW(imps::measure_bond_energy(imps::product_state(amp), zz, Mat()), Error);
}

TEST(MeasureBondEnergy, MatchesDenseRing) {
  // deep-paramagnet TFI state at D=2: finite-ring corrections decay fast
  imps::UniformMPS s = tfi_state(8.0, 2, 0.05, 300);
  Mat h2 = -tu::kron(tu::pauli_z(), tu::pauli_z());
  Mat h1 = -8.0 * tu::pauli_x();
  double e10 = ring_energy(s, h2, h1, 10);
  double e12 = ring_energy(s, h2, h1, 12);
  ASSERT_LT(std::abs(e10 - e12), 1e-9);  // boundary effects already negligible
  EXPECT_NEAR(imps::measure_bond_energy(s, h2, h1), e10, 1e-8);
}

TEST(Correlation, ProductAndSymmetry) {
  imps::UniformMPS z0 = zero_product();
  for (int r : {1, 3, 5}) EXPECT_NEAR(imps::correlation(z0, tu::pauli_z(), tu::pauli_z(), r), 1.0, 1e-14);
  imps::UniformMPS p = plus_product();
  for (int r : {1, 2}) EXPECT_NEAR(imps::correlation(p, tu::pauli_z(), tu::pauli_z(), r), 0.0, 1e-14);
  EXPECT_THROW(imps::correlation(p, tu::pauli_z(), tu::pauli_z(), 0), Error);
}

TEST(ApplyGate, IdentityGateKeepsState) {
  gate::GateMPO id = gate::build_local_field_gate(0.0, tu::pauli_x());
  imps::UniformMPS s = tfi_state(1.0, 2, 0.05, 100);
  imps::UniformMPS t = imps::apply_gate(s, id);
  ASSERT_EQ(t.bond(), s.bond());  // bond-1 gate: tensor factor is 1x1
  for (int i = 0; i < 2; ++i) EXPECT_LT(tu::max_abs(Mat(t.a[i] - s.a[i])), 1e-14);
}

TEST(ApplyGate, MatchesDenseRing) {
  double eps = 0.3;
  gate::GateMPO zz = gate::build_zz_gate(eps);
  imps::UniformMPS p = plus_product();
  imps::UniformMPS applied = imps::apply_gate(p, zz);
  EXPECT_EQ(applied.bond(), 2);
  for (int n : {3, 4, 6}) {
    Vec ref = gate::materialize_ring(zz, n) * ring_vector(p, n);
    Vec got = ring_vector(applied, n);
    EXPECT_LT((got - ref).cwiseAbs().maxCoeff(), 1e-12) << "n=" << n;
  }
}

TEST(ApplyGate, SuccessiveApplicationsMerge) {
  // exp(a ZZ) exp(b ZZ) = exp((a+b) ZZ): two applications vs the merged gate
  imps::UniformMPS p = plus_product();
  imps::UniformMPS twice =
      imps::apply_gate(imps::apply_gate(p, gate::build_zz_gate(0.2)), gate::build_zz_gate(0.3));
  imps::UniformMPS merged = imps::apply_gate(p, gate::build_zz_gate(0.5));
  Vec a = ring_vector(twice, 4), b = ring_vector(merged, 4);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ApplyGate, RealSymmetricInOut) {
  imps::UniformMPS s = tfi_state(1.0, 4, 0.05, 150);
  imps::UniformMPS t = imps::apply_gate(s, gate::build_zz_gate(0.1));
  for (const Mat& ai : t.a) EXPECT_LT(tu::max_abs(Mat(ai - ai.transpose())), 1e-12);
}

TEST(Truncate, FullRankIsGaugeOnly) {
  imps::UniformMPS s = tfi_state(1.0, 4, 0.02, 300);
  imps::UniformMPS grown = imps::apply_gate(s, gate::build_zz_gate(0.02));
  auto [kept, rep] = imps::truncate(grown, grown.bond());
  EXPECT_EQ(rep.kept, grown.bond());
  EXPECT_NEAR(rep.discarded_weight, 0.0, 1e-12);
  Mat h2 = -tu::kron(tu::pauli_z(), tu::pauli_z());
  Mat h1 = -tu::pauli_x();
  imps::UniformMPS na = imps::normalize(grown), nb = imps::normalize(kept);
  EXPECT_NEAR(imps::measure_bond_energy(na, h2, h1), imps::measure_bond_energy(nb, h2, h1),
              1e-10);
  for (int r = 1; r <= 5; ++r)
    EXPECT_NEAR(imps::correlation(na, tu::pauli_z(), tu::pauli_z(), r),
                imps::correlation(nb, tu::pauli_z(), tu::pauli_z(), r), 1e-10)
        << "r=" << r;
}

TEST(Truncate, ProductRecovery) {
  // trivial gate inflates the bond with a zero block; D_target=1 removes it
  imps::UniformMPS p = plus_product();
  imps::UniformMPS grown = imps::apply_gate(p, gate::build_zz_gate(0.0));
  ASSERT_EQ(grown.bond(), 2);
  auto [back, rep] = imps::truncate(grown, 1);
  EXPECT_EQ(back.bond(), 1);
  EXPECT_NEAR(rep.discarded_weight, 0.0, 1e-13);
  for (int i = 0; i < 2; ++i) EXPECT_NEAR(std::abs(back.a[i](0, 0)), 1.0 / std::sqrt(2.0), 1e-13);
}

TEST(Truncate, CorrelationShiftBoundedByDiscardedWeight) {
  imps::UniformMPS s = tfi_state(1.0, 8, 0.02, 400);
  imps::UniformMPS grown = imps::apply_gate(s, gate::build_zz_gate(0.01));
  auto [ref8, rep8] = imps::truncate(grown, 8);
  auto [cut4, rep4] = imps::truncate(grown, 4);
  EXPECT_GT(rep4.discarded_weight, rep8.discarded_weight);
  imps::UniformMPS a = imps::normalize(ref8), b = imps::normalize(cut4);
  // empirical scale: correlation shifts track sqrt(discarded weight)
  const double bound = 20.0 * std::sqrt(rep4.discarded_weight) + 1e-10;
  for (int r = 1; r <= 5; ++r) {
    double ca = imps::correlation(a, tu::pauli_z(), tu::pauli_z(), r);
    double cb = imps::correlation(b, tu::pauli_z(), tu::pauli_z(), r);
    EXPECT_LT(std::abs(ca - cb), bound) << "r=" << r;
  }
}

TEST(Truncate, RejectsNonSymmetric) {
  imps::UniformMPS s;
  s.a = {Mat::Identity(2, 2), (Mat(2, 2) << 0, 1, 0, 0).finished()};
  EXPECT_THROW(imps::truncate(s, 2), Error);
}

TEST(Normalize, Examples) {
  std::mt19937 rng(7);
  imps::UniformMPS s;
  s.a = {tu::random_symmetric(4, rng), tu::random_symmetric(4, rng)};
  imps::UniformMPS n1 = imps::normalize(s);
  // post: leading transfer eigenvalue 1 (dense recompute)
  Mat e0 = Mat::Zero(16, 16);
  for (const Mat& ai : n1.a) e0 += tu::kron(ai, ai);
  CVec ev = e0.eigenvalues();
  double lead = ev.cwiseAbs().maxCoeff();
  EXPECT_NEAR(lead, 1.0, 1e-12);
  // already normalized: unchanged
  imps::UniformMPS n2 = imps::normalize(n1);
  for (int i = 0; i < 2; ++i) EXPECT_LT(tu::max_abs(Mat(n2.a[i] - n1.a[i])), 1e-14);
  // scaling by 3 is undone exactly
  imps::UniformMPS scaled = s;
  for (auto& ai : scaled.a) ai *= 3.0;
  imps::UniformMPS n3 = imps::normalize(scaled);
  for (int i = 0; i < 2; ++i) EXPECT_LT(tu::max_abs(Mat(n3.a[i] - n1.a[i])), 1e-13);
}

TEST(RealSymmetricClosure, ShortPipeline) {
  imps::UniformMPS s = plus_product();
  for (int cycle = 0; cycle < 10; ++cycle) {
    s = imps::apply_gate(s, gate::build_zz_gate(0.05));
    s = imps::apply_gate(s, gate::build_local_field_gate(0.05, tu::pauli_x()));
    if (s.bond() > 6) s = imps::truncate(s, 6).first;
    s = imps::normalize(s);
    for (const Mat& ai : s.a)
      ASSERT_LT(tu::max_abs(Mat(ai - ai.transpose())), 1e-12) << "cycle " << cycle;
  }
}

TEST(Gauge, RealInputIsIdentity) {
  std::mt19937 rng(11);
  Mat x = tu::random_symmetric(4, rng);
  auto rep = imps::gauge_condition(x.cast<cplx>());
  EXPECT_LT((rep.q - CMat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(rep.ratio_after, rep.ratio_before, 1e-12);
}

TEST(Gauge, ImprovesComplexDiagonal) {
  CMat x = CMat::Zero(2, 2);
  x(0, 0) = 1.0;
  x(1, 1) = cplx(0, 1);
  auto rep = imps::gauge_condition(x);
  EXPECT_GE(rep.ratio_after, rep.ratio_before - 1e-14);
  EXPECT_LT((rep.q * rep.q.transpose() - CMat::Identity(2, 2)).cwiseAbs().maxCoeff(), 1e-10);
  // accumulation: x' = Q x Q^T, the symmetry-preserving complex-orthogonal action
  CMat xprime = rep.q * x * rep.q.transpose();
  EXPECT_LT((xprime - rep.x).cwiseAbs().maxCoeff(), 1e-9);
  // x' stays complex symmetric
  EXPECT_LT((rep.x - rep.x.transpose()).cwiseAbs().maxCoeff(), 1e-11);
}

TEST(Gauge, OrthogonalityOnRandomSymmetric) {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    CMat m = tu::random_cmatrix(5, 5, rng);
    CMat x = 0.5 * (m + m.transpose());
    auto rep = imps::gauge_condition(x);
    EXPECT_LT((rep.q * rep.q.transpose() - CMat::Identity(5, 5)).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_GE(rep.ratio_after, rep.ratio_before - 1e-14);
  }
}

TEST(ComplexTruncate, FullRankGaugePreservesTraces) {
  // complex-orthogonal projector: ring traces are exactly gauge invariant
  imps::UniformMPS s = tfi_state(1.0, 3, 0.05, 200);
  imps::CUniformMPS cs;
  const cplx phase = std::exp(cplx(0, 0.7));
  for (const Mat& ai : s.a) cs.a.push_back(phase * ai.cast<cplx>());
  auto [kept, rep] = imps::truncate(cs, 3);
  EXPECT_EQ(rep.kept, 3);
  CVec a = ring_vector_c(cs, 4), b = ring_vector_c(kept, 4);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(GroundState, TfiZeroFieldProductLimit) {
  std::vector<imps::StageConfig> sched{{0.1, 60, 0.0}};
  auto res = imps::ground_state_search(gate::Model::Tfi, 0.0, 1, sched);
  EXPECT_NEAR(res.energy_measured, -1.0, 1e-12);
  EXPECT_EQ(res.state.bond(), 1);
  EXPECT_TRUE(res.converged);
}

TEST(GroundState, MonotoneWithinStageAndVariationalSanity) {
  std::vector<imps::StageConfig> sched{{0.1, 150, 0.0}, {0.05, 150, 0.0}, {0.02, 200, 0.0}};
  auto r2 = imps::ground_state_search(gate::Model::Tfi, 1.0, 2, sched);
  auto r1 = imps::ground_state_search(gate::Model::Tfi, 1.0, 1, sched);
  EXPECT_LE(r2.energy_measured, r1.energy_measured + 1e-12);
  // energy non-increasing within each stage up to 1e-10 slack
  for (std::size_t i = 1; i < r2.trace.size(); ++i) {
    if (r2.trace[i].epsilon != r2.trace[i - 1].epsilon) continue;
    EXPECT_LE(r2.trace[i].energy, r2.trace[i - 1].energy + 1e-10) << "sweep " << i;
  }
  // trace numbering is contiguous
  for (std::size_t i = 0; i < r2.trace.size(); ++i)
    ASSERT_EQ(r2.trace[i].sweep, static_cast<int>(i) + 1);
}

TEST(GroundState, GappedExtrapolationHitsReference) {
  // TFI B=1.5 closed form: e = -(1/pi) int_0^pi sqrt(1+B^2-2B cos k) dk
  const double e_ref = -1.671926221536195;
  std::vector<imps::StageConfig> sched{{0.1, 800, 0.0},  {0.05, 1000, 0.0}, {0.02, 2000, 0.0},
                                       {0.01, 3000, 0.0}, {0.005, 4000, 0.0}};
  for (auto& st : sched) st.tol = 1e-5 * st.epsilon * st.epsilon;
  auto res = imps::ground_state_search(gate::Model::Tfi, 1.5, 8, sched);
  ASSERT_EQ(res.stages.size(), sched.size());
  EXPECT_TRUE(res.extrapolated);
  EXPECT_LT(std::abs(res.energy - e_ref) / std::abs(e_ref), 1e-6);
  // the raw final-stage energy still carries its Trotter bias
  EXPECT_GT(std::abs(res.energy_measured - e_ref) / std::abs(e_ref),
            std::abs(res.energy - e_ref) / std::abs(e_ref));
}

TEST(GroundState, AbortsWhenEnergyCannotDecrease) {
  // eps = 0 gates are exact identities: the energy never moves, which the
  // driver must flag as a failed stage (tol 0 resolves to 0.1 eps^2 = 0)
  std::vector<imps::StageConfig> sched{{0.0, 10, 0.0}};
  auto res = imps::ground_state_search(gate::Model::Tfi, 1.0, 4, sched);
  EXPECT_FALSE(res.converged);
  EXPECT_FALSE(res.diagnostic.empty());
}
