#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "mpoforge/gate_mpo.hpp"
#include "mpoforge/types.hpp"

namespace mpoforge::imps {

/// Translationally invariant MPS, one bond matrix per physical symbol.
/// The imaginary-time pipeline keeps every A^i real symmetric; the real-time
/// variants are complex symmetric. Both share one templated implementation.
template <class S>
struct BasicUniformMPS {
  using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
  std::vector<Matrix> a;

  static constexpr ScalarKind kind =
      std::is_same_v<S, double> ? ScalarKind::Real : ScalarKind::Complex;
  int d() const { return static_cast<int>(a.size()); }
  int bond() const { return a.empty() ? 0 : static_cast<int>(a[0].rows()); }
};

using UniformMPS = BasicUniformMPS<double>;
using CUniformMPS = BasicUniformMPS<cplx>;

/// D=1 product state with the given per-symbol amplitudes.
UniformMPS product_state(const Vec& amplitudes);

/// A'^i = sum_jk A^j (x) B^k <i|X^k|j>; exact, bond D*chi.
template <class S>
BasicUniformMPS<S> apply_gate(const BasicUniformMPS<S>& mps, const gate::GateMPO& g);

struct TruncationReport {
  int kept = 0;
  double discarded_weight = 0;  ///< 1 - kept spectral weight of x, in [0,1]
  double transfer_value = 0;    ///< leading eigenvalue of E = sum C (x) C
  int eig_iterations = 0;
};

/// Truncate to d_target via the dominant eigenvectors of the symmetrized
/// transfer fixed point x. The complex-symmetric case uses the spectral
/// basis of x normalized to w^T w = 1, so the projector is complex
/// orthogonal and a full-rank truncation is a gauge transformation.
/// warm, when non-null, carries the previous vec(x) as the eigensolve start
/// and receives the new one; mismatched sizes are ignored.
std::pair<UniformMPS, TruncationReport> truncate(const UniformMPS& mps, int d_target,
                                                 Vec* warm = nullptr);
std::pair<CUniformMPS, TruncationReport> truncate(const CUniformMPS& mps, int d_target,
                                                  CVec* warm = nullptr);

/// Divide A by sqrt(leading eigenvalue of E0) so that eigenvalue becomes 1.
template <class S>
BasicUniformMPS<S> normalize(const BasicUniformMPS<S>& mps, double* value_out = nullptr);

/// Energy density from the E0 fixed points: <h2> on a bond plus <h1> on a
/// site. Requires a normalized state (leading transfer eigenvalue 1).
double measure_bond_energy(const UniformMPS& mps, const Mat& two_site_term,
                           const Mat& one_site_term);

/// <Z_0 Z_r> style two-point function along the chain, r >= 1.
double correlation(const UniformMPS& mps, const Mat& op0, const Mat& opr, int r);

/// Gauge conditioning for complex symmetric x: find complex orthogonal Q
/// (Q Qt = 1) making the singular-value ratio sigma_min/sigma_max of
/// x' = Q x Qt as large as possible. Steps use the generator
/// G = Im(v1 v1^dag - vD vD^dag) from the SVD of x; each accepted factor
/// exp(i eps G) multiplies into Q. Real input returns Q = identity.
struct GaugeReport {
  CMat q;
  CMat x;
  double ratio_before = 0;
  double ratio_after = 0;
  int steps = 0;
};
GaugeReport gauge_condition(const CMat& x, double eps0 = 0.05, int max_iter = 500);

struct StageConfig {
  double epsilon = 0;
  int max_sweeps = 0;
  double tol = 0;  ///< stage advances when |delta e| < tol; 0 means 0.1 eps^2
};

struct SweepRecord {
  int sweep = 0;  ///< global sweep counter across stages
  double epsilon = 0;
  int bond = 0;
  double energy = 0;
  double discarded = 0;
};

/// Stage summary: the energy a stage settled at, used for the eps -> 0 fit.
struct StageSummary {
  double epsilon = 0;
  double energy = 0;       ///< Aitken in-stage limit of the relaxation tail
  double energy_raw = 0;   ///< last measured energy of the stage
  int sweeps = 0;
  bool converged = false;  ///< |delta e| < tol reached before the sweep cap
};

struct GroundStateResult {
  UniformMPS state;
  double energy = 0;           ///< best estimate: extrapolated when available
  double energy_measured = 0;  ///< raw energy of the returned state
  bool extrapolated = false;
  bool converged = false;
  int total_sweeps = 0;
  std::vector<StageSummary> stages;
  std::vector<SweepRecord> trace;
  std::string diagnostic;
};

/// Default cascade 0.1 -> eps_final (1-2-5 ladder). Converged stage energies
/// scale as e(eps) = e0 + c2 eps^2 + ..., so the driver fits that expansion
/// over the final stages and reports the eps -> 0 intercept; the default
/// ladder can therefore stop well above the naive eps ~ sqrt(target) point.
/// Sweep caps implement a fixed imaginary-time budget per stage (sweeps =
/// beta/eps); stage tolerances are tightened far below the Trotter bias so
/// the fit sees relaxed energies.
std::vector<StageConfig> default_schedule(double eps_final = 2.5e-3);

/// Imaginary-time ground-state driver: per stage, sweep the TrotterPlan
/// gates with truncation to d_max and record the energy each sweep. Aborts
/// with a diagnostic if a stage never lowers the energy.
GroundStateResult ground_state_search(
    gate::Model model, double field, int d_max, const std::vector<StageConfig>& schedule,
    const std::function<void(const SweepRecord&)>& on_sweep = nullptr);

}  // namespace mpoforge::imps
