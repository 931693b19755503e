#pragma once

#include <string>
#include <vector>

#include "mpoforge/types.hpp"

namespace mpoforge::gate {

/// Translationally invariant gate MPO: the ring operator on N sites is
///   sum_{k1..kN} Tr(C^{k1}...C^{kN}) X^{k1} (x) ... (x) X^{kN}.
/// All builders here produce real symmetric C^k.
struct GateMPO {
  std::vector<Mat> site;      ///< C^k, one per symbol, bond x bond
  std::vector<Mat> op_basis;  ///< X^k, 2x2 real
  double epsilon = 0;
  std::string label;

  int bond() const { return site.empty() ? 0 : static_cast<int>(site[0].rows()); }
  int symbols() const { return static_cast<int>(site.size()); }
};

/// exp(eps sum_i Z_i Z_{i+1}); eps >= 0 keeps sqrt(sinh) real.
GateMPO build_zz_gate(double eps);

/// Same bond matrices over the {1, X} basis: exp(eps sum_i X_i X_{i+1}).
GateMPO build_xx_gate(double eps);

/// exp(-eps sum_i Y_i Y_{i+1}) over the real basis {1, Yt = iY}.
GateMPO build_tilde_yy_gate(double eps);

/// Bond-1 gate for the on-site factor prod_i exp(eps * op); op 2x2 real.
GateMPO build_local_field_gate(double eps, const Mat& op);

enum class Model { Tfi, Heisenberg };

/// One first-order Trotter step of exp(-eps H). For the Heisenberg model the
/// gates act in the sublattice-rotated frame (Y on every second site flips the
/// sign of the XX and ZZ couplings); the rotation is recorded, never applied
/// to states, and the measurement terms below already live in that frame.
struct TrotterPlan {
  Model model = Model::Tfi;
  double epsilon = 0;
  double field = 0;  ///< TFI transverse field B
  bool sublattice_rotated = false;
  std::vector<GateMPO> gates;
  Mat bond_term;  ///< 4x4 two-site measurement term
  Mat site_term;  ///< 2x2 per-site measurement term
};

/// model Tfi: H = -sum ZZ - B sum X, plan [zz(eps), field(eps*B*X)].
/// model Heisenberg: H = sum (XX+YY+ZZ), plan [zz, xx, tilde-yy] at eps.
TrotterPlan trotter_plan(Model model, double eps, double field = 0);

/// Dense 2^N x 2^N ring operator from the trace formula. N <= 12.
Mat materialize_ring(const GateMPO& g, int n_sites);

/// Pauli matrices (real where possible) used across the builders.
Mat pauli_x();
Mat pauli_z();
Mat pauli_yt();  ///< iY = [[0,1],[-1,0]]
CMat pauli_y();

}  // namespace mpoforge::gate
