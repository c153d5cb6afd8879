#pragma once

#include <optional>
#include <vector>

#include "lrg/operators.hpp"

namespace lrg {

/// Parameters of the regularized propagators: the averaging weight a > 0 and the
/// unit-scale mass mu0 >= 0. c_star selects the mass branch of the strip analysis.
struct MultiscaleParams {
  double a = 1.0;
  double mu0 = 0.0;
  double c_star = 1.0;
};

void validate(const MultiscaleParams& p);

/// a_1 = a, a_{j+1} = a a_j / (a L^{-2} + a_j); entries 1..j_max (index 0 unused, set to 0).
std::vector<double> a_sequence(double a, int L, int j_max);
/// Closed form a (1 - L^{-2}) / (1 - L^{-2j}).
double a_closed_form(double a, int L, int j);
/// a_j computed by the recursion.
double a_j(const MultiscaleParams& p, int L, int j);
/// mu_bar at scale k: L^{2k} mu0.
double mu_bar(const MultiscaleParams& p, int L, int k);

/// -Delta + mu_bar_k + w Q_j^* Q_j on geom, with w the averaging weight.
KernelOperator regularized_operator(const LatticeGeometry& geom, double mass, double weight, int j);
/// -Delta + mu_bar_k + a_k Q_k^* Q_k, the operator inverted by green_neumann.
KernelOperator defining_operator(const LatticeGeometry& geom, const MultiscaleParams& p);

/// G_k(Omega) = (-Delta + mu_bar_k + a_k Q_k^* Q_k)^{-1} with Neumann boundary conditions.
KernelOperator green_neumann(const LatticeGeometry& geom, const MultiscaleParams& p);
/// G^xi_j(Omega) = [-Delta + mu_bar_k + a_j (L^j eta)^{-2} Q_j^* Q_j]^{-1}, 1 <= j <= m.
KernelOperator green_j(const LatticeGeometry& geom, const MultiscaleParams& p, int j);
/// ||G^xi_j - lambda_j^{-2} S^* G_j(lambda_j Omega) S|| / ||G^xi_j||, lambda_j = L^{k-j}.
double green_scaling_residual(const LatticeGeometry& geom, const MultiscaleParams& p, int j);

/// Fluctuation operators of one renormalization step at level j.
///
/// Members marked optional need the next coarse lattice Omega_{j+1} (j + 1 <= m).
/// The *_scaled members live on the rescaled lattice lambda_j Omega (lambda_j = L^{k-j}).
struct RgOperators {
  int j = 0;
  double a_tilde_jj = 0.0;  ///< a_j (L^j eta)^{-2}
  double a_tilde_1j = 0.0;  ///< a (L^j eta)^{-2}
  KernelOperator G_j;       ///< G^xi_j(Omega)
  KernelOperator Delta_j;   ///< Delta^{(j)} on Omega_j
  std::optional<KernelOperator> C_j;     ///< C^{(j)} on Omega_j
  std::optional<KernelOperator> A_j;     ///< A_j on Omega_j, by inversion
  std::optional<KernelOperator> A_j_closed;  ///< A_j from the rank-one closed form
  std::optional<KernelOperator> G_next;  ///< G^xi_{j+1}(Omega)
  KernelOperator H_j;                    ///< a_j G_j(lambda Omega) Q^*, (lambda Omega)_j -> lambda Omega
  KernelOperator Delta_scaled;           ///< Delta_j(lambda_j Omega)
  std::optional<KernelOperator> C_scaled;    ///< C_j(lambda_j Omega)
  std::optional<KernelOperator> C_prime_j;   ///< H_j C_j H_j^* on lambda_j Omega
};

/// Builds the level-j operators, 1 <= j <= k.
RgOperators rg_operators(const LatticeGeometry& geom, const MultiscaleParams& p, int j);

/// Relative Frobenius residual of G^xi_{j+1} = a~_jj^2 G^xi_j Q_j^* C^{(j)} Q_j G^xi_j + G^xi_j.
double rg_step_residual(const LatticeGeometry& geom, const MultiscaleParams& p, int j);

/// ||C^{(j)} - (A_j + a~_jj^2 A_j Q_j G^xi_{j+1} Q_j^* A_j)|| / ||C^{(j)}||.
double c_identity_residual(const RgOperators& ops, const LatticeGeometry& geom);
double c_identity_residual(const LatticeGeometry& geom, const MultiscaleParams& p, int j);

/// ||A_j (by inversion) - A_j (closed form)|| / ||A_j||.
double a_closed_form_residual(const RgOperators& ops);

/// Residuals of the exact scaling identities.
struct ScalingResiduals {
  double de_scaling = 0.0;  ///< Delta^xi = lambda^2 S^* Delta^{lambda xi} S
  double q_scaling = 0.0;   ///< Q_{lambda Omega, j} S = S Q_{Omega, j}
  double g_scaling = 0.0;   ///< G^xi_j = lambda_j^{-2} S^* G_j(lambda_j Omega) S
  double dgc_delta = 0.0;   ///< Delta_j(lambda_j Omega) = lambda_j^{-2} S Delta^{(j)} S^*
  double dgc_c = 0.0;       ///< C_j(lambda_j Omega) = lambda_j^2 S C^{(j)} S^*
  double max() const;
};

/// Evaluates every scaling identity for level j (D-G-C entries need j + 1 <= m).
ScalingResiduals scaling_residuals(const LatticeGeometry& geom, const MultiscaleParams& p, int j);

/// Deterministic test sites: corners, the centre and one interior point per orthant.
std::vector<Site> sample_sites(const LatticeGeometry& geom);

/// The rescaled multiscale sum for G_k(Omega) as a matrix acting on value vectors of Omega.
Matrix telescope_matrix(const LatticeGeometry& geom, const MultiscaleParams& p);
/// ||G_k f - (telescope) f|| / ||G_k f|| for one test field.
double rg_telescope_residual_for_field(const LatticeGeometry& geom, const MultiscaleParams& p, const Field& f);
/// Max of the above over delta fields at sample_sites(geom). Requires k >= 1.
double rg_telescope_residual(const LatticeGeometry& geom, const MultiscaleParams& p);

struct PositivityRow {
  LatticeGeometry geometry;
  double lambda_min = 0.0;      ///< of -Delta + mu_bar_k + a_k Q^*Q
  double lambda_min_ref = 0.0;  ///< of -Delta + 1
  double c = 0.0;               ///< ratio of the two
};

std::vector<PositivityRow> positivity_report(const std::vector<LatticeGeometry>& family, const MultiscaleParams& p);

}  // namespace lrg
