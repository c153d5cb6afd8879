#pragma once

#include <cstdint>
#include <vector>

#include "lrg/multiscale.hpp"

namespace lrg {

/// Multiplication by e^{q . x} (x in physical units) as an operator on geom.
KernelOperator exponential_weight(const LatticeGeometry& geom, const std::vector<double>& q);

/// e^{-q.x} A e^{q.x'} at kernel level; q = 0 returns A unchanged.
KernelOperator conjugate(const KernelOperator& A, const std::vector<double>& q);

/// D_q = e_{-q} [-Delta + mu_bar_k + a_k Q_k^* Q_k] e_q.
KernelOperator conjugated_operator(const LatticeGeometry& geom, const MultiscaleParams& p, const std::vector<double>& q);

/// Default scan grid along the first axis.
std::vector<double> default_q_grid();

struct CtRow {
  std::vector<double> q;
  double min_singular_value = 0.0;  ///< of D_q
  double bound_constant = 0.0;      ///< ||e_{-q} G_k(Omega) e_q||_2
  double coercivity = 0.0;          ///< min eigenvalue of (D_q + D_q^*) / 2
  double inverse_defect = 0.0;      ///< ||D_q^{-1} - e_{-q} G e_q|| / ||e_{-q} G e_q||
};

struct CtReport {
  std::vector<CtRow> rows;
  double max_violation = 0.0;  ///< max inverse_defect over q
  double c1 = 0.0;  ///< least-squares rate of the unit-box block norms of G_k(Omega)
  double c1_log_prefactor = 0.0;
  double random_constant = 0.0;  ///< max |<f, G f'>| e^{c1 |y - y'|} / (||f|| ||f'||) over seeded fields
  std::uint64_t seed = 0;
};

/// Conjugated norms for every q in q_list plus the unit-box decay constant c1.
CtReport ct_bound_report(const LatticeGeometry& geom, const MultiscaleParams& p,
                         const std::vector<std::vector<double>>& q_list, std::uint64_t seed = 20240601);

struct SourceSpec {
  enum class Kind { site, block };
  Kind kind = Kind::site;
  Site where;  ///< site of geom, or block label in Omega_k; empty means the origin corner
};

struct ProfilePoint {
  double distance = 0.0;
  double magnitude = 0.0;
};

/// |(G_k(Omega) f)(x)| against dist(x, supp f) for every site, f the indicator of the source.
std::vector<ProfilePoint> decay_profile(const LatticeGeometry& geom, const MultiscaleParams& p,
                                        const SourceSpec& source = {});

/// Largest magnitude at each distinct distance (distances merged at 1e-9), ascending.
std::vector<ProfilePoint> envelope(const std::vector<ProfilePoint>& profile);

struct DecayWindow {
  double min = 1.0;           ///< smallest distance used
  double max_fraction = 0.8;  ///< largest distance used, as a fraction of the farthest point
};

struct DecayFit {
  double log_prefactor = 0.0;
  double rate = 0.0;
  double d_min = 0.0, d_max = 0.0;
  double rms_residual = 0.0;
  int point_count = 0;
};

/// Ordinary least squares of log(magnitude) on distance inside the window; rate = -slope.
DecayFit fit_decay(const std::vector<ProfilePoint>& profile, const DecayWindow& window = {});

struct LinfRow {
  LatticeGeometry geometry;
  DecayFit fit;
  double max_ratio = 0.0;  ///< max_x |(Gf)(x)| / (e^{-rate dist} ||f||_inf)
};

/// Site-source envelope fits for each geometry of the family.
std::vector<LinfRow> linf_report(const std::vector<LatticeGeometry>& family, const MultiscaleParams& p,
                                 const DecayWindow& window = {});

/// |r1 - r2| / min(r1, r2).
double rate_drift(double r1, double r2);

}  // namespace lrg
