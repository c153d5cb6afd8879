#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "lrg/multiscale.hpp"

namespace lrg {

using ZVec = std::vector<cplx>;
using RVec = std::vector<double>;

/// Uniform periodic grid on the torus [-pi/eta, pi/eta)^d with M points per axis.
///
/// The grid is handled as a reduced momentum p in [-pi, pi)^d (M / L^k points per axis)
/// times the (L^k)^d shifts p + 2 pi ell, ell in [-(L^k-1)/2, (L^k-1)/2]^d.
struct TorusGrid {
  int d = 1;
  int L = 3;
  int k = 1;
  int M = 24;

  int blocks_per_axis() const;  ///< L^k
  int reduced_per_axis() const; ///< M / L^k
  double spacing() const;       ///< eta
  std::size_t point_count() const;
};

/// Validated constructor: M a multiple of L^k and M >= 4 L^k.
TorusGrid make_torus_grid(int d, int L, int k, int M);

class PoleProximityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class StripViolationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class QuadratureConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sin(z)/z with the series near zero.
cplx sinc(cplx z);

/// (4/eta^2)[sum_mu sin^2(z_mu eta/2) + mu0/4].
cplx laplacian_symbol(const ZVec& z, double eta, double mu0);
/// eta^d prod (1 - e^{-i z})/(1 - e^{-i z eta}); removable zeros handled analytically.
cplx u_kernel(const ZVec& z, double eta);
/// u(z + 2 pi ell') / Delta(z + 2 pi ell'); throws PoleProximityError near a genuine pole.
cplx u_delta(const ZVec& z, const std::vector<int>& ell, double eta, double mu0);
/// u_Delta in the sin-product form with the phase and sine ratios kept separate.
cplx u_delta_product_form(const ZVec& z, const std::vector<int>& ell, double eta, double mu0);
/// sum over the (L^k)^d shifts of u(z + 2 pi ell) u(-(z + 2 pi ell)) / Delta(z + 2 pi ell).
cplx bracket(const ZVec& z, int L, int k, double mu0);

/// Box of shifts ell in [-(L^k-1)/2, (L^k-1)/2]^d, row-major, axis 0 slowest.
std::vector<std::vector<int>> shift_box(int d, int L, int k);

/// The averaging weight a_k used on the free lattice (a itself for k = 0).
double free_weight(const MultiscaleParams& p, int L, int k);

/// Solves (-Delta + mu_bar_k + a_k Q_k^* Q_k) v = f in momentum space.
/// Input and output are samples on every torus grid point, row-major over the full grid
/// index I in [0, M)^d with P_I = -pi/eta + 2 pi I / (eta M).
std::vector<cplx> free_apply_ghat(const std::vector<cplx>& f_hat, const TorusGrid& grid, const MultiscaleParams& p);
/// Applies the symbol of (-Delta + mu_bar_k + a_k Q_k^* Q_k) to torus samples.
std::vector<cplx> free_apply_symbol(const std::vector<cplx>& v_hat, const TorusGrid& grid, const MultiscaleParams& p);
/// Torus momentum of full-grid multi-index I.
RVec torus_point(const TorusGrid& grid, const std::vector<int>& I);

/// Free-lattice kernels by trapezoidal quadrature over the reduced torus.
///
/// Sites are integer multi-indices in units of eta (for G) or, for the second argument
/// of G Q^*, integer points of the unit lattice. `shift_q` moves the contour to p + i q.
class FreeKernel {
 public:
  FreeKernel(int d, int L, int k, const MultiscaleParams& p);

  int d() const { return d_; }
  int L() const { return L_; }
  int k() const { return k_; }
  double spacing() const { return eta_; }

  /// G_k(x, y) for each pair at fixed reduced resolution Mc = M / L^k.
  std::vector<cplx> g_values(const std::vector<std::pair<Site, Site>>& pairs, int Mc, const RVec& shift_q) const;
  /// (G_k Q_k^*)(x, y) with x in eta Z^d, y in Z^d.
  std::vector<cplx> gq_values(const std::vector<std::pair<Site, Site>>& pairs, int Mc, const RVec& shift_q) const;

  struct Converged {
    std::vector<cplx> values;
    int M = 0;  ///< full-torus points per axis of the accepted resolution
  };
  /// Doubles M from M_init until every value changes by at most tol relative
  /// (plus an absolute floor of 1e-14 times the largest value in the batch).
  Converged g_converged(const std::vector<std::pair<Site, Site>>& pairs, const RVec& shift_q, int M_init = 0,
                        double tol = 1e-8) const;
  Converged gq_converged(const std::vector<std::pair<Site, Site>>& pairs, const RVec& shift_q, int M_init = 0,
                         double tol = 1e-8) const;

 private:
  struct FiberData;
  FiberData fiber(const ZVec& z) const;
  ZVec reduced_point(const std::vector<int>& i, int Mc, const RVec& shift_q) const;

  int d_, L_, k_;
  double eta_, a_, mu0_;
  std::vector<std::vector<int>> box_;
  std::size_t zero_;  ///< position of ell = 0 in box_
};

/// Single-value conveniences over FreeKernel (converged quadrature).
cplx free_kernel_g(const Site& x, const Site& y, const TorusGrid& grid, const MultiscaleParams& p,
                   const RVec& shift_q = {});
cplx free_kernel_gq(const Site& x, const Site& y, const TorusGrid& grid, const MultiscaleParams& p,
                    const RVec& shift_q = {});

/// Relative max-norm discrepancy between Q_k^* Q_k f computed by exact block means on the
/// patch and by the momentum-space formula. The patch lattice is block-aligned and f must
/// vanish on its outermost layer of blocks. M = 0 picks an exact resolution.
double qkqk_fourier_residual(const Field& f, int M = 0);

/// Factored H(z) = H1 H2 H3 for one shift ell'.
struct HValue {
  cplx H, H1, H2, H3;
  bool large_mass = false;
  double floor_ratio = 0.0;  ///< |F~(z)| (large mass) or |F(z)| / F(Re z) (small mass)
};

inline constexpr double kStripFloor = 0.1;

/// Evaluates H without forming 0/0; throws StripViolationError when the denominator
/// falls below kStripFloor in the monitored normalization.
HValue h_function(const ZVec& z, const std::vector<int>& ell, int d, int L, int k, const MultiscaleParams& p);

struct StripBoundReport {
  int d = 1, L = 3, k = 1;
  double q_max = 0.05;
  int p_samples = 0;
  std::vector<std::vector<int>> shifts;
  std::vector<double> weighted_sup;  ///< per shift: sup |H| prod (1 + |ell'_mu|)^{1 + 2/d}
  double overall_sup = 0.0;
  ZVec argmax_z;
  std::vector<int> argmax_shift;
  double min_floor_ratio = 0.0;
  bool large_mass = false;
};

/// Samples p on a midpoint grid of (-pi, pi)^d and q in {0, +-q_max e_mu, q_max (+-1,...)/sqrt(d)}.
StripBoundReport strip_bound_report(int d, int L, int k, const MultiscaleParams& p, double q_max, int p_samples);

struct TechnicalBoundRow {
  std::string lemma;
  std::string quantity;
  int k = 0;  ///< 0 when the bound does not involve the lattice spacing
  double value = 0.0;      ///< worst case over the grid
  double claimed = 0.0;    ///< the explicit side of the bound, when the lemma states one
  bool lower_bound = true; ///< true if value must be >= claimed
};

/// Grid worst cases of the technical symbol bounds at resolution n per direction.
std::vector<TechnicalBoundRow> technical_bounds_report(int n);

}  // namespace lrg
