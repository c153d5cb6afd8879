#pragma once

#include <stdexcept>
#include <vector>

#include "lrg/fourier.hpp"

namespace lrg {

/// Partial image sum with its tail diagnostics.
struct ImageSumResult {
  cplx value = 0.0;
  int shells_used = 0;
  double last_shell_contribution = 0.0;  ///< sum of |terms| over images with max_mu |j_mu| = shells
  double truncation_estimate = 0.0;      ///< geometric tail c_s r / (1 - r), r = (c_s / c_1)^{1/(s-1)}
};

/// Raised when the mean per-shell ratio exceeds kMaxShellRatio.
class NonDecayingImagesError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMaxShellRatio = 0.9;

/// Builds the diagnostics from per-shell sums and absolute sums (index 0 is the box itself).
ImageSumResult summarize_shells(const std::vector<cplx>& shell_sum, const std::vector<double>& shell_abs);

/// G_k(Omega)(x, y) as the sum of free kernels G_k(x, y_j) over the images of y.
ImageSumResult neumann_kernel_via_images(const LatticeGeometry& geom, const MultiscaleParams& p, const Site& x,
                                         const Site& y, int shells, int M_init = 0);

/// (G_k(Omega) Q_k^*)(x, y) for x in Omega and a block label y in Omega_k, as the sum of free
/// (G_k Q_k^*)(x_j, y) over the images of x.
ImageSumResult gq_kernel_via_images(const LatticeGeometry& geom, const MultiscaleParams& p, const Site& x,
                                    const Site& y_coarse, int shells, int M_init = 0);

struct ImagesResidualRow {
  int shells = 0;
  double g_max_error = 0.0;      ///< max over all (x, y) of |images - direct| for G_k(Omega)
  double g_median_error = 0.0;
  double gq_max_error = 0.0;     ///< same for G_k(Omega) Q_k^*
  double gq_median_error = 0.0;
  double truncation_estimate = 0.0;  ///< max over pairs of the G tail estimate
  double max_error() const { return std::max(g_max_error, gq_max_error); }
};

struct ImagesResidualReport {
  LatticeGeometry geometry;
  std::vector<ImagesResidualRow> rows;  ///< shells = 1 .. max_shells
  bool monotone = false;                ///< max errors strictly decrease with shells
  int quadrature_M = 0;
  double runtime_s = 0.0;
};

/// Compares image sums with the dense Neumann inverse for every pair of sites, sweeping shells.
ImagesResidualReport images_residual_report(const LatticeGeometry& geom, const MultiscaleParams& p, int max_shells,
                                            int M_init = 0);

}  // namespace lrg
