#include "lrg/images.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace lrg {

namespace {

void require_shells(int shells) {
  if (shells < 1) throw std::invalid_argument("shells must be >= 1");
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t n = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n), v.end());
  if (v.size() % 2 == 1) return v[n];
  const double hi = v[n];
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(n));
  return 0.5 * (lo + hi);
}

// Per-shell sums of `terms` laid out as image_points order.
void accumulate_shells(const std::vector<cplx>& terms, const std::vector<int>& shell_of, int shells,
                       std::vector<cplx>& sum, std::vector<double>& abs_sum) {
  sum.assign(static_cast<std::size_t>(shells) + 1, 0.0);
  abs_sum.assign(static_cast<std::size_t>(shells) + 1, 0.0);
  for (std::size_t j = 0; j < terms.size(); ++j) {
    sum[static_cast<std::size_t>(shell_of[j])] += terms[j];
    abs_sum[static_cast<std::size_t>(shell_of[j])] += std::abs(terms[j]);
  }
}

}  // namespace

ImageSumResult summarize_shells(const std::vector<cplx>& shell_sum, const std::vector<double>& shell_abs) {
  if (shell_sum.size() < 2 || shell_sum.size() != shell_abs.size())
    throw std::invalid_argument("need per-shell sums for shells 0..s with s >= 1");
  ImageSumResult r;
  r.shells_used = static_cast<int>(shell_sum.size()) - 1;
  for (const cplx& v : shell_sum) r.value += v;
  const double c = shell_abs.back();
  r.last_shell_contribution = c;
  if (r.shells_used == 1) {
    r.truncation_estimate = c;
    return r;
  }
  // Geometric-mean ratio per shell from shell 1 on: reflected and translated copies alternate
  // in distance, so a single consecutive ratio is too erratic to extrapolate from.
  const double first = shell_abs[1];
  const double ratio = first > 0.0 ? std::pow(c / first, 1.0 / (r.shells_used - 1)) : 0.0;
  if (ratio > kMaxShellRatio)
    throw NonDecayingImagesError("image shells decay too slowly (ratio " + std::to_string(ratio) + " at shell " +
                                 std::to_string(r.shells_used) + ")");
  r.truncation_estimate = c * ratio / (1.0 - ratio);
  return r;
}

ImageSumResult neumann_kernel_via_images(const LatticeGeometry& geom, const MultiscaleParams& p, const Site& x,
                                         const Site& y, int shells, int M_init) {
  require_shells(shells);
  if (!geom.contains(x) || !geom.contains(y)) throw std::out_of_range("sites must lie in the lattice");
  const FreeKernel K(geom.d, geom.L, geom.k, p);
  std::vector<std::pair<Site, Site>> pairs;
  for (const Site& yj : image_points(geom, y, shells)) pairs.emplace_back(x, yj);
  const auto terms = K.g_converged(pairs, {}, M_init).values;
  std::vector<cplx> sum;
  std::vector<double> abs_sum;
  accumulate_shells(terms, image_shells(geom.d, shells), shells, sum, abs_sum);
  return summarize_shells(sum, abs_sum);
}

ImageSumResult gq_kernel_via_images(const LatticeGeometry& geom, const MultiscaleParams& p, const Site& x,
                                    const Site& y_coarse, int shells, int M_init) {
  require_shells(shells);
  if (!geom.contains(x)) throw std::out_of_range("x must lie in the lattice");
  if (!coarse_geometry(geom, geom.k).contains(y_coarse)) throw std::out_of_range("y must be a block label of Omega_k");
  const FreeKernel K(geom.d, geom.L, geom.k, p);
  std::vector<std::pair<Site, Site>> pairs;
  for (const Site& xj : image_points(geom, x, shells)) pairs.emplace_back(xj, y_coarse);
  const auto terms = K.gq_converged(pairs, {}, M_init).values;
  std::vector<cplx> sum;
  std::vector<double> abs_sum;
  accumulate_shells(terms, image_shells(geom.d, shells), shells, sum, abs_sum);
  return summarize_shells(sum, abs_sum);
}

ImagesResidualReport images_residual_report(const LatticeGeometry& geom, const MultiscaleParams& p, int max_shells,
                                            int M_init) {
  require_shells(max_shells);
  const auto t0 = std::chrono::steady_clock::now();
  ImagesResidualReport rep;
  rep.geometry = geom;

  const KernelOperator G = green_neumann(geom, p);
  const LatticeGeometry coarse = coarse_geometry(geom, geom.k);
  const KernelOperator GQ = compose(G, adjoint(averaging(geom, geom.k)));
  const FreeKernel K(geom.d, geom.L, geom.k, p);
  const std::vector<int> shell_of = image_shells(geom.d, max_shells);
  const std::size_t n = geom.site_count();
  const std::size_t nc = coarse.site_count();

  // One batched quadrature for every (x, image of y) and (image of x, y_coarse) pair.
  std::vector<std::vector<Site>> images(n);
  for (std::size_t s = 0; s < n; ++s) images[s] = image_points(geom, geom.site_at(s), max_shells);
  const std::size_t per = images[0].size();
  std::vector<std::pair<Site, Site>> g_pairs, gq_pairs;
  g_pairs.reserve(n * n * per);
  gq_pairs.reserve(n * nc * per);
  for (std::size_t sx = 0; sx < n; ++sx) {
    const Site x = geom.site_at(sx);
    for (std::size_t sy = 0; sy < n; ++sy)
      for (const Site& yj : images[sy]) g_pairs.emplace_back(x, yj);
    for (std::size_t c = 0; c < nc; ++c)
      for (const Site& xj : images[sx]) gq_pairs.emplace_back(xj, coarse.site_at(c));
  }
  const auto g_terms = K.g_converged(g_pairs, {}, M_init);
  const auto gq_terms = K.gq_converged(gq_pairs, {}, M_init);
  rep.quadrature_M = std::max(g_terms.M, gq_terms.M);

  rep.rows.resize(static_cast<std::size_t>(max_shells));
  for (int s = 1; s <= max_shells; ++s) rep.rows[static_cast<std::size_t>(s - 1)].shells = s;
  std::vector<std::vector<double>> g_err(static_cast<std::size_t>(max_shells)), gq_err(g_err.size());

  auto sweep = [&](const std::vector<cplx>& terms, std::size_t offset, cplx direct,
                   std::vector<std::vector<double>>& errs, bool track_tail) {
    std::vector<cplx> sum(static_cast<std::size_t>(max_shells) + 1, 0.0);
    std::vector<double> abs_sum(sum.size(), 0.0);
    for (std::size_t j = 0; j < per; ++j) {
      sum[static_cast<std::size_t>(shell_of[j])] += terms[offset + j];
      abs_sum[static_cast<std::size_t>(shell_of[j])] += std::abs(terms[offset + j]);
    }
    for (int s = 1; s <= max_shells; ++s) {
      const std::vector<cplx> ps(sum.begin(), sum.begin() + s + 1);
      const std::vector<double> pa(abs_sum.begin(), abs_sum.begin() + s + 1);
      const ImageSumResult r = summarize_shells(ps, pa);
      errs[static_cast<std::size_t>(s - 1)].push_back(std::abs(r.value - direct));
      if (track_tail) {
        auto& row = rep.rows[static_cast<std::size_t>(s - 1)];
        row.truncation_estimate = std::max(row.truncation_estimate, r.truncation_estimate);
      }
    }
  };

  std::size_t off_g = 0, off_gq = 0;
  for (std::size_t sx = 0; sx < n; ++sx) {
    for (std::size_t sy = 0; sy < n; ++sy, off_g += per)
      sweep(g_terms.values, off_g, G.kernel()(static_cast<Eigen::Index>(sx), static_cast<Eigen::Index>(sy)), g_err,
            true);
    for (std::size_t c = 0; c < nc; ++c, off_gq += per)
      sweep(gq_terms.values, off_gq, GQ.kernel()(static_cast<Eigen::Index>(sx), static_cast<Eigen::Index>(c)),
            gq_err, false);
  }
  for (std::size_t s = 0; s < rep.rows.size(); ++s) {
    auto& row = rep.rows[s];
    row.g_max_error = *std::max_element(g_err[s].begin(), g_err[s].end());
    row.g_median_error = median(g_err[s]);
    row.gq_max_error = *std::max_element(gq_err[s].begin(), gq_err[s].end());
    row.gq_median_error = median(gq_err[s]);
  }
  rep.monotone = true;
  for (std::size_t s = 1; s < rep.rows.size(); ++s)
    rep.monotone = rep.monotone && rep.rows[s].max_error() < rep.rows[s - 1].max_error();
  rep.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace lrg
