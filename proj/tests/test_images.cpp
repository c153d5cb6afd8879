#include <cmath>

#include "doctest.h"
#include "lrg/images.hpp"

using namespace lrg;

namespace {

// Least-squares slope of y against x.
double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Decay rate of the dense G_k(Omega) Q^* column of the corner block, against the
// distance from x to that block, fitted over distances in [1, 0.8 max].
double dense_gq_rate(const LatticeGeometry& g, const MultiscaleParams& p) {
  const auto Q = averaging(g, g.k);
  const auto GQ = compose(green_neumann(g, p), adjoint(Q));
  const double B = 1.0;  // block side in physical units
  std::vector<double> dist, lg;
  const double far = g.side_length() - g.spacing();
  for (std::size_t i = 0; i < g.site_count(); ++i) {
    const Site x = g.site_at(i);
    double d2 = 0.0;
    for (int mu = 0; mu < g.d; ++mu) {
      const double c = x[mu] * g.spacing();
      const double gap = std::max(0.0, c - (B - g.spacing()));
      d2 += gap * gap;
    }
    const double dd = std::sqrt(d2);
    if (dd < 1.0 || dd > 0.8 * far) continue;
    dist.push_back(dd);
    lg.push_back(std::log(std::abs(GQ.kernel()(static_cast<Eigen::Index>(i), 0))));
  }
  return -ols_slope(dist, lg);
}

}  // namespace

TEST_CASE("image sum at the centre pair of the reference box") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const auto g = make_geometry(1, 3, 1, 2);
  const auto G = green_neumann(g, p);
  const auto r = neumann_kernel_via_images(g, p, {4}, {4}, 4);
  CHECK(r.shells_used == 4);
  CHECK(std::abs(r.value - G({4}, {4})) <= 1e-6);
  CHECK(r.truncation_estimate > 0.0);
}

TEST_CASE("image sums are symmetric and their tails shrink") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const auto g = make_geometry(1, 3, 1, 2);
  for (auto [x, y] : {std::pair<Site, Site>{{0}, {5}}, {{2}, {8}}, {{1}, {1}}}) {
    const auto a = neumann_kernel_via_images(g, p, x, y, 3);
    const auto b = neumann_kernel_via_images(g, p, y, x, 3);
    CHECK(std::abs(a.value - b.value) <= 1e-10 * std::abs(a.value));
    double prev = INFINITY;
    for (int s = 1; s <= 4; ++s) {
      const auto r = neumann_kernel_via_images(g, p, x, y, s);
      CHECK(r.truncation_estimate < prev);
      prev = r.truncation_estimate;
    }
  }
  CHECK_THROWS_AS(neumann_kernel_via_images(g, p, {9}, {0}, 2), std::out_of_range);
  CHECK_THROWS_AS(neumann_kernel_via_images(g, p, {0}, {0}, 0), std::invalid_argument);
}

TEST_CASE("G Q* by images against the dense composition") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const auto g = make_geometry(1, 3, 1, 3);
  const auto Q = averaging(g, 1);
  const auto GQ = compose(green_neumann(g, p), adjoint(Q));
  double worst = 0.0;
  for (std::int64_t x : {0, 4, 13, 26}) {
    for (std::int64_t y : {0, 4, 8}) {
      const auto r = gq_kernel_via_images(g, p, {x}, {y}, 3);
      worst = std::max(worst, std::abs(r.value - GQ({x}, {y})));
    }
  }
  CHECK(worst <= 1e-10);
  CHECK_THROWS_AS(gq_kernel_via_images(g, p, {0}, {9}, 2), std::out_of_range);
}

TEST_CASE("residual sweep decreases with shells") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const auto rep = images_residual_report(make_geometry(1, 3, 1, 2), p, 4);
  REQUIRE(rep.rows.size() == 4);
  CHECK(rep.monotone);
  for (std::size_t i = 1; i < rep.rows.size(); ++i) CHECK(rep.rows[i].max_error() < rep.rows[i - 1].max_error());
  CHECK(rep.quadrature_M > 0);

  // A box three unit cells wide is far enough from its images for round-off agreement.
  const auto wide = images_residual_report(make_geometry(1, 3, 1, 3), p, 3);
  CHECK(wide.rows.back().max_error() <= 1e-12);

  const auto d2 = images_residual_report(make_geometry(2, 3, 1, 1), p, 2);
  CHECK(d2.rows.size() == 2);
  CHECK(d2.rows[1].max_error() < d2.rows[0].max_error());
}

TEST_CASE("free kernel is invariant under face reflections") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const FreeKernel K(2, 3, 1, p);
  // Reflection across the hyperplane half a spacing below site 0 maps blocks to blocks.
  auto P = [](Site s, int axis) {
    s[axis] = -1 - s[axis];
    return s;
  };
  const Site x{1, 4}, y{-3, 7};
  const auto v = K.g_converged({{x, y}, {P(x, 0), P(y, 0)}, {P(x, 1), P(y, 1)}}, {}).values;
  CHECK(std::abs(v[1] - v[0]) <= 1e-10 * std::abs(v[0]));
  CHECK(std::abs(v[2] - v[0]) <= 1e-10 * std::abs(v[0]));
}

TEST_CASE("image-sum function satisfies the Neumann condition") {
  // F_y(x) = sum_j G(x, y_j) is even about each face, so its ghost value equals the edge value.
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const auto g = make_geometry(1, 3, 1, 2);
  const FreeKernel K(1, 3, 1, p);
  const auto imgs = image_points(g, {2}, 4);
  std::vector<std::pair<Site, Site>> pairs;
  for (const auto& yj : imgs) {
    pairs.push_back({Site{-1}, yj});
    pairs.push_back({Site{0}, yj});
    pairs.push_back({Site{9}, yj});
    pairs.push_back({Site{8}, yj});
  }
  const auto v = K.g_converged(pairs, {}).values;
  cplx lo_ghost = 0, lo_edge = 0, hi_ghost = 0, hi_edge = 0;
  for (std::size_t j = 0; j < imgs.size(); ++j) {
    lo_ghost += v[4 * j];
    lo_edge += v[4 * j + 1];
    hi_ghost += v[4 * j + 2];
    hi_edge += v[4 * j + 3];
  }
  // Only the outermost shell breaks the symmetry, so the defect is a truncation-size effect.
  CHECK(std::abs(lo_ghost - lo_edge) <= 1e-5 * std::abs(lo_edge));
  CHECK(std::abs(hi_ghost - hi_edge) <= 1e-5 * std::abs(hi_edge));
}

TEST_CASE("shell diagnostics") {
  const auto ok = summarize_shells({1.0, 0.1, 0.01}, {1.0, 0.1, 0.01});
  CHECK(ok.shells_used == 2);
  CHECK(std::abs(ok.value - 1.11) < 1e-15);
  CHECK(ok.last_shell_contribution == doctest::Approx(0.01));
  CHECK(ok.truncation_estimate == doctest::Approx(0.01 * 0.1 / 0.9));
  // The per-shell ratio is the geometric mean from shell 1: (0.0125 / 0.2)^{1/2} = 0.25.
  const auto three = summarize_shells({1.0, 0.2, 0.1, 0.0125}, {1.0, 0.2, 0.1, 0.0125});
  CHECK(three.truncation_estimate == doctest::Approx(0.0125 * 0.25 / 0.75).epsilon(1e-14));
  CHECK_THROWS_AS(summarize_shells({1.0, 0.5, 0.48}, {1.0, 0.5, 0.48}), NonDecayingImagesError);
  CHECK_THROWS_AS(summarize_shells({1.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("G Q* decays at a volume-independent rate") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const double r3 = dense_gq_rate(make_geometry(1, 3, 1, 3), p);
  const double r4 = dense_gq_rate(make_geometry(1, 3, 1, 4), p);
  CHECK(r3 > 0.0);
  CHECK(r4 > 0.0);
  CHECK(std::abs(r3 - r4) / std::min(r3, r4) <= 0.2);
}
