#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "lrg/lattice.hpp"

using namespace lrg;

TEST_CASE("geometry of a one-dimensional lattice with one refinement") {
  const auto g = make_geometry(1, 3, 1, 2);
  CHECK(g.sites_per_axis() == 9);
  CHECK(g.site_count() == 9);
  CHECK(g.spacing() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(g.side_length() == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(g.cell_volume() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("unrefined two-dimensional lattice has unit spacing") {
  const auto g = make_geometry(2, 3, 0, 1);
  CHECK(g.sites_per_axis() == 3);
  CHECK(g.site_count() == 9);
  CHECK(g.spacing() == 1.0);
}

TEST_CASE("make_geometry rejects invalid shapes") {
  CHECK_THROWS_WITH_AS(make_geometry(1, 4, 1, 2), "L must be odd", std::invalid_argument);
  CHECK_THROWS_AS(make_geometry(1, 1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_geometry(0, 3, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_geometry(1, 3, 3, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_geometry(1, 3, -1, 2), std::invalid_argument);
  CHECK_THROWS_AS(make_geometry(3, 3, 2, 3), std::invalid_argument);  // 3^9 sites exceeds the cap
}

TEST_CASE("flat indices round-trip through sites") {
  const auto g = make_geometry(2, 3, 1, 2);
  for (std::size_t i = 0; i < g.site_count(); ++i) CHECK(g.index_of(g.site_at(i)) == i);
  CHECK(g.index_of({1, 0}) == 9);  // axis 0 slowest
  CHECK_THROWS_AS(g.index_of({9, 0}), std::out_of_range);
  CHECK_FALSE(g.contains({-1, 0}));
}

TEST_CASE("coarse geometry") {
  const auto g = make_geometry(1, 3, 1, 2);
  const auto c = coarse_geometry(g, 1);
  CHECK(c.sites_per_axis() == 3);
  CHECK(c.spacing() == doctest::Approx(1.0));
  CHECK(coarse_geometry(g, 0) == g);
  CHECK_THROWS_AS(coarse_geometry(g, 3), std::out_of_range);
}

TEST_CASE("scaling commutes with coarsening on index sets") {
  const auto g = make_geometry(2, 3, 2, 3);
  for (int ell = 0; ell <= 2; ++ell) {
    for (int j = 0; j <= 3; ++j) {
      const auto a = coarse_geometry(scaled_geometry(g, ell), j);
      const auto b = coarse_geometry(g, j);
      CHECK(a.sites_per_axis() == b.sites_per_axis());
      CHECK(a.spacing() == doctest::Approx(b.spacing() * std::pow(3.0, ell)).epsilon(1e-14));
    }
  }
}

TEST_CASE("block labels") {
  const auto g1 = make_geometry(1, 3, 1, 2);
  CHECK(block_label(g1, 1, {5}) == Site{1});
  CHECK(block_label(g1, 0, {5}) == Site{5});
  const auto g2 = make_geometry(2, 3, 2, 2);
  CHECK(block_label(g2, 2, {8, 0}) == Site{0, 0});
}

TEST_CASE("block sites enumerate and tile the lattice") {
  const auto g1 = make_geometry(1, 3, 1, 2);
  CHECK(block_sites(g1, 1, {2}) == std::vector<Site>{{6}, {7}, {8}});
  CHECK(block_sites(g1, 0, {4}) == std::vector<Site>{{4}});

  const auto g = make_geometry(2, 3, 1, 2);
  for (int j = 0; j <= 2; ++j) {
    const auto c = coarse_geometry(g, j);
    std::set<std::size_t> seen;
    std::size_t total = 0;
    for (std::size_t y = 0; y < c.site_count(); ++y) {
      const auto sites = block_sites(g, j, c.site_at(y));
      CHECK(sites.size() == static_cast<std::size_t>(ipow(3, 2 * j)));
      for (const auto& x : sites) {
        seen.insert(g.index_of(x));
        CHECK(block_label(g, j, x) == c.site_at(y));
      }
      total += sites.size();
    }
    CHECK(total == g.site_count());
    CHECK(seen.size() == g.site_count());
  }
}

TEST_CASE("reflections across the faces") {
  const auto g = make_geometry(1, 3, 1, 2);
  CHECK(reflect(g, 0, End::low, {0}) == Site{-1});
  CHECK(reflect(g, 0, End::high, {8}) == Site{9});
  const auto g2 = make_geometry(2, 3, 1, 1);
  for (std::size_t i = 0; i < g2.site_count(); ++i) {
    const Site x = g2.site_at(i);
    for (int axis = 0; axis < 2; ++axis) {
      for (End e : {End::low, End::high}) CHECK(reflect(g2, axis, e, reflect(g2, axis, e, x)) == x);
    }
  }
  CHECK_THROWS_AS(reflect(g2, 2, End::low, {0, 0}), std::out_of_range);
}

TEST_CASE("image points") {
  const auto g = make_geometry(1, 3, 1, 2);
  CHECK(image_points(g, {1}, 0) == std::vector<Site>{{1}});
  auto imgs = image_points(g, {1}, 1);
  std::sort(imgs.begin(), imgs.end());
  CHECK(imgs == std::vector<Site>{{-2}, {1}, {16}});
  CHECK(image_points(g, {1}, 1).front() == Site{1});

  // Brute-force oracle: compose the two face reflections explicitly.
  const auto g2 = make_geometry(2, 3, 0, 1);
  for (int s = 0; s <= 3; ++s) {
    const auto pts = image_points(g2, {0, 2}, s);
    CHECK(pts.size() == static_cast<std::size_t>((2 * s + 1) * (2 * s + 1)));
    CHECK(image_shells(2, s).size() == pts.size());
    std::set<Site> uniq(pts.begin(), pts.end());
    CHECK(uniq.size() == pts.size());
  }
  // One reflection across each face matches reflect().
  const auto pts1 = image_points(g, {1}, 1);
  std::set<Site> s1(pts1.begin(), pts1.end());
  CHECK(s1.count(reflect(g, 0, End::low, {1})) == 1);
  CHECK(s1.count(reflect(g, 0, End::high, {1})) == 1);
  CHECK_THROWS_AS(image_points(g, {1}, -1), std::invalid_argument);
}

TEST_CASE("image_index alternates reflected and translated copies") {
  // Copy j is a reflected copy for odd j and a translate for even j.
  const std::int64_t N = 9;
  for (std::int64_t y = 0; y < N; ++y) {
    CHECK(image_index(N, y, 0) == y);
    CHECK(image_index(N, y, 2) == y + 2 * N);
    CHECK(image_index(N, y, -2) == y - 2 * N);
    CHECK(image_index(N, y, 1) == 2 * N - 1 - y);
    CHECK(image_index(N, y, -1) == -1 - y);
  }
}

TEST_CASE("distances") {
  CHECK(dist({0.5, 0.25}, {0.5, 0.25}) == 0.0);
  CHECK(dist({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(5.0));
  CHECK(sup_dist({0.0, 0.0}, {3.0, -4.0}) == doctest::Approx(4.0));
  CHECK(dist_to_set({1.0, 2.0}, {{1.0, 2.0}}) == 0.0);
  CHECK(dist_to_set({0.0}, {{2.0}, {-1.0}}) == doctest::Approx(1.0));
  CHECK_THROWS_AS(dist_to_set({0.0}, {}), std::invalid_argument);
  const auto g = make_geometry(2, 3, 0, 2);
  CHECK(site_dist(g, {0, 0}, {3, 4}) == doctest::Approx(5.0));
}
