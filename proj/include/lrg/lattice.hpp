#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace lrg {

/// Integer multi-index of a lattice point, in units of the lattice spacing.
/// Components may be negative or exceed the box for free-lattice and image points.
using Site = std::vector<std::int64_t>;

/// Default cap on the number of sites of a single lattice (dense operators are O(n^2)).
inline constexpr std::size_t kDefaultSiteCap = 8192;

/// Cube of (L^m)^d sites with spacing L^{-k}.
///
/// Coarse descendants Omega_j reuse the same type with k replaced by k - j and m by
/// m - j, so k can be negative for lattices coarser than the unit lattice.
struct LatticeGeometry {
  int d = 1;
  int L = 3;
  int k = 0;  ///< spacing exponent: eta = L^{-k}
  int m = 0;  ///< size exponent: N = L^m sites per axis

  std::int64_t sites_per_axis() const;
  std::size_t site_count() const;
  double spacing() const;
  double side_length() const;
  /// eta^d, the measure of a single site.
  double cell_volume() const;

  std::size_t index_of(const Site& x) const;  ///< row-major flat index, axis 0 slowest
  Site site_at(std::size_t index) const;
  bool contains(const Site& x) const;
  std::vector<double> coordinates(const Site& x) const;  ///< x * eta

  bool operator==(const LatticeGeometry&) const = default;
  std::string describe() const;
};

/// Validated constructor: L odd and >= 3, d >= 1, 0 <= k <= m, site count within cap.
LatticeGeometry make_geometry(int d, int L, int k, int m, std::size_t site_cap = kDefaultSiteCap);

/// Omega_j: spacing L^{j-k}, L^{m-j} sites per axis. j = 0 returns geom.
LatticeGeometry coarse_geometry(const LatticeGeometry& geom, int j);

/// lambda Omega with lambda = L^ell: same index set, spacing multiplied by L^ell.
LatticeGeometry scaled_geometry(const LatticeGeometry& geom, int ell);

/// The label y in Omega_j of the block B_j(y) containing x.
Site block_label(const LatticeGeometry& geom, int j, const Site& x);

/// All L^{jd} sites of the block B_j(y), in row-major order.
std::vector<Site> block_sites(const LatticeGeometry& geom, int j, const Site& y);

enum class End { low, high };

/// Reflection across the hyperplane half a spacing outside the low or high face.
Site reflect(const LatticeGeometry& geom, int axis, End end, const Site& x);

/// Image index of a one-dimensional coordinate in reflected copy `shell` (copy 0 is the box).
std::int64_t image_index(std::int64_t N, std::int64_t y, int shell);

/// Images of y in the (2*shells+1)^d reflected copies of the box; y itself comes first.
std::vector<Site> image_points(const LatticeGeometry& geom, const Site& y, int shells);

/// Shell number max_mu |j_mu| of each image, aligned with image_points.
std::vector<int> image_shells(int d, int shells);

double dist(const std::vector<double>& x, const std::vector<double>& y);
double sup_dist(const std::vector<double>& x, const std::vector<double>& y);
double dist_to_set(const std::vector<double>& x, const std::vector<std::vector<double>>& set);

/// Euclidean distance between two sites of geom in physical units.
double site_dist(const LatticeGeometry& geom, const Site& x, const Site& y);

/// Integer power for the small exponents used throughout.
std::int64_t ipow(std::int64_t base, int exponent);

}  // namespace lrg
