#include "lrg/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace lrg {

std::int64_t ipow(std::int64_t base, int exponent) {
  if (exponent < 0) throw std::invalid_argument("ipow: negative exponent");
  std::int64_t r = 1;
  for (int i = 0; i < exponent; ++i) r *= base;
  return r;
}

std::int64_t LatticeGeometry::sites_per_axis() const { return ipow(L, m); }

std::size_t LatticeGeometry::site_count() const {
  return static_cast<std::size_t>(ipow(sites_per_axis(), d));
}

double LatticeGeometry::spacing() const { return std::pow(static_cast<double>(L), -k); }

double LatticeGeometry::side_length() const { return std::pow(static_cast<double>(L), m - k); }

double LatticeGeometry::cell_volume() const { return std::pow(spacing(), d); }

std::size_t LatticeGeometry::index_of(const Site& x) const {
  if (!contains(x)) throw std::out_of_range("site outside lattice " + describe());
  const std::int64_t N = sites_per_axis();
  std::size_t idx = 0;
  for (int mu = 0; mu < d; ++mu) idx = idx * static_cast<std::size_t>(N) + static_cast<std::size_t>(x[mu]);
  return idx;
}

Site LatticeGeometry::site_at(std::size_t index) const {
  if (index >= site_count()) throw std::out_of_range("flat index outside lattice " + describe());
  const std::int64_t N = sites_per_axis();
  Site x(d);
  for (int mu = d - 1; mu >= 0; --mu) {
    x[mu] = static_cast<std::int64_t>(index % static_cast<std::size_t>(N));
    index /= static_cast<std::size_t>(N);
  }
  return x;
}

bool LatticeGeometry::contains(const Site& x) const {
  if (static_cast<int>(x.size()) != d) return false;
  const std::int64_t N = sites_per_axis();
  return std::all_of(x.begin(), x.end(), [N](std::int64_t c) { return c >= 0 && c < N; });
}

std::vector<double> LatticeGeometry::coordinates(const Site& x) const {
  const double eta = spacing();
  std::vector<double> c(x.size());
  for (std::size_t mu = 0; mu < x.size(); ++mu) c[mu] = eta * static_cast<double>(x[mu]);
  return c;
}

std::string LatticeGeometry::describe() const {
  std::ostringstream os;
  os << "(d=" << d << ", L=" << L << ", k=" << k << ", m=" << m << ")";
  return os.str();
}

LatticeGeometry make_geometry(int d, int L, int k, int m, std::size_t site_cap) {
  if (d < 1) throw std::invalid_argument("d must be >= 1");
  if (L < 3) throw std::invalid_argument("L must be >= 3");
  if (L % 2 == 0) throw std::invalid_argument("L must be odd");
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  if (k > m) throw std::invalid_argument("k must not exceed m");
  double total = std::pow(static_cast<double>(L), static_cast<double>(m) * d);
  if (total > static_cast<double>(site_cap))
    throw std::invalid_argument("lattice with " + std::to_string(static_cast<long long>(total)) +
                                " sites exceeds the cap of " + std::to_string(site_cap));
  return LatticeGeometry{d, L, k, m};
}

LatticeGeometry coarse_geometry(const LatticeGeometry& geom, int j) {
  if (j < 0 || j > geom.m)
    throw std::out_of_range("coarsening level " + std::to_string(j) + " outside [0, m]");
  return LatticeGeometry{geom.d, geom.L, geom.k - j, geom.m - j};
}

LatticeGeometry scaled_geometry(const LatticeGeometry& geom, int ell) {
  return LatticeGeometry{geom.d, geom.L, geom.k - ell, geom.m};
}

Site block_label(const LatticeGeometry& geom, int j, const Site& x) {
  if (j < 0 || j > geom.m) throw std::out_of_range("block level outside [0, m]");
  if (!geom.contains(x)) throw std::out_of_range("site outside lattice");
  const std::int64_t B = ipow(geom.L, j);
  Site y(x.size());
  for (std::size_t mu = 0; mu < x.size(); ++mu) y[mu] = x[mu] / B;
  return y;
}

std::vector<Site> block_sites(const LatticeGeometry& geom, int j, const Site& y) {
  const LatticeGeometry coarse = coarse_geometry(geom, j);
  if (!coarse.contains(y)) throw std::out_of_range("block label outside coarse lattice");
  const std::int64_t B = ipow(geom.L, j);
  const std::size_t n = static_cast<std::size_t>(ipow(B, geom.d));
  std::vector<Site> out;
  out.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    Site x(geom.d);
    std::size_t r = t;
    for (int mu = geom.d - 1; mu >= 0; --mu) {
      x[mu] = y[mu] * B + static_cast<std::int64_t>(r % static_cast<std::size_t>(B));
      r /= static_cast<std::size_t>(B);
    }
    out.push_back(std::move(x));
  }
  return out;
}

Site reflect(const LatticeGeometry& geom, int axis, End end, const Site& x) {
  if (axis < 0 || axis >= geom.d) throw std::out_of_range("axis outside [0, d)");
  Site r = x;
  const std::int64_t N = geom.sites_per_axis();
  r[axis] = (end == End::low) ? -1 - x[axis] : 2 * N - 1 - x[axis];
  return r;
}

std::int64_t image_index(std::int64_t N, std::int64_t y, int shell) {
  // Even copies are translates by 2N-periods, odd copies are mirror images.
  if (shell % 2 == 0) return N * shell + y;
  return N * (shell + 1) - 1 - y;
}

std::vector<int> image_shells(int d, int shells) {
  const int width = 2 * shells + 1;
  const std::size_t n = static_cast<std::size_t>(ipow(width, d));
  std::vector<int> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    std::size_t r = t;
    int s = 0;
    for (int mu = 0; mu < d; ++mu) {
      int j = static_cast<int>(r % static_cast<std::size_t>(width));
      r /= static_cast<std::size_t>(width);
      s = std::max(s, std::abs(j - shells));
    }
    out[t] = s;
  }
  // Reorder to match image_points, which puts the unreflected copy first.
  std::vector<int> ordered;
  ordered.reserve(n);
  ordered.push_back(0);
  for (std::size_t t = 0; t < n; ++t)
    if (t != (n - 1) / 2) ordered.push_back(out[t]);
  return ordered;
}

std::vector<Site> image_points(const LatticeGeometry& geom, const Site& y, int shells) {
  if (shells < 0) throw std::invalid_argument("shells must be >= 0");
  if (static_cast<int>(y.size()) != geom.d) throw std::invalid_argument("site dimension mismatch");
  const std::int64_t N = geom.sites_per_axis();
  const int width = 2 * shells + 1;
  const std::size_t n = static_cast<std::size_t>(ipow(width, geom.d));
  std::vector<Site> pts;
  pts.reserve(n);
  pts.push_back(y);
  for (std::size_t t = 0; t < n; ++t) {
    if (t == (n - 1) / 2) continue;  // all-zero shell vector: y itself
    std::size_t r = t;
    Site img(geom.d);
    // Axis 0 varies fastest in t; the ordering only needs to be deterministic.
    for (int mu = 0; mu < geom.d; ++mu) {
      int j = static_cast<int>(r % static_cast<std::size_t>(width)) - shells;
      r /= static_cast<std::size_t>(width);
      img[mu] = image_index(N, y[mu], j);
    }
    pts.push_back(std::move(img));
  }
  return pts;
}

double dist(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("dist: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
  return std::sqrt(s);
}

double sup_dist(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("sup_dist: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s = std::max(s, std::abs(x[i] - y[i]));
  return s;
}

double dist_to_set(const std::vector<double>& x, const std::vector<std::vector<double>>& set) {
  if (set.empty()) throw std::invalid_argument("dist_to_set: empty set");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : set) best = std::min(best, dist(x, s));
  return best;
}

double site_dist(const LatticeGeometry& geom, const Site& x, const Site& y) {
  return dist(geom.coordinates(x), geom.coordinates(y));
}

}  // namespace lrg
