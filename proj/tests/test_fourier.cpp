#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "lrg/fourier.hpp"

using namespace lrg;

namespace {

constexpr double kPi = std::numbers::pi;

ZVec real_z(std::initializer_list<double> v) {
  ZVec z;
  for (double x : v) z.emplace_back(x, 0.0);
  return z;
}

double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

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

// Decay rate of |G Q^*(x, 0)| along axis 0 at physical distances 2..6.
double gq_rate(int k) {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const FreeKernel K(1, 3, k, p);
  const std::int64_t B = ipow(3, k);
  std::vector<std::pair<Site, Site>> pairs;
  std::vector<double> dist;
  for (int r = 2; r <= 6; ++r) {
    pairs.push_back({Site{r * B + (B - 1) / 2}, Site{0}});
    dist.push_back(static_cast<double>(r));
  }
  const auto v = K.gq_converged(pairs, {}).values;
  std::vector<double> lg;
  for (const auto& c : v) lg.push_back(std::log(std::abs(c)));
  return -ols_slope(dist, lg);
}

}  // namespace

TEST_CASE("Laplacian symbol") {
  CHECK(std::abs(laplacian_symbol(real_z({0.0}), 1.0 / 3.0, 0.0)) == 0.0);
  CHECK(std::abs(laplacian_symbol(real_z({0.0, 0.0}), 1.0 / 9.0, 0.0)) == 0.0);
  CHECK(std::abs(laplacian_symbol(real_z({kPi}), 1.0, 0.0) - 4.0) < 1e-14);

  // Plane-wave oracle: the interior second difference of e^{i p x} is -symbol times the wave.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int d : {1, 2}) {
    for (int k : {0, 1, 2}) {
      const double eta = std::pow(3.0, -k);
      for (int trial = 0; trial < 20; ++trial) {
        ZVec z(d);
        for (auto& v : z) v = u(rng) / eta;
        const double mu0 = 0.3;
        auto wave = [&](const std::vector<int>& n) {
          cplx ph = 0.0;
          for (int mu = 0; mu < d; ++mu) ph += z[mu] * (n[mu] * eta);
          return std::exp(cplx(0.0, 1.0) * ph);
        };
        std::vector<int> x(d, 5);
        cplx lap = 0.0;
        for (int mu = 0; mu < d; ++mu) {
          auto xp = x, xm = x;
          ++xp[mu];
          --xm[mu];
          lap += (wave(xp) + wave(xm) - 2.0 * wave(x)) / (eta * eta);
        }
        const cplx op = -lap + mu0 / (eta * eta) * wave(x);
        const cplx sym = laplacian_symbol(z, eta, mu0) * wave(x);
        CHECK(std::abs(op - sym) <= 1e-12 * std::max(1.0, std::abs(sym)));
      }
    }
  }
}

TEST_CASE("u kernel") {
  CHECK(std::abs(u_kernel(real_z({0.0}), 1.0 / 3.0) - 1.0) < 1e-15);
  CHECK(std::abs(u_kernel(real_z({0.0, 0.0}), 1.0 / 9.0) - 1.0) < 1e-15);
  for (double p : {-3.0, -1.0, 0.2, 2.9}) CHECK(std::abs(u_kernel(real_z({p}), 1.0) - 1.0) < 1e-14);
  // Direct formula away from the removable zeros.
  const double eta = 1.0 / 3.0;
  for (double p : {0.7, -2.1, 5.0}) {
    const cplx I(0.0, 1.0);
    const cplx direct = eta * (1.0 - std::exp(-I * p)) / (1.0 - std::exp(-I * p * eta));
    CHECK(std::abs(u_kernel(real_z({p}), eta) - direct) < 1e-13);
  }
  // Near the origin the series branch matches the direct formula.
  const cplx I(0.0, 1.0);
  const double p = 1e-3;
  const cplx direct = eta * (1.0 - std::exp(-I * p)) / (1.0 - std::exp(-I * p * eta));
  CHECK(std::abs(u_kernel(real_z({p}), eta) - direct) < 1e-10);
}

TEST_CASE("u_Delta in quotient and product forms") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-kPi, kPi), q(-0.05, 0.05);
  for (int d : {1, 2}) {
    for (int k : {1, 2}) {
      const double eta = std::pow(3.0, -k);
      const auto box = shift_box(d, 3, k);
      for (int trial = 0; trial < 10; ++trial) {
        ZVec z(d);
        for (auto& v : z) v = cplx(u(rng), q(rng));
        for (const auto& ell : box) {
          const cplx a = u_delta(z, ell, eta, 0.1);
          const cplx b = u_delta_product_form(z, ell, eta, 0.1);
          CHECK(std::abs(a - b) <= 1e-11 * std::abs(a));
        }
        // period 2 pi L^k in every real direction
        for (int mu = 0; mu < d; ++mu) {
          ZVec zs = z;
          zs[mu] += 2.0 * kPi / eta;
          const std::vector<int> zero(d, 0);
          CHECK(std::abs(u_delta(zs, zero, eta, 0.1) - u_delta(z, zero, eta, 0.1)) <=
                1e-10 * std::abs(u_delta(z, zero, eta, 0.1)));
        }
      }
    }
  }
  CHECK_THROWS_AS(u_delta(real_z({0.0}), {0}, 1.0 / 3.0, 0.0), PoleProximityError);
}

TEST_CASE("bracket") {
  // k = 0: a single term |u|^2 / Delta with u = 1.
  for (double p : {0.4, -1.7, 3.0}) {
    const cplx b = bracket(real_z({p}), 3, 0, 0.0);
    CHECK(std::abs(b - 1.0 / laplacian_symbol(real_z({p}), 1.0, 0.0)) < 1e-14);
  }
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int d : {1, 2}) {
    for (int k : {0, 1, 2}) {
      for (int trial = 0; trial < 100; ++trial) {
        ZVec z(d);
        for (auto& v : z) v = u(rng);
        const cplx b = bracket(z, 3, k, 0.05);
        CHECK(b.real() >= 0.0);
        CHECK(std::abs(b.imag()) <= 1e-12 * std::abs(b));
        if (trial < 10) {
          ZVec zs = z;
          zs[0] += 2.0 * kPi;
          CHECK(std::abs(bracket(zs, 3, k, 0.05) - b) <= 1e-12 * std::abs(b));
        }
      }
    }
  }
}

TEST_CASE("momentum-space solve") {
  for (int d : {1, 2}) {
    for (int k : {1, 2}) {
      if (d == 2 && k == 2) continue;
      const int B = static_cast<int>(ipow(3, k));
      const auto grid = make_torus_grid(d, 3, k, 4 * B);
      const MultiscaleParams p{1.0, 0.0, 1.0};
      std::vector<cplx> f(grid.point_count());
      std::vector<int> I(d, 0);
      for (std::size_t t = 0; t < f.size(); ++t) {
        std::size_t r = t;
        for (int mu = d - 1; mu >= 0; --mu) {
          I[mu] = static_cast<int>(r % grid.M);
          r /= grid.M;
        }
        const auto P = torus_point(grid, I);
        double s = 0.0;
        for (double v : P) s += v * v * grid.spacing() * grid.spacing();
        f[t] = std::exp(-s) * cplx(1.0, 0.5);
      }
      const auto v = free_apply_ghat(f, grid, p);
      const auto back = free_apply_symbol(v, grid, p);
      CHECK(max_abs_diff(back, f) <= 1e-10);
    }
  }

  // k = 0 collapses to division by Delta(p) + a.
  const auto grid = make_torus_grid(1, 3, 0, 16);
  const MultiscaleParams p{1.7, 0.0, 1.0};
  std::vector<cplx> f(16);
  for (int i = 0; i < 16; ++i) f[i] = cplx(std::cos(0.3 * i), std::sin(1.1 * i));
  const auto v = free_apply_ghat(f, grid, p);
  for (int i = 0; i < 16; ++i) {
    const auto P = torus_point(grid, {i});
    const cplx expect = f[i] / (laplacian_symbol(real_z({P[0]}), 1.0, 0.0) + 1.7);
    CHECK(std::abs(v[i] - expect) <= 1e-13 * std::abs(expect));
  }
  CHECK_THROWS_AS(make_torus_grid(1, 3, 1, 10), std::invalid_argument);
  CHECK_THROWS_AS(make_torus_grid(1, 3, 1, 6), std::invalid_argument);
}

TEST_CASE("free kernel symmetries") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  for (int d : {1, 2}) {
    const FreeKernel K(d, 3, 1, p);
    std::vector<std::pair<Site, Site>> pairs;
    const Site x = d == 1 ? Site{2} : Site{2, -1};
    const Site y = d == 1 ? Site{-4} : Site{0, 3};
    // Translations by whole blocks (points of the unit lattice).
    const Site z = d == 1 ? Site{6} : Site{3, -6};
    Site xz = x, yz = y;
    for (int mu = 0; mu < d; ++mu) {
      xz[mu] += z[mu];
      yz[mu] += z[mu];
    }
    pairs = {{x, y}, {y, x}, {xz, yz}};
    const auto v = K.g_converged(pairs, {}).values;
    CHECK(std::abs(v[0] - v[1]) <= 1e-10 * std::abs(v[0]));
    CHECK(std::abs(v[0] - std::conj(v[1])) <= 1e-10 * std::abs(v[0]));
    CHECK(std::abs(v[0].imag()) <= 1e-10 * std::abs(v[0]));
    CHECK(std::abs(v[0] - v[2]) <= 1e-10 * std::abs(v[0]));
  }
}

TEST_CASE("contour shift leaves the kernels unchanged") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  for (int d : {1, 2}) {
    const FreeKernel K(d, 3, 1, p);
    const Site x = d == 1 ? Site{4} : Site{4, 1};
    const Site y = d == 1 ? Site{-2} : Site{-2, 0};
    const Site yc = d == 1 ? Site{-1} : Site{-1, 0};
    RVec q(d, 0.0);
    q[0] = 0.05;
    const auto g0 = K.g_converged({{x, y}}, {}).values[0];
    const auto g1 = K.g_converged({{x, y}}, q).values[0];
    CHECK(std::abs(g1 - g0) <= 1e-8 * std::abs(g0));
    const auto h0 = K.gq_converged({{x, yc}}, {}).values[0];
    const auto h1 = K.gq_converged({{x, yc}}, q).values[0];
    CHECK(std::abs(h1 - h0) <= 1e-8 * std::abs(h0));
  }
}

TEST_CASE("G Q* equals block sums of G") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  const FreeKernel K(1, 3, 1, p);
  const double eta = K.spacing();
  const Site x{2};
  for (std::int64_t y : {-2, 0, 3}) {
    std::vector<std::pair<Site, Site>> pairs;
    for (std::int64_t s = 0; s < 3; ++s) pairs.push_back({x, Site{3 * y + s}});
    const auto g = K.g_converged(pairs, {}).values;
    const cplx block_sum = eta * (g[0] + g[1] + g[2]);
    const auto gq = K.gq_converged({{x, Site{y}}}, {}).values[0];
    CHECK(std::abs(gq - block_sum) <= 1e-9 * std::abs(gq));
  }
}

TEST_CASE("free kernel solves the defining equation") {
  for (double mu0 : {0.0, 0.1}) {
    const MultiscaleParams p{1.0, mu0, 1.0};
    const int L = 3, k = 1;
    const std::int64_t B = 3;
    const FreeKernel K(1, L, k, p);
    const double eta = K.spacing();
    const double ak = free_weight(p, L, k);
    const double mbar = mu0 * std::pow(L, 2 * k);
    // Column G(., y) on a patch of whole blocks around y.
    const std::int64_t lo = -5 * B, hi = 5 * B + B - 1;
    const Site y{1};
    std::vector<std::pair<Site, Site>> pairs;
    for (std::int64_t n = lo; n <= hi; ++n) pairs.push_back({Site{n}, y});
    const auto g = K.g_converged(pairs, {}).values;
    auto G = [&](std::int64_t n) { return g[static_cast<std::size_t>(n - lo)]; };
    auto floor_div = [&](std::int64_t a) { return a >= 0 ? a / B : -((-a + B - 1) / B); };
    double worst = 0.0;
    for (std::int64_t n = lo + B; n <= hi - B; ++n) {
      const std::int64_t b0 = floor_div(n) * B;
      const cplx mean = (G(b0) + G(b0 + 1) + G(b0 + 2)) / 3.0;
      const cplx lhs = -(G(n + 1) + G(n - 1) - 2.0 * G(n)) / (eta * eta) + mbar * G(n) + ak * mean;
      const cplx rhs = (n == y[0]) ? cplx(1.0 / eta) : cplx(0.0);
      worst = std::max(worst, std::abs(lhs - rhs));
    }
    CHECK(worst <= 1e-7);
  }
}

TEST_CASE("G Q* decays at a rate independent of the spacing") {
  const double r1 = gq_rate(1), r2 = gq_rate(2);
  CHECK(r1 > 0.0);
  CHECK(r2 > 0.0);
  CHECK(std::abs(r1 - r2) / std::min(r1, r2) <= 0.2);
}

TEST_CASE("Q*Q in momentum space") {
  const auto g = make_geometry(1, 3, 1, 2);  // three blocks of three sites
  // Block indicator on the middle block: Q*Q fixes it.
  Vector v = Vector::Zero(9);
  v.segment(3, 3).setOnes();
  const Field ind(g, v);
  CHECK(qkqk_fourier_residual(ind) <= 1e-8);
  const auto Q = averaging(g, 1);
  CHECK((apply(compose(adjoint(Q), Q), ind).values - v).norm() < 1e-14);

  // Delta at one site: block mean L^{-kd} eta^{-d} on its block.
  const auto dl = delta_field(g, {4});
  CHECK(qkqk_fourier_residual(dl) <= 1e-8);
  const auto qq = apply(compose(adjoint(Q), Q), dl).values;
  for (int i = 3; i < 6; ++i) CHECK(std::abs(qq[i] - 1.0 / 3.0 * 3.0) < 1e-14);
  CHECK(std::abs(qq[0]) < 1e-15);

  // Random data on the nine interior sites of a larger patch.
  const auto g2 = make_geometry(1, 3, 1, 3);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  Vector r = Vector::Zero(27);
  for (int i = 9; i < 18; ++i) r[i] = cplx(n(rng), n(rng));
  CHECK(qkqk_fourier_residual(Field(g2, r)) <= 1e-8);

  const auto g3 = make_geometry(2, 3, 1, 2);
  Vector r2 = Vector::Zero(81);
  for (int a = 3; a < 6; ++a)
    for (int b = 3; b < 6; ++b) r2[g3.index_of({a, b})] = cplx(n(rng), n(rng));
  CHECK(qkqk_fourier_residual(Field(g3, r2)) <= 1e-8);

  CHECK_THROWS_AS(qkqk_fourier_residual(delta_field(g, {1})), std::invalid_argument);
  CHECK_THROWS_AS(qkqk_fourier_residual(delta_field(make_geometry(1, 3, 1, 1), {1})), std::invalid_argument);
}

TEST_CASE("strip function") {
  const MultiscaleParams massless{1.0, 0.0, 1.0};
  const auto h = h_function(real_z({0.0}), {0}, 1, 3, 1, massless);
  CHECK(std::isfinite(std::abs(h.H)));
  CHECK_FALSE(h.large_mass);
  CHECK(std::abs(h.H - h.H1 * h.H2 * h.H3) <= 1e-14 * std::abs(h.H));

  // Large-mass branch: F~(p) >= 1 at real p.
  const MultiscaleParams massive{1.0, 0.5, 1.0};
  for (double p : {-3.0, -1.0, 0.0, 0.5, 2.5}) {
    for (int ell : {-1, 0, 1}) {
      const auto hv = h_function(real_z({p}), {ell}, 1, 3, 1, massive);
      CHECK(hv.large_mass);
      CHECK(hv.floor_ratio >= 1.0);
    }
  }
  // The denominator has its first zero close to z = i on the imaginary axis.
  CHECK_THROWS_AS(h_function({cplx(0.0, 1.0)}, {0}, 1, 3, 1, massless), StripViolationError);
  CHECK_THROWS_AS(h_function(real_z({0.3}), {2}, 1, 3, 1, massless), std::invalid_argument);
}

TEST_CASE("strip bound is uniform in the spacing") {
  const MultiscaleParams p{1.0, 0.0, 1.0};
  std::vector<double> sups;
  for (int k = 1; k <= 3; ++k) {
    const auto rep = strip_bound_report(1, 3, k, p, 0.05, 32);
    CHECK(std::isfinite(rep.overall_sup));
    CHECK(rep.min_floor_ratio >= kStripFloor);
    CHECK(rep.weighted_sup.size() == rep.shifts.size());
    sups.push_back(rep.overall_sup);
  }
  const double hi = *std::max_element(sups.begin(), sups.end());
  const double lo = *std::min_element(sups.begin(), sups.end());
  CHECK(hi / lo <= 10.0);
  CHECK_THROWS_AS(strip_bound_report(1, 3, 1, p, 0.25, 16), std::invalid_argument);
}

TEST_CASE("technical bounds") {
  const auto rows = technical_bounds_report(16);
  REQUIRE_FALSE(rows.empty());
  bool saw_sinc = false;
  for (const auto& r : rows) {
    CHECK(std::isfinite(r.value));
    if (r.lower_bound && r.claimed > 0.0) CHECK(r.value >= r.claimed);
    if (r.lemma == "sin-z" && r.lower_bound) {
      saw_sinc = true;
      // Independent oracle: on the closed rectangle the minimum of |sin z / z| is 2/pi, at Re z = +-pi/2
      // on the real axis, and the midpoint grid samples the interior only.
      CHECK(r.value >= 2.0 / kPi);
      CHECK(r.value <= 2.0 / kPi + 0.1);
    }
  }
  CHECK(saw_sinc);
  CHECK_THROWS_AS(technical_bounds_report(2), std::invalid_argument);
}
