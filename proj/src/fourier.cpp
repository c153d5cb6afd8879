#include "lrg/fourier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace lrg {

namespace {

constexpr double kPi = std::numbers::pi;
const cplx kI(0.0, 1.0);

// Guard for genuine poles of u / Delta, relative to the scale 4 / eta^2 of the symbol.
constexpr double kPoleGuard = 1e-12;
// Largest number of reduced quadrature points (Mc^d) before giving up on convergence.
constexpr double kMaxReducedPoints = 1 << 20;

int half_width(int L, int k) { return static_cast<int>((ipow(L, k) - 1) / 2); }

void require_dim(const ZVec& z, int d, const char* what) {
  if (static_cast<int>(z.size()) != d) throw std::invalid_argument(std::string(what) + ": dimension mismatch");
}

// sin(z/2) / sin(z eta/2) for one axis, with the removable zeros at z = 2 pi n / eta
// cancelled analytically: shifting by 2 pi n / eta multiplies both sines by the same sign
// because L^k is odd.
cplx axis_ratio(cplx z, double eta) {
  const double n = std::round(z.real() * eta / (2.0 * kPi));
  const cplx w = z - 2.0 * kPi * n / eta;
  return sinc(0.5 * w) / (eta * sinc(0.5 * w * eta));
}

// sin(z/2) / sin(z eta/2 + pi ell eta), sinc form when ell = 0.
cplx shifted_ratio(cplx z, int ell, double eta) {
  if (ell == 0) return axis_ratio(z, eta);
  return std::sin(0.5 * z) / std::sin(0.5 * z * eta + kPi * ell * eta);
}

// sum_mu sin^2(z_mu eta/2 + pi ell_mu eta) + mu0/4
cplx star_sum(const ZVec& z, const std::vector<int>& ell, double eta, double mu0) {
  cplx s = 0.25 * mu0;
  for (std::size_t mu = 0; mu < z.size(); ++mu) {
    const cplx v = std::sin(0.5 * z[mu] * eta + kPi * ell[mu] * eta);
    s += v * v;
  }
  return s;
}

ZVec shifted(const ZVec& z, const std::vector<int>& ell) {
  ZVec out = z;
  for (std::size_t mu = 0; mu < z.size(); ++mu) out[mu] += 2.0 * kPi * ell[mu];
  return out;
}

ZVec negated(const ZVec& z) {
  ZVec out = z;
  for (auto& v : out) v = -v;
  return out;
}

// Contiguous row-major enumeration of {0..n-1}^d.
bool next_index(std::vector<int>& i, int n) {
  for (int mu = static_cast<int>(i.size()) - 1; mu >= 0; --mu) {
    if (++i[static_cast<std::size_t>(mu)] < n) return true;
    i[static_cast<std::size_t>(mu)] = 0;
  }
  return false;
}

}  // namespace

int TorusGrid::blocks_per_axis() const { return static_cast<int>(ipow(L, k)); }
int TorusGrid::reduced_per_axis() const { return M / blocks_per_axis(); }
double TorusGrid::spacing() const { return std::pow(static_cast<double>(L), -k); }
std::size_t TorusGrid::point_count() const {
  return static_cast<std::size_t>(ipow(M, d));
}

TorusGrid make_torus_grid(int d, int L, int k, int M) {
  if (d < 1 || d > 3) throw std::invalid_argument("torus grid needs 1 <= d <= 3");
  if (L < 3 || L % 2 == 0) throw std::invalid_argument("L must be odd and >= 3");
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  const std::int64_t B = ipow(L, k);
  if (M % B != 0) throw std::invalid_argument("M must be a multiple of L^k");
  if (M < 4 * B) throw std::invalid_argument("M must be >= 4 L^k");
  return TorusGrid{d, L, k, M};
}

cplx sinc(cplx z) {
  if (std::abs(z) < 1e-4) {
    const cplx z2 = z * z;
    return 1.0 - z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sin(z) / z;
}

cplx laplacian_symbol(const ZVec& z, double eta, double mu0) {
  cplx s = 0.25 * mu0;
  for (const cplx& v : z) {
    const cplx h = std::sin(0.5 * v * eta);
    s += h * h;
  }
  return 4.0 / (eta * eta) * s;
}

cplx u_kernel(const ZVec& z, double eta) {
  cplx u = std::pow(eta, static_cast<double>(z.size()));
  for (const cplx& v : z) {
    // (1 - e^{-iz})/(1 - e^{-iz eta}) = e^{-iz/2}/e^{-iz eta/2} * sin(z/2)/sin(z eta/2)
    u *= std::exp(-0.5 * kI * v * (1.0 - eta)) * axis_ratio(v, eta);
  }
  return u;
}

cplx u_delta(const ZVec& z, const std::vector<int>& ell, double eta, double mu0) {
  const ZVec Z = shifted(z, ell);
  const cplx lap = laplacian_symbol(Z, eta, mu0);
  if (std::abs(lap) < kPoleGuard * 4.0 / (eta * eta))
    throw PoleProximityError("u_delta evaluated at a pole of 1/Delta");
  return u_kernel(Z, eta) / lap;
}

cplx u_delta_product_form(const ZVec& z, const std::vector<int>& ell, double eta, double mu0) {
  const cplx s = star_sum(z, ell, eta, mu0);
  if (std::abs(s) < kPoleGuard) throw PoleProximityError("u_delta evaluated at a pole of 1/Delta");
  cplx h = std::pow(eta, static_cast<double>(z.size()) + 2.0) / 4.0 / s;
  for (std::size_t mu = 0; mu < z.size(); ++mu) {
    h *= std::exp(-0.5 * kI * z[mu]) / std::exp(-0.5 * kI * (z[mu] + 2.0 * kPi * ell[mu]) * eta);
    h *= shifted_ratio(z[mu], ell[mu], eta);
  }
  return h;
}

std::vector<std::vector<int>> shift_box(int d, int L, int k) {
  const int h = half_width(L, k);
  const int n = 2 * h + 1;
  std::vector<std::vector<int>> box;
  std::vector<int> i(static_cast<std::size_t>(d), 0);
  do {
    std::vector<int> ell(i);
    for (auto& v : ell) v -= h;
    box.push_back(ell);
  } while (next_index(i, n));
  return box;
}

cplx bracket(const ZVec& z, int L, int k, double mu0) {
  const double eta = std::pow(static_cast<double>(L), -k);
  cplx sum = 0.0;
  for (const auto& ell : shift_box(static_cast<int>(z.size()), L, k)) {
    const ZVec Z = shifted(z, ell);
    sum += u_delta(z, ell, eta, mu0) * u_kernel(negated(Z), eta);
  }
  return sum;
}

double free_weight(const MultiscaleParams& p, int L, int k) {
  validate(p);
  return k < 1 ? p.a : a_j(p, L, k);
}

// ---------------------------------------------------------------------------
// Fiber of the operator over one reduced momentum: M(p) = diag(Delta_ell) + a w wt^T with
// w_ell = u(p + 2 pi ell) and wt_ell = u(-(p + 2 pi ell)).

namespace {

struct Fiber {
  std::vector<cplx> w, wt, lap;
  std::size_t zero = 0;
  cplx S = 0.0;  // sum_{ell != 0} w wt / Delta
  cplx D = 0.0;  // Delta_0 + a w_0 wt_0 + a Delta_0 S
  double a = 0.0;
};

Fiber make_fiber(const ZVec& z, const std::vector<std::vector<int>>& box, std::size_t zero, double eta, double a,
                 double mu0) {
  Fiber f;
  f.zero = zero;
  f.a = a;
  const std::size_t B = box.size();
  f.w.resize(B);
  f.wt.resize(B);
  f.lap.resize(B);
  for (std::size_t b = 0; b < B; ++b) {
    const ZVec Z = shifted(z, box[b]);
    f.w[b] = u_kernel(Z, eta);
    f.wt[b] = u_kernel(negated(Z), eta);
    f.lap[b] = laplacian_symbol(Z, eta, mu0);
    if (b != zero) {
      if (std::abs(f.lap[b]) < kPoleGuard * 4.0 / (eta * eta))
        throw PoleProximityError("shifted Laplacian symbol vanishes on the fiber");
      f.S += f.w[b] * f.wt[b] / f.lap[b];
    }
  }
  f.D = f.lap[zero] + a * f.w[zero] * f.wt[zero] + a * f.lap[zero] * f.S;
  if (std::abs(f.D) < kPoleGuard * 4.0 / (eta * eta)) throw PoleProximityError("fiber determinant vanishes");
  return f;
}

// v = M(p)^{-1} g in the regularized Sherman-Morrison form (finite at Delta_0 = 0).
std::vector<cplx> fiber_solve(const Fiber& f, const std::vector<cplx>& g) {
  const std::size_t B = g.size();
  const std::size_t z0 = f.zero;
  cplx t = 0.0;  // sum_{ell != 0} wt g / Delta
  for (std::size_t b = 0; b < B; ++b)
    if (b != z0) t += f.wt[b] * g[b] / f.lap[b];
  std::vector<cplx> v(B);
  v[z0] = ((1.0 + f.a * f.S) * g[z0] - f.a * f.w[z0] * t) / f.D;
  for (std::size_t b = 0; b < B; ++b) {
    if (b == z0) continue;
    v[b] = g[b] / f.lap[b] - f.a * f.w[b] * (f.wt[z0] * g[z0] + f.lap[z0] * t) / (f.lap[b] * f.D);
  }
  return v;
}

std::vector<cplx> fiber_apply(const Fiber& f, const std::vector<cplx>& v) {
  cplx t = 0.0;
  for (std::size_t b = 0; b < v.size(); ++b) t += f.wt[b] * v[b];
  std::vector<cplx> g(v.size());
  for (std::size_t b = 0; b < v.size(); ++b) g[b] = f.lap[b] * v[b] + f.a * f.w[b] * t;
  return g;
}

// Applies a per-fiber map to torus samples.
template <class Map>
std::vector<cplx> map_fibers(const std::vector<cplx>& in, const TorusGrid& grid, const MultiscaleParams& p, Map map) {
  if (in.size() != grid.point_count()) throw std::invalid_argument("sample count does not match torus grid");
  const int d = grid.d;
  const int Mc = grid.reduced_per_axis();
  const int h = half_width(grid.L, grid.k);
  const double eta = grid.spacing();
  const double a = free_weight(p, grid.L, grid.k);
  const auto box = shift_box(d, grid.L, grid.k);
  const std::size_t zero = box.size() / 2;
  std::vector<cplx> out(in.size());
  std::vector<int> i(static_cast<std::size_t>(d), 0);
  std::vector<std::size_t> flat(box.size());
  do {
    ZVec z(static_cast<std::size_t>(d));
    for (int mu = 0; mu < d; ++mu) z[mu] = -kPi + 2.0 * kPi * i[mu] / Mc;
    for (std::size_t b = 0; b < box.size(); ++b) {
      std::size_t idx = 0;
      for (int mu = 0; mu < d; ++mu) idx = idx * grid.M + static_cast<std::size_t>(Mc * (box[b][mu] + h) + i[mu]);
      flat[b] = idx;
    }
    const Fiber f = make_fiber(z, box, zero, eta, a, p.mu0);
    std::vector<cplx> g(box.size());
    for (std::size_t b = 0; b < box.size(); ++b) g[b] = in[flat[b]];
    const std::vector<cplx> v = map(f, g);
    for (std::size_t b = 0; b < box.size(); ++b) out[flat[b]] = v[b];
  } while (next_index(i, Mc));
  return out;
}

}  // namespace

RVec torus_point(const TorusGrid& grid, const std::vector<int>& I) {
  const double eta = grid.spacing();
  RVec P(I.size());
  for (std::size_t mu = 0; mu < I.size(); ++mu) P[mu] = -kPi / eta + 2.0 * kPi * I[mu] / (eta * grid.M);
  return P;
}

std::vector<cplx> free_apply_ghat(const std::vector<cplx>& f_hat, const TorusGrid& grid, const MultiscaleParams& p) {
  return map_fibers(f_hat, grid, p, fiber_solve);
}

std::vector<cplx> free_apply_symbol(const std::vector<cplx>& v_hat, const TorusGrid& grid, const MultiscaleParams& p) {
  return map_fibers(v_hat, grid, p, fiber_apply);
}

// ---------------------------------------------------------------------------
// Free kernels.

struct FreeKernel::FiberData {
  Fiber f;
};

FreeKernel::FreeKernel(int d, int L, int k, const MultiscaleParams& p)
    : d_(d), L_(L), k_(k), eta_(std::pow(static_cast<double>(L), -k)), a_(free_weight(p, L, k)), mu0_(p.mu0) {
  if (d < 1 || d > 3) throw std::invalid_argument("free kernel needs 1 <= d <= 3");
  if (L < 3 || L % 2 == 0) throw std::invalid_argument("L must be odd and >= 3");
  if (k < 0) throw std::invalid_argument("k must be >= 0");
  box_ = shift_box(d, L, k);
  zero_ = box_.size() / 2;
}

FreeKernel::FiberData FreeKernel::fiber(const ZVec& z) const {
  return FiberData{make_fiber(z, box_, zero_, eta_, a_, mu0_)};
}

ZVec FreeKernel::reduced_point(const std::vector<int>& i, int Mc, const RVec& q) const {
  ZVec z(static_cast<std::size_t>(d_));
  for (int mu = 0; mu < d_; ++mu) z[mu] = cplx(-kPi + 2.0 * kPi * i[mu] / Mc, q.empty() ? 0.0 : q[mu]);
  return z;
}

namespace {

// Points (in eta units) whose plane waves are needed, with the root-of-unity exponent
// (ell . n mod L^k) for each shift.
struct PointTable {
  std::vector<Site> points;
  std::vector<std::vector<int>> phase;  // [point][shift]
  std::map<Site, std::size_t> index;

  std::size_t add(const Site& s) {
    auto [it, inserted] = index.emplace(s, points.size());
    if (inserted) points.push_back(s);
    return it->second;
  }
  void build(const std::vector<std::vector<int>>& box, std::int64_t B) {
    phase.assign(points.size(), std::vector<int>(box.size()));
    for (std::size_t n = 0; n < points.size(); ++n)
      for (std::size_t b = 0; b < box.size(); ++b) {
        std::int64_t s = 0;
        for (std::size_t mu = 0; mu < box[b].size(); ++mu) s += box[b][mu] * points[n][mu];
        s %= B;
        if (s < 0) s += B;
        phase[n][b] = static_cast<int>(s);
      }
  }
};

cplx plane_wave(const ZVec& z, const Site& n, double eta, double sign) {
  cplx arg = 0.0;
  for (std::size_t mu = 0; mu < z.size(); ++mu) arg += z[mu] * static_cast<double>(n[mu]);
  return std::exp(sign * kI * arg * eta);
}

std::vector<cplx> roots_of_unity(std::int64_t B, double sign) {
  std::vector<cplx> w(static_cast<std::size_t>(B));
  for (std::int64_t s = 0; s < B; ++s) w[static_cast<std::size_t>(s)] = std::exp(sign * 2.0 * kPi * kI * double(s) / double(B));
  return w;
}

void check_pairs(const std::vector<std::pair<Site, Site>>& pairs, int d) {
  for (const auto& [x, y] : pairs)
    if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
      throw std::invalid_argument("site dimension does not match the free kernel");
}

}  // namespace

std::vector<cplx> FreeKernel::g_values(const std::vector<std::pair<Site, Site>>& pairs, int Mc,
                                       const RVec& q) const {
  check_pairs(pairs, d_);
  if (!q.empty() && static_cast<int>(q.size()) != d_) throw std::invalid_argument("shift dimension mismatch");
  const std::int64_t B1 = ipow(L_, k_);
  PointTable xs, ys, ds;
  std::vector<std::array<std::size_t, 3>> slots;
  slots.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    Site dlt(x.size());
    for (std::size_t mu = 0; mu < x.size(); ++mu) dlt[mu] = x[mu] - y[mu];
    slots.push_back({xs.add(x), ys.add(y), ds.add(dlt)});
  }
  xs.build(box_, B1);
  ys.build(box_, B1);
  ds.build(box_, B1);
  const auto omega = roots_of_unity(B1, +1.0);
  const auto omega_bar = roots_of_unity(B1, -1.0);

  std::vector<cplx> acc(pairs.size(), 0.0);
  std::vector<cplx> ex(xs.points.size()), alpha(xs.points.size());
  std::vector<cplx> ey(ys.points.size()), beta(ys.points.size());
  std::vector<cplx> ed(ds.points.size()), Aprime(ds.points.size());
  std::vector<cplx> c(box_.size()), ct(box_.size()), r(box_.size());
  std::vector<int> i(static_cast<std::size_t>(d_), 0);
  do {
    const ZVec z = reduced_point(i, Mc, q);
    const Fiber f = fiber(z).f;
    for (std::size_t b = 0; b < box_.size(); ++b) {
      if (b == zero_) {
        c[b] = ct[b] = r[b] = 0.0;
        continue;
      }
      r[b] = 1.0 / f.lap[b];
      c[b] = f.w[b] * r[b];
      ct[b] = f.wt[b] * r[b];
    }
    for (std::size_t n = 0; n < xs.points.size(); ++n) {
      ex[n] = plane_wave(z, xs.points[n], eta_, +1.0);
      cplx s = 0.0;
      for (std::size_t b = 0; b < box_.size(); ++b) s += omega[static_cast<std::size_t>(xs.phase[n][b])] * c[b];
      alpha[n] = ex[n] * s;
    }
    for (std::size_t n = 0; n < ys.points.size(); ++n) {
      ey[n] = plane_wave(z, ys.points[n], eta_, -1.0);
      cplx s = 0.0;
      for (std::size_t b = 0; b < box_.size(); ++b) s += omega_bar[static_cast<std::size_t>(ys.phase[n][b])] * ct[b];
      beta[n] = ey[n] * s;
    }
    for (std::size_t n = 0; n < ds.points.size(); ++n) {
      ed[n] = plane_wave(z, ds.points[n], eta_, +1.0);
      cplx s = 0.0;
      for (std::size_t b = 0; b < box_.size(); ++b) s += omega[static_cast<std::size_t>(ds.phase[n][b])] * r[b];
      Aprime[n] = ed[n] * s;
    }
    const cplx inv_D = 1.0 / f.D;
    const cplx c00 = (1.0 + a_ * f.S) * inv_D;
    const cplx cx = -a_ * f.wt[zero_] * inv_D;
    const cplx cy = -a_ * f.w[zero_] * inv_D;
    const cplx cxy = -a_ * f.lap[zero_] * inv_D;
    for (std::size_t t = 0; t < pairs.size(); ++t) {
      const auto [nx, ny, nd] = slots[t];
      acc[t] += Aprime[nd] + ed[nd] * c00 + cx * ey[ny] * alpha[nx] + cy * ex[nx] * beta[ny] +
                cxy * alpha[nx] * beta[ny];
    }
  } while (next_index(i, Mc));
  const double norm = std::pow(static_cast<double>(Mc), -d_);
  for (auto& v : acc) v *= norm;
  return acc;
}

std::vector<cplx> FreeKernel::gq_values(const std::vector<std::pair<Site, Site>>& pairs, int Mc,
                                        const RVec& q) const {
  check_pairs(pairs, d_);
  if (!q.empty() && static_cast<int>(q.size()) != d_) throw std::invalid_argument("shift dimension mismatch");
  const std::int64_t B1 = ipow(L_, k_);
  PointTable ds;
  std::vector<std::size_t> slot;
  slot.reserve(pairs.size());
  for (const auto& [x, y] : pairs) {
    Site dlt(x.size());
    for (std::size_t mu = 0; mu < x.size(); ++mu) dlt[mu] = x[mu] - y[mu] * B1;
    slot.push_back(ds.add(dlt));
  }
  ds.build(box_, B1);
  const auto omega = roots_of_unity(B1, +1.0);
  std::vector<cplx> acc(ds.points.size(), 0.0);
  std::vector<cplx> H(box_.size());
  std::vector<int> i(static_cast<std::size_t>(d_), 0);
  do {
    const ZVec z = reduced_point(i, Mc, q);
    const Fiber f = fiber(z).f;
    for (std::size_t b = 0; b < box_.size(); ++b)
      H[b] = b == zero_ ? f.w[b] / f.D : f.w[b] * f.lap[zero_] / (f.lap[b] * f.D);
    for (std::size_t n = 0; n < ds.points.size(); ++n) {
      cplx s = 0.0;
      for (std::size_t b = 0; b < box_.size(); ++b) s += omega[static_cast<std::size_t>(ds.phase[n][b])] * H[b];
      acc[n] += plane_wave(z, ds.points[n], eta_, +1.0) * s;
    }
  } while (next_index(i, Mc));
  const double norm = std::pow(static_cast<double>(Mc), -d_);
  std::vector<cplx> out(pairs.size());
  for (std::size_t t = 0; t < pairs.size(); ++t) out[t] = acc[slot[t]] * norm;
  return out;
}

namespace {

// The last value of every batch is the on-site kernel, whose size sets the round-off scale
// of the trapezoid sums; it fixes the absolute floor of the test and is dropped afterwards.
template <class Eval>
FreeKernel::Converged converge(Eval eval, int B, int d, int M_init, double tol) {
  int Mc = std::max(8, M_init / B);
  std::vector<cplx> prev = eval(Mc);
  while (true) {
    const int next = 2 * Mc;
    if (std::pow(static_cast<double>(next), d) > kMaxReducedPoints)
      throw QuadratureConvergenceError("kernel quadrature did not reach relative tolerance " + std::to_string(tol) +
                                       " by M = " + std::to_string(Mc * B));
    std::vector<cplx> cur = eval(next);
    double scale = 0.0;
    for (const auto& v : cur) scale = std::max(scale, std::abs(v));
    bool ok = true;
    for (std::size_t t = 0; t < cur.size() && ok; ++t)
      ok = std::abs(cur[t] - prev[t]) <= tol * std::abs(cur[t]) + 1e-14 * scale;
    if (ok) {
      cur.pop_back();
      return {std::move(cur), next * B};
    }
    prev = std::move(cur);
    Mc = next;
  }
}

std::vector<std::pair<Site, Site>> with_reference(std::vector<std::pair<Site, Site>> pairs, int d) {
  pairs.push_back({Site(static_cast<std::size_t>(d), 0), Site(static_cast<std::size_t>(d), 0)});
  return pairs;
}

}  // namespace

FreeKernel::Converged FreeKernel::g_converged(const std::vector<std::pair<Site, Site>>& pairs, const RVec& q,
                                              int M_init, double tol) const {
  check_pairs(pairs, d_);
  const auto batch = with_reference(pairs, d_);
  return converge([&](int Mc) { return g_values(batch, Mc, q); }, static_cast<int>(ipow(L_, k_)), d_, M_init, tol);
}

FreeKernel::Converged FreeKernel::gq_converged(const std::vector<std::pair<Site, Site>>& pairs, const RVec& q,
                                               int M_init, double tol) const {
  check_pairs(pairs, d_);
  const auto batch = with_reference(pairs, d_);
  return converge([&](int Mc) { return gq_values(batch, Mc, q); }, static_cast<int>(ipow(L_, k_)), d_, M_init, tol);
}

cplx free_kernel_g(const Site& x, const Site& y, const TorusGrid& grid, const MultiscaleParams& p, const RVec& q) {
  const FreeKernel K(grid.d, grid.L, grid.k, p);
  return K.g_converged({{x, y}}, q, grid.M).values.front();
}

cplx free_kernel_gq(const Site& x, const Site& y, const TorusGrid& grid, const MultiscaleParams& p, const RVec& q) {
  const FreeKernel K(grid.d, grid.L, grid.k, p);
  return K.gq_converged({{x, y}}, q, grid.M).values.front();
}

// ---------------------------------------------------------------------------
// Q^* Q in momentum space.

namespace {

// Contracts axis `axis` of a row-major array with the matrix T (new_len x old_len).
std::vector<cplx> axis_transform(const std::vector<cplx>& data, std::vector<std::size_t>& shape, std::size_t axis,
                                 const std::vector<std::vector<cplx>>& T) {
  std::size_t outer = 1, inner = 1;
  for (std::size_t a = 0; a < axis; ++a) outer *= shape[a];
  for (std::size_t a = axis + 1; a < shape.size(); ++a) inner *= shape[a];
  const std::size_t old_len = shape[axis];
  const std::size_t new_len = T.size();
  std::vector<cplx> out(outer * new_len * inner, 0.0);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t r = 0; r < new_len; ++r)
      for (std::size_t c = 0; c < old_len; ++c) {
        const cplx t = T[r][c];
        if (t == 0.0) continue;
        const cplx* src = &data[(o * old_len + c) * inner];
        cplx* dst = &out[(o * new_len + r) * inner];
        for (std::size_t s = 0; s < inner; ++s) dst[s] += t * src[s];
      }
  shape[axis] = new_len;
  return out;
}

}  // namespace

double qkqk_fourier_residual(const Field& f, int M) {
  const LatticeGeometry& g = f.geometry;
  if (g.k < 1) throw std::invalid_argument("qkqk residual needs k >= 1");
  const int d = g.d;
  const std::int64_t B1 = ipow(g.L, g.k);
  const std::int64_t N = g.sites_per_axis();
  if (N < 3 * B1) throw std::invalid_argument("patch must span at least three blocks per axis");
  // The free-lattice comparison is only meaningful for data away from the patch boundary.
  for (std::size_t s = 0; s < g.site_count(); ++s) {
    if (f.values(static_cast<Eigen::Index>(s)) == 0.0) continue;
    const Site x = g.site_at(s);
    for (int mu = 0; mu < d; ++mu)
      if (x[mu] < B1 || x[mu] >= N - B1) throw std::invalid_argument("test function support too close to patch edge");
  }
  if (M == 0) {
    const std::int64_t need = 2 * (N + B1);
    M = static_cast<int>(((need + B1 - 1) / B1) * B1);
  }
  const TorusGrid grid = make_torus_grid(d, g.L, g.k, M);
  const double eta = g.spacing();

  // Spatial route: exact block means.
  const KernelOperator Q = averaging(g, g.k);
  const Field spatial = apply(compose(adjoint(Q), Q), f);

  // Forward transform f^(P) = (2 pi)^{-d/2} eta^d sum_x e^{-i P x} f(x), axis by axis.
  std::vector<std::vector<cplx>> fwd(static_cast<std::size_t>(M), std::vector<cplx>(static_cast<std::size_t>(N)));
  std::vector<std::vector<cplx>> bwd(static_cast<std::size_t>(N), std::vector<cplx>(static_cast<std::size_t>(M)));
  for (int I = 0; I < M; ++I) {
    const double P = -kPi / eta + 2.0 * kPi * I / (eta * M);
    for (std::int64_t n = 0; n < N; ++n) {
      fwd[I][n] = std::exp(-kI * P * (eta * n)) * eta / std::sqrt(2.0 * kPi);
      bwd[n][I] = std::exp(kI * P * (eta * n)) * (2.0 * kPi / (eta * M)) / std::sqrt(2.0 * kPi);
    }
  }
  std::vector<std::size_t> shape(static_cast<std::size_t>(d), static_cast<std::size_t>(N));
  std::vector<cplx> data(f.values.data(), f.values.data() + f.values.size());
  for (int mu = 0; mu < d; ++mu) data = axis_transform(data, shape, static_cast<std::size_t>(mu), fwd);

  // Momentum route: (Q^*Q f)^(P) = u(P) sum_{ell''} conj u(P + 2 pi ell'') f^(P + 2 pi ell'').
  const int Mc = grid.reduced_per_axis();
  const int h = half_width(g.L, g.k);
  const auto box = shift_box(d, g.L, g.k);
  std::vector<cplx> out(data.size());
  std::vector<int> i(static_cast<std::size_t>(d), 0);
  do {
    std::vector<std::size_t> flat(box.size());
    std::vector<cplx> w(box.size());
    cplx t = 0.0;
    for (std::size_t b = 0; b < box.size(); ++b) {
      std::size_t idx = 0;
      ZVec P(static_cast<std::size_t>(d));
      for (int mu = 0; mu < d; ++mu) {
        const int I = Mc * (box[b][mu] + h) + i[mu];
        idx = idx * static_cast<std::size_t>(M) + static_cast<std::size_t>(I);
        P[mu] = -kPi / eta + 2.0 * kPi * I / (eta * M);
      }
      flat[b] = idx;
      w[b] = u_kernel(P, eta);
      t += std::conj(w[b]) * data[idx];
    }
    for (std::size_t b = 0; b < box.size(); ++b) out[flat[b]] = w[b] * t;
  } while (next_index(i, Mc));

  for (int mu = 0; mu < d; ++mu) out = axis_transform(out, shape, static_cast<std::size_t>(mu), bwd);

  double diff = 0.0, scale = 0.0;
  for (std::size_t s = 0; s < out.size(); ++s) {
    diff = std::max(diff, std::abs(out[s] - spatial.values(static_cast<Eigen::Index>(s))));
    scale = std::max(scale, std::abs(spatial.values(static_cast<Eigen::Index>(s))));
  }
  return scale == 0.0 ? diff : diff / scale;
}

// ---------------------------------------------------------------------------
// Strip analysis.

namespace {

// The shift-independent part of H at one z: the denominator and the branch.
struct StripContext {
  int d = 1;
  double eta = 1.0, mu0 = 0.0;
  bool large_mass = false;
  cplx denom = 1.0;    // F~(z) (large mass) or F(z) (small mass)
  cplx s0 = 0.0;       // star sum at ell = 0
  double floor_ratio = 0.0;
};

StripContext strip_context(const ZVec& z, int d, int L, int k, const MultiscaleParams& p) {
  StripContext c;
  c.d = d;
  c.eta = std::pow(static_cast<double>(L), -k);
  c.mu0 = p.mu0;
  c.large_mass = 0.25 * p.mu0 >= p.c_star * c.eta * c.eta;
  const double pref = free_weight(p, L, k) * std::pow(c.eta, 2.0 * d + 2.0) / 4.0;
  const auto box = shift_box(d, L, k);
  const std::vector<int> zero(static_cast<std::size_t>(d), 0);

  auto sq_ratio = [&](const ZVec& w, const std::vector<int>& s) {
    cplx r = 1.0;
    for (int mu = 0; mu < d; ++mu) {
      const cplx v = shifted_ratio(w[mu], s[mu], c.eta);
      r *= v * v;
    }
    return r;
  };
  if (c.large_mass) {
    cplx Ft = 1.0;
    for (const auto& s : box) Ft += pref * sq_ratio(z, s) / star_sum(z, s, c.eta, c.mu0);
    c.denom = Ft;
    c.floor_ratio = std::abs(Ft);
  } else {
    // F = F1 + F2 + F3, regular at z = 0 even for mu0 = 0.
    auto F_at = [&](const ZVec& w) {
      const cplx s0 = star_sum(w, zero, c.eta, c.mu0);
      cplx F2 = 0.0;
      for (const auto& s : box)
        if (s != zero) F2 += s0 / star_sum(w, s, c.eta, c.mu0) * sq_ratio(w, s);
      return pref * sq_ratio(w, zero) + pref * F2 + s0;
    };
    c.denom = F_at(z);
    ZVec re(z.size());
    for (std::size_t mu = 0; mu < z.size(); ++mu) re[mu] = z[mu].real();
    c.floor_ratio = std::abs(c.denom) / std::abs(F_at(re));
  }
  c.s0 = star_sum(z, zero, c.eta, c.mu0);
  if (!(c.floor_ratio >= kStripFloor))
    throw StripViolationError("strip denominator fell below the floor (ratio " + std::to_string(c.floor_ratio) +
                              "); reduce q_max");
  return c;
}

HValue h_from_context(const StripContext& c, const ZVec& z, const std::vector<int>& ell) {
  HValue out;
  out.large_mass = c.large_mass;
  out.floor_ratio = c.floor_ratio;
  out.H1 = std::pow(c.eta, c.d + 2.0) / 4.0;
  cplx R = 1.0;
  bool ell_zero = true;
  for (int mu = 0; mu < c.d; ++mu) {
    out.H1 *= std::exp(-0.5 * kI * z[mu]) / std::exp(-0.5 * kI * (z[mu] + 2.0 * kPi * ell[mu]) * c.eta);
    R *= shifted_ratio(z[mu], ell[mu], c.eta);
    ell_zero = ell_zero && ell[mu] == 0;
  }
  out.H2 = 1.0 / c.denom;
  if (c.large_mass) {
    out.H3 = R / star_sum(z, ell, c.eta, c.mu0);
  } else {
    const cplx lead = ell_zero ? cplx(1.0) : c.s0 / star_sum(z, ell, c.eta, c.mu0);
    out.H3 = lead * R;
  }
  out.H = out.H1 * out.H2 * out.H3;
  return out;
}

}  // namespace

HValue h_function(const ZVec& z, const std::vector<int>& ell, int d, int L, int k, const MultiscaleParams& p) {
  require_dim(z, d, "h_function");
  if (static_cast<int>(ell.size()) != d) throw std::invalid_argument("h_function: shift dimension mismatch");
  const int hw = half_width(L, k);
  for (int v : ell)
    if (std::abs(v) > hw) throw std::invalid_argument("h_function: shift outside the admissible box");
  return h_from_context(strip_context(z, d, L, k, p), z, ell);
}
StripBoundReport strip_bound_report(int d, int L, int k, const MultiscaleParams& p, double q_max, int p_samples) {
  if (!(q_max >= 0.0 && q_max <= 0.2)) throw std::invalid_argument("q_max must lie in [0, 0.2]");
  if (p_samples < 2) throw std::invalid_argument("need at least two p samples per axis");
  StripBoundReport rep;
  rep.d = d;
  rep.L = L;
  rep.k = k;
  rep.q_max = q_max;
  rep.p_samples = p_samples;
  rep.shifts = shift_box(d, L, k);
  rep.weighted_sup.assign(rep.shifts.size(), 0.0);
  rep.min_floor_ratio = std::numeric_limits<double>::infinity();

  std::vector<RVec> qs{RVec(static_cast<std::size_t>(d), 0.0)};
  if (q_max > 0.0) {
    for (int mu = 0; mu < d; ++mu)
      for (double s : {1.0, -1.0}) {
        RVec q(static_cast<std::size_t>(d), 0.0);
        q[mu] = s * q_max;
        qs.push_back(q);
      }
    if (d > 1) {
      std::vector<int> signs(static_cast<std::size_t>(d), 0);
      do {
        RVec q(static_cast<std::size_t>(d));
        for (int mu = 0; mu < d; ++mu) q[mu] = (signs[mu] ? -1.0 : 1.0) * q_max / std::sqrt(double(d));
        qs.push_back(q);
      } while (next_index(signs, 2));
    }
  }
  std::vector<double> weight(rep.shifts.size());
  for (std::size_t b = 0; b < rep.shifts.size(); ++b) {
    double w = 1.0;
    for (int v : rep.shifts[b]) w *= std::pow(1.0 + std::abs(v), 1.0 + 2.0 / d);
    weight[b] = w;
  }
  std::vector<int> i(static_cast<std::size_t>(d), 0);
  do {
    for (const auto& q : qs) {
      ZVec z(static_cast<std::size_t>(d));
      for (int mu = 0; mu < d; ++mu) z[mu] = cplx(-kPi + (i[mu] + 0.5) * 2.0 * kPi / p_samples, q[mu]);
      const StripContext ctx = strip_context(z, d, L, k, p);
      for (std::size_t b = 0; b < rep.shifts.size(); ++b) {
        const HValue h = h_from_context(ctx, z, rep.shifts[b]);
        rep.large_mass = h.large_mass;
        rep.min_floor_ratio = std::min(rep.min_floor_ratio, h.floor_ratio);
        const double v = std::abs(h.H) * weight[b];
        if (!std::isfinite(v)) throw StripViolationError("non-finite H value in the strip");
        rep.weighted_sup[b] = std::max(rep.weighted_sup[b], v);
        if (v > rep.overall_sup) {
          rep.overall_sup = v;
          rep.argmax_z = z;
          rep.argmax_shift = rep.shifts[b];
        }
      }
    }
  } while (next_index(i, p_samples));
  return rep;
}

// ---------------------------------------------------------------------------
// Technical bounds: worst cases on midpoint grids.

namespace {

double midpoint(double lo, double hi, int i, int n) { return lo + (hi - lo) * (i + 0.5) / n; }

cplx sinc_derivative(cplx z) {
  if (std::abs(z) < 1e-3) {
    const cplx z2 = z * z;
    return -z / 3.0 + z * z2 / 30.0;
  }
  return (z * std::cos(z) - std::sin(z)) / (z * z);
}

}  // namespace

std::vector<TechnicalBoundRow> technical_bounds_report(int n) {
  if (n < 4) throw std::invalid_argument("technical bounds need n >= 4");
  std::vector<TechnicalBoundRow> rows;

  // sin(z)/z on Re z in [-pi/2, pi/2], |Im z| <= 1.
  {
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, der = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cplx z(midpoint(-kPi / 2, kPi / 2, i, n), midpoint(-1.0, 1.0, j, n));
        const double s = std::abs(sinc(z));
        lo = std::min(lo, s);
        hi = std::max(hi, s);
        der = std::max(der, std::abs(sinc_derivative(z)));
      }
    rows.push_back({"sin-z", "min |sinc(z)| (c_-)", 0, lo, 0.2, true});
    rows.push_back({"sin-z", "max |sinc(z)| (c_+)", 0, hi, 0.0, false});
    rows.push_back({"sin-z", "max |sinc'(z)| (c_0)", 0, der, 0.0, false});
  }

  // Shifted sine sums for ell != 0, |q| <= 1/d, delta >= 0.
  for (int d = 1; d <= 2; ++d) {
    for (int k = 1; k <= 3; ++k) {
      const double eta = std::pow(3.0, -k);
      const auto box = shift_box(d, 3, k);
      const int nq = d == 1 ? std::max(2, n / 4) : std::max(2, n / 8);  // keeps the d = 2 sweep bounded
      double r_len = 0.0, r_delta = 0.0;
      std::vector<int> ip(static_cast<std::size_t>(d), 0);
      do {
        std::vector<int> iq(static_cast<std::size_t>(d), 0);
        do {
          ZVec z(static_cast<std::size_t>(d));
          for (int mu = 0; mu < d; ++mu)
            z[mu] = cplx(midpoint(-kPi, kPi, ip[mu], n), midpoint(-1.0 / d, 1.0 / d, iq[mu], nq));
          for (const auto& ell : box) {
            if (std::all_of(ell.begin(), ell.end(), [](int v) { return v == 0; })) continue;
            double len = 0.0;
            cplx s = 0.0;
            for (int mu = 0; mu < d; ++mu) {
              const cplx w = 0.5 * z[mu] * eta + kPi * ell[mu] * eta;
              len += std::norm(w);
              s += std::sin(w) * std::sin(w);
            }
            for (double delta : {0.0, 0.01, 0.1, 1.0, 10.0}) {
              const double den = std::abs(s + delta);
              r_len = std::max(r_len, len / den);
              r_delta = std::max(r_delta, delta / den);
            }
          }
        } while (next_index(iq, nq));
      } while (next_index(ip, n));
      const std::string tag = "d=" + std::to_string(d);
      rows.push_back({"sum-ratio", tag + " max sum|w|^2 / |sum sin^2(w) + delta|", k, r_len, 0.0, false});
      rows.push_back({"sum-ratio", tag + " max delta / |sum sin^2(w) + delta|", k, r_delta, 0.0, false});
    }
  }

  // |z - 2 pi ell| >= (pi/2)(1 + |ell|) and |1 + 2 pi ell / z| >= (1 + |ell|)/6.
  {
    double nz = std::numeric_limits<double>::infinity(), sa = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cplx z(midpoint(-kPi, kPi, i, n), midpoint(-1.0, 1.0, j, n));
        for (int ell = -20; ell <= 20; ++ell) {
          const double w = 1.0 + std::abs(ell);
          if (ell != 0) nz = std::min(nz, std::abs(z - 2.0 * kPi * ell) / (kPi / 2 * w));
          sa = std::min(sa, std::abs(1.0 + 2.0 * kPi * ell / z) / (w / 6.0));
        }
      }
    rows.push_back({"non-zero-ell-bound", "min |z - 2 pi l| / ((pi/2)(1+|l|))", 0, nz, 1.0, true});
    rows.push_back({"simple-analyticity", "min |1 + 2 pi l / z| / ((1+|l|)/6)", 0, sa, 1.0, true});
  }

  // Derivative bound for the squared sine ratio (one axis; the d-dimensional product factorizes).
  for (int k = 1; k <= 3; ++k) {
    const double eta = std::pow(3.0, -k);
    const int hw = half_width(3, k);
    double v0 = 0.0, v1 = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        const cplx z(midpoint(-kPi, kPi, i, n), midpoint(-1.0, 1.0, j, n));
        for (int ell = -hw; ell <= hw; ++ell) {
          const cplx R = shifted_ratio(z, ell, eta);
          const cplx w = 0.5 * z * eta + kPi * ell * eta;
          cplx dR;
          if (ell == 0) {
            // Taylor-stable form of the numerator, cf. the sinc rewriting.
            const cplx zh = 0.5 * z;
            const cplx num = 0.25 * z * eta * (std::cos(zh) * sinc(w) - std::cos(w) * sinc(zh));
            dR = num / (std::pow(sinc(w), 2) * w * w);
          } else {
            dR = (0.5 * std::cos(0.5 * z) * std::sin(w) - 0.5 * eta * std::cos(w) * std::sin(0.5 * z)) /
                 (std::sin(w) * std::sin(w));
          }
          const double weight = std::pow(eta, 2) * std::pow(1.0 + std::abs(ell), 2);
          v0 = std::max(v0, std::abs(R * R) * weight);
          v1 = std::max(v1, std::abs(2.0 * R * dR) * weight);
        }
      }
    rows.push_back({"complex-derivative", "max |ratio^2| eta^2 (1+|l|)^2", k, v0, 0.0, false});
    rows.push_back({"complex-derivative", "max |d ratio^2| eta^2 (1+|l|)^2", k, v1, 0.0, false});
  }
  return rows;
}

}  // namespace lrg
