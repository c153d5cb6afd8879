#include "lrg/decay.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace lrg {

namespace {

bool is_zero(const std::vector<double>& q) {
  return std::all_of(q.begin(), q.end(), [](double v) { return v == 0.0; });
}

Eigen::VectorXd weights(const LatticeGeometry& geom, const std::vector<double>& q) {
  if (static_cast<int>(q.size()) != geom.d) throw std::invalid_argument("q dimension does not match lattice");
  const Eigen::Index n = static_cast<Eigen::Index>(geom.site_count());
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto x = geom.coordinates(geom.site_at(static_cast<std::size_t>(i)));
    double s = 0.0;
    for (int mu = 0; mu < geom.d; ++mu) s += q[mu] * x[mu];
    w(i) = std::exp(s);
  }
  return w;
}

double spectral_norm(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

}  // namespace

KernelOperator exponential_weight(const LatticeGeometry& geom, const std::vector<double>& q) {
  const Eigen::VectorXd w = weights(geom, q);
  return KernelOperator::from_matrix(geom, geom, w.cast<cplx>().asDiagonal().toDenseMatrix());
}

KernelOperator conjugate(const KernelOperator& A, const std::vector<double>& q) {
  if (!(A.source() == A.target())) throw std::invalid_argument("conjugate needs a square operator");
  if (is_zero(q)) return A;
  const Eigen::VectorXd w = weights(A.source(), q);
  const Matrix K = w.cwiseInverse().cast<cplx>().asDiagonal() * A.kernel() * w.cast<cplx>().asDiagonal();
  return KernelOperator(A.source(), A.target(), K);
}

KernelOperator conjugated_operator(const LatticeGeometry& geom, const MultiscaleParams& p, const std::vector<double>& q) {
  for (double v : q)
    if (std::abs(v) > 1.0) throw std::invalid_argument("|q| must be <= 1");
  return conjugate(defining_operator(geom, p), q);
}

std::vector<double> default_q_grid() { return {0.0, 0.01, -0.01, 0.02, -0.02, 0.05, -0.05, 0.1, -0.1, 0.2, -0.2}; }

CtReport ct_bound_report(const LatticeGeometry& geom, const MultiscaleParams& p,
                         const std::vector<std::vector<double>>& q_list, std::uint64_t seed) {
  if (q_list.empty()) throw std::invalid_argument("q_list must not be empty");
  CtReport rep;
  rep.seed = seed;
  const KernelOperator G = green_neumann(geom, p);
  for (const auto& q : q_list) {
    for (double v : q)
      if (std::abs(v) > 0.2) throw std::invalid_argument("q components must lie in [-0.2, 0.2]");
    CtRow row;
    row.q = q;
    const KernelOperator D = conjugated_operator(geom, p, q);
    const KernelOperator Gq = conjugate(G, q);
    const Matrix Dm = D.matrix();
    Eigen::JacobiSVD<Matrix> svd(Dm);
    row.min_singular_value = svd.singularValues()(svd.singularValues().size() - 1);
    row.bound_constant = spectral_norm(Gq.matrix());
    if (!std::isfinite(row.bound_constant))
      throw std::runtime_error("conjugated Green function norm blew up; q is outside the coercive range");
    const Matrix sym = 0.5 * (Dm + Dm.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
    row.coercivity = es.eigenvalues()(0);
    row.inverse_defect = relative_difference(invert(D), Gq);
    rep.max_violation = std::max(rep.max_violation, row.inverse_defect);
    rep.rows.push_back(row);
  }

  // Unit-box block norms of G versus label distance.
  const LatticeGeometry boxes = coarse_geometry(geom, geom.k);
  const std::size_t nb = boxes.site_count();
  std::vector<std::vector<Eigen::Index>> members(nb);
  for (std::size_t s = 0; s < geom.site_count(); ++s)
    members[boxes.index_of(block_label(geom, geom.k, geom.site_at(s)))].push_back(static_cast<Eigen::Index>(s));
  const Matrix Gm = G.matrix();
  auto block = [&](std::size_t a, std::size_t b) {
    Matrix B(static_cast<Eigen::Index>(members[a].size()), static_cast<Eigen::Index>(members[b].size()));
    for (std::size_t i = 0; i < members[a].size(); ++i)
      for (std::size_t j = 0; j < members[b].size(); ++j)
        B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = Gm(members[a][i], members[b][j]);
    return B;
  };
  std::vector<ProfilePoint> pts;
  for (std::size_t a = 0; a < nb; ++a)
    for (std::size_t b = 0; b < nb; ++b) {
      if (a == b) continue;
      pts.push_back({site_dist(boxes, boxes.site_at(a), boxes.site_at(b)), spectral_norm(block(a, b))});
    }
  // Few label distances exist on small lattices, so this fit only needs two of them.
  const auto env = envelope(pts);
  if (env.size() < 2) throw std::invalid_argument("c1 fit needs at least two distinct box distances");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(env.size()), 2);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(env.size()));
  for (std::size_t i = 0; i < env.size(); ++i) {
    A(static_cast<Eigen::Index>(i), 0) = 1.0;
    A(static_cast<Eigen::Index>(i), 1) = env[i].distance;
    rhs(static_cast<Eigen::Index>(i)) = std::log(env[i].magnitude);
  }
  const Eigen::VectorXd coef = A.colPivHouseholderQr().solve(rhs);
  rep.c1 = -coef(1);
  rep.c1_log_prefactor = coef(0);

  // Seeded random fields supported in single boxes.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double vol = geom.cell_volume();
  for (std::size_t a = 0; a < nb; ++a)
    for (std::size_t b = 0; b < nb; ++b) {
      Vector f = Vector::Zero(static_cast<Eigen::Index>(geom.site_count()));
      Vector g = f;
      for (auto i : members[a]) f(i) = cplx(normal(rng), normal(rng));
      for (auto i : members[b]) g(i) = cplx(normal(rng), normal(rng));
      const cplx pairing = vol * f.dot(Gm * g);
      const double nf = std::sqrt(vol) * f.norm(), ng = std::sqrt(vol) * g.norm();
      const double dist = site_dist(boxes, boxes.site_at(a), boxes.site_at(b));
      rep.random_constant = std::max(rep.random_constant, std::abs(pairing) * std::exp(rep.c1 * dist) / (nf * ng));
    }
  return rep;
}

std::vector<ProfilePoint> decay_profile(const LatticeGeometry& geom, const MultiscaleParams& p,
                                        const SourceSpec& source) {
  const Site origin(static_cast<std::size_t>(geom.d), 0);
  const Site where = source.where.empty() ? origin : source.where;
  std::vector<Site> support;
  if (source.kind == SourceSpec::Kind::site) {
    if (!geom.contains(where)) throw std::out_of_range("source site outside the lattice");
    support.push_back(where);
  } else {
    if (!coarse_geometry(geom, geom.k).contains(where)) throw std::out_of_range("source block outside Omega_k");
    support = block_sites(geom, geom.k, where);
  }
  Field f = Field::zeros(geom);
  std::vector<std::vector<double>> supp_coords;
  for (const Site& s : support) {
    f.values(static_cast<Eigen::Index>(geom.index_of(s))) = 1.0;
    supp_coords.push_back(geom.coordinates(s));
  }
  const Field u = apply(green_neumann(geom, p), f);
  std::vector<ProfilePoint> out;
  out.reserve(geom.site_count());
  for (std::size_t s = 0; s < geom.site_count(); ++s)
    out.push_back({dist_to_set(geom.coordinates(geom.site_at(s)), supp_coords),
                   std::abs(u.values(static_cast<Eigen::Index>(s)))});
  return out;
}

std::vector<ProfilePoint> envelope(const std::vector<ProfilePoint>& profile) {
  std::map<long long, ProfilePoint> best;
  for (const auto& pt : profile) {
    const long long key = std::llround(pt.distance * 1e9);
    auto it = best.find(key);
    if (it == best.end())
      best.emplace(key, pt);
    else if (pt.magnitude > it->second.magnitude)
      it->second.magnitude = pt.magnitude;
  }
  std::vector<ProfilePoint> out;
  out.reserve(best.size());
  for (const auto& [key, pt] : best) out.push_back(pt);
  return out;
}

DecayFit fit_decay(const std::vector<ProfilePoint>& profile, const DecayWindow& window) {
  if (profile.empty()) throw std::invalid_argument("empty decay profile");
  if (!(window.max_fraction > 0.0 && window.max_fraction <= 1.0))
    throw std::invalid_argument("window max_fraction must lie in (0, 1]");
  double far = 0.0;
  for (const auto& pt : profile) far = std::max(far, pt.distance);
  const double hi = window.max_fraction * far;
  std::vector<double> xs, ys;
  for (const auto& pt : profile) {
    if (pt.distance < window.min || pt.distance > hi * (1.0 + 1e-12)) continue;
    if (!(pt.magnitude > 0.0)) throw std::invalid_argument("decay profile has a non-positive magnitude in the window");
    xs.push_back(pt.distance);
    ys.push_back(std::log(pt.magnitude));
  }
  if (xs.size() < 5)
    throw std::invalid_argument("degenerate fit window: " + std::to_string(xs.size()) + " points (need >= 5)");
  Eigen::MatrixXd A(static_cast<Eigen::Index>(xs.size()), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    A(static_cast<Eigen::Index>(i), 0) = 1.0;
    A(static_cast<Eigen::Index>(i), 1) = xs[i];
    b(static_cast<Eigen::Index>(i)) = ys[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  DecayFit fit;
  fit.log_prefactor = c(0);
  fit.rate = -c(1);
  fit.d_min = *std::min_element(xs.begin(), xs.end());
  fit.d_max = *std::max_element(xs.begin(), xs.end());
  fit.rms_residual = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(xs.size()));
  fit.point_count = static_cast<int>(xs.size());
  return fit;
}

std::vector<LinfRow> linf_report(const std::vector<LatticeGeometry>& family, const MultiscaleParams& p,
                                 const DecayWindow& window) {
  std::vector<LinfRow> rows;
  for (const auto& g : family) {
    LinfRow row{g, {}, 0.0};
    const auto profile = decay_profile(g, p);
    row.fit = fit_decay(envelope(profile), window);
    for (const auto& pt : profile)  // ||f||_inf = 1 for the indicator source
      row.max_ratio = std::max(row.max_ratio, pt.magnitude / std::exp(-row.fit.rate * pt.distance));
    rows.push_back(row);
  }
  return rows;
}

double rate_drift(double r1, double r2) {
  const double lo = std::min(r1, r2);
  if (!(lo > 0.0)) throw std::invalid_argument("rate drift needs positive rates");
  return std::abs(r1 - r2) / lo;
}

}  // namespace lrg
