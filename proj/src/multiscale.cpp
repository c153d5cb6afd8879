#include "lrg/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace lrg {

namespace {

double Lpow(int L, double e) { return std::pow(static_cast<double>(L), e); }

// Q^* Q for the j-step averaging of geom.
KernelOperator projector(const LatticeGeometry& geom, int j) {
  const KernelOperator Q = averaging(geom, j);
  return compose(adjoint(Q), Q);
}

}  // namespace

void validate(const MultiscaleParams& p) {
  if (!(p.a > 0.0)) throw std::invalid_argument("a must be > 0");
  if (!(p.mu0 >= 0.0)) throw std::invalid_argument("mu0 must be >= 0");
  if (!(p.c_star > 0.0)) throw std::invalid_argument("c_star must be > 0");
}

std::vector<double> a_sequence(double a, int L, int j_max) {
  if (!(a > 0.0)) throw std::invalid_argument("a must be > 0");
  if (L < 3) throw std::invalid_argument("L must be >= 3");
  if (j_max < 1) throw std::invalid_argument("j_max must be >= 1");
  std::vector<double> seq(static_cast<std::size_t>(j_max) + 1, 0.0);
  const double aL = a / (static_cast<double>(L) * L);
  seq[1] = a;
  for (int j = 1; j < j_max; ++j) seq[j + 1] = a * seq[j] / (aL + seq[j]);
  return seq;
}

double a_closed_form(double a, int L, int j) {
  const double L2 = 1.0 / (static_cast<double>(L) * L);
  return a * (1.0 - L2) / (1.0 - std::pow(L2, j));
}

double a_j(const MultiscaleParams& p, int L, int j) {
  if (j < 1) throw std::invalid_argument("a_j needs j >= 1");
  return a_sequence(p.a, L, j)[static_cast<std::size_t>(j)];
}

double mu_bar(const MultiscaleParams& p, int L, int k) { return Lpow(L, 2.0 * k) * p.mu0; }

KernelOperator regularized_operator(const LatticeGeometry& geom, double mass, double weight, int j) {
  KernelOperator op = shift(scale(neumann_laplacian(geom), -1.0), mass);
  return add(op, scale(projector(geom, j), weight));
}

KernelOperator defining_operator(const LatticeGeometry& geom, const MultiscaleParams& p) {
  validate(p);
  if (geom.k < 1) {
    // k = 0: a_0 is not defined by the recursion; the unit lattice uses a itself.
    return regularized_operator(geom, p.mu0, p.a, 0);
  }
  return regularized_operator(geom, mu_bar(p, geom.L, geom.k), a_j(p, geom.L, geom.k), geom.k);
}

KernelOperator green_neumann(const LatticeGeometry& geom, const MultiscaleParams& p) {
  return invert(defining_operator(geom, p));
}

KernelOperator green_j(const LatticeGeometry& geom, const MultiscaleParams& p, int j) {
  validate(p);
  if (j < 1 || j > geom.m) throw std::out_of_range("green_j needs 1 <= j <= m");
  const double block = Lpow(geom.L, j - geom.k);  // L^j eta
  const double w = a_j(p, geom.L, j) / (block * block);
  return invert(regularized_operator(geom, mu_bar(p, geom.L, geom.k), w, j));
}

double green_scaling_residual(const LatticeGeometry& geom, const MultiscaleParams& p, int j) {
  if (j < 1 || j > geom.k) throw std::out_of_range("scaling identity needs 1 <= j <= k");
  const int ell = geom.k - j;
  const double lambda = Lpow(geom.L, ell);
  const KernelOperator S = scaling_unitary(geom, ell);
  const KernelOperator Gs = green_neumann(scaled_geometry(geom, ell), p);
  const KernelOperator rhs = scale(compose(adjoint(S), compose(Gs, S)), 1.0 / (lambda * lambda));
  return relative_difference(rhs, green_j(geom, p, j));
}

RgOperators rg_operators(const LatticeGeometry& geom, const MultiscaleParams& p, int j) {
  validate(p);
  if (j < 1 || j > geom.k) throw std::out_of_range("rg_operators needs 1 <= j <= k");
  const int L = geom.L;
  const double block = Lpow(L, j - geom.k);  // L^j eta
  const double aj = a_j(p, L, j);
  const double att = aj / (block * block);
  const double a1t = p.a / (block * block);
  const LatticeGeometry Oj = coarse_geometry(geom, j);
  const KernelOperator Qj = averaging(geom, j);
  const KernelOperator Gj = green_j(geom, p, j);
  const KernelOperator Delta = add(scale(KernelOperator::identity(Oj), att),
                                   scale(compose(Qj, compose(Gj, adjoint(Qj))), -att * att));

  // Rescaled lattice lambda_j Omega, on which the level-j quantities have unit blocks.
  const int ell = geom.k - j;
  const LatticeGeometry O = scaled_geometry(geom, ell);
  const LatticeGeometry O_j = coarse_geometry(O, j);
  const KernelOperator QO = averaging(O, j);
  const KernelOperator GO = green_neumann(O, p);
  const KernelOperator H = scale(compose(GO, adjoint(QO)), aj);
  const KernelOperator Delta_scaled = add(scale(KernelOperator::identity(O_j), aj),
                                          scale(compose(QO, compose(GO, adjoint(QO))), -aj * aj));

  RgOperators ops{j, att, a1t, Gj, Delta, {}, {}, {}, {}, H, Delta_scaled, {}, {}};
  if (j + 1 <= geom.m) {
    const KernelOperator Qc = averaging(Oj, 1);
    const KernelOperator QcQc = compose(adjoint(Qc), Qc);
    const double next_block = Lpow(L, j + 1 - geom.k);
    ops.C_j = invert(add(Delta, scale(QcQc, p.a / (next_block * next_block))));
    const double L2 = 1.0 / (static_cast<double>(L) * L);
    ops.A_j = invert(shift(scale(QcQc, a1t * L2), att));
    ops.A_j_closed = shift(scale(QcQc, 1.0 / (att + a1t * L2) - 1.0 / att), 1.0 / att);
    ops.G_next = green_j(geom, p, j + 1);

    const KernelOperator QOc = averaging(O_j, 1);
    ops.C_scaled = invert(add(Delta_scaled, scale(compose(adjoint(QOc), QOc), p.a * L2)));
    ops.C_prime_j = compose(H, compose(*ops.C_scaled, adjoint(H)));
  }
  return ops;
}

double rg_step_residual(const LatticeGeometry& geom, const MultiscaleParams& p, int j) {
  if (j < 1 || j > geom.k - 1) throw std::out_of_range("rg_step_residual needs 1 <= j <= k-1");
  const RgOperators ops = rg_operators(geom, p, j);
  const KernelOperator Qj = averaging(geom, j);
  const KernelOperator middle = compose(adjoint(Qj), compose(*ops.C_j, Qj));
  const KernelOperator rhs = add(scale(compose(ops.G_j, compose(middle, ops.G_j)), ops.a_tilde_jj * ops.a_tilde_jj), ops.G_j);
  return relative_difference(rhs, *ops.G_next);
}

double c_identity_residual(const RgOperators& ops, const LatticeGeometry& geom) {
  if (!ops.C_j) throw std::logic_error("fluctuation-covariance identity needs the next coarse lattice");
  const KernelOperator Qj = averaging(geom, ops.j);
  const KernelOperator& A = *ops.A_j;
  const KernelOperator inner_op = compose(Qj, compose(*ops.G_next, adjoint(Qj)));
  const KernelOperator rhs = add(A, scale(compose(A, compose(inner_op, A)), ops.a_tilde_jj * ops.a_tilde_jj));
  return relative_difference(rhs, *ops.C_j);
}

double c_identity_residual(const LatticeGeometry& geom, const MultiscaleParams& p, int j) {
  return c_identity_residual(rg_operators(geom, p, j), geom);
}

double a_closed_form_residual(const RgOperators& ops) {
  if (!ops.A_j) throw std::logic_error("A_j needs the next coarse lattice");
  return relative_difference(*ops.A_j_closed, *ops.A_j);
}

double ScalingResiduals::max() const {
  return std::max({de_scaling, q_scaling, g_scaling, dgc_delta, dgc_c});
}

ScalingResiduals scaling_residuals(const LatticeGeometry& geom, const MultiscaleParams& p, int j) {
  if (j < 1 || j > geom.k) throw std::out_of_range("scaling_residuals needs 1 <= j <= k");
  ScalingResiduals r;
  const int ell = geom.k - j;
  const double lambda = Lpow(geom.L, ell);
  const KernelOperator S = scaling_unitary(geom, ell);
  const LatticeGeometry O = scaled_geometry(geom, ell);

  const KernelOperator lap = neumann_laplacian(geom);
  const KernelOperator lap_scaled =
      scale(compose(adjoint(S), compose(neumann_laplacian(O), S)), lambda * lambda);
  r.de_scaling = relative_difference(lap_scaled, lap);

  const KernelOperator Sj = scaling_unitary(coarse_geometry(geom, j), ell);
  r.q_scaling = relative_difference(compose(averaging(O, j), S), compose(Sj, averaging(geom, j)));

  r.g_scaling = green_scaling_residual(geom, p, j);

  const RgOperators ops = rg_operators(geom, p, j);
  r.dgc_delta = relative_difference(
      scale(compose(Sj, compose(ops.Delta_j, adjoint(Sj))), 1.0 / (lambda * lambda)), ops.Delta_scaled);
  if (ops.C_j) {
    r.dgc_c = relative_difference(scale(compose(Sj, compose(*ops.C_j, adjoint(Sj))), lambda * lambda),
                                  *ops.C_scaled);
  }
  return r;
}

std::vector<Site> sample_sites(const LatticeGeometry& geom) {
  const std::int64_t N = geom.sites_per_axis();
  std::set<Site> out;
  const std::size_t corners = std::size_t{1} << geom.d;
  for (std::size_t c = 0; c < corners; ++c) {
    Site corner(geom.d), orthant(geom.d);
    for (int mu = 0; mu < geom.d; ++mu) {
      const bool hi = (c >> mu) & 1U;
      corner[mu] = hi ? N - 1 : 0;
      orthant[mu] = hi ? (3 * N) / 4 : N / 4;
    }
    out.insert(corner);
    out.insert(orthant);
  }
  out.insert(Site(static_cast<std::size_t>(geom.d), N / 2));
  return {out.begin(), out.end()};
}

Matrix telescope_matrix(const LatticeGeometry& geom, const MultiscaleParams& p) {
  if (geom.k < 1) throw std::out_of_range("telescope needs k >= 1");
  const int k = geom.k;
  auto lambda = [&](int j) { return Lpow(geom.L, k - j); };
  // The rescaled fields f_lambda(x) = f(x / lambda) share the value vector of f, so every
  // term acts on value vectors directly.
  Matrix sum = green_neumann(scaled_geometry(geom, k - 1), p).matrix() / (lambda(1) * lambda(1));
  for (int j = 1; j <= k - 1; ++j) {
    const RgOperators ops = rg_operators(geom, p, j);
    sum += ops.C_prime_j->matrix() / (lambda(j) * lambda(j));
  }
  return sum;
}

double rg_telescope_residual_for_field(const LatticeGeometry& geom, const MultiscaleParams& p, const Field& f) {
  const Matrix T = telescope_matrix(geom, p);
  const Vector lhs = apply(green_neumann(geom, p), f).values;
  return (lhs - T * f.values).norm() / lhs.norm();
}

double rg_telescope_residual(const LatticeGeometry& geom, const MultiscaleParams& p) {
  const Matrix T = telescope_matrix(geom, p);
  const KernelOperator G = green_neumann(geom, p);
  double worst = 0.0;
  for (const Site& x : sample_sites(geom)) {
    const Field f = delta_field(geom, x);
    const Vector lhs = apply(G, f).values;
    worst = std::max(worst, (lhs - T * f.values).norm() / lhs.norm());
  }
  return worst;
}

std::vector<PositivityRow> positivity_report(const std::vector<LatticeGeometry>& family, const MultiscaleParams& p) {
  std::vector<PositivityRow> rows;
  for (const LatticeGeometry& g : family) {
    PositivityRow r{g};
    r.lambda_min = min_eigenvalue(defining_operator(g, p));
    r.lambda_min_ref = min_eigenvalue(shift(scale(neumann_laplacian(g), -1.0), 1.0));
    r.c = r.lambda_min / r.lambda_min_ref;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace lrg
