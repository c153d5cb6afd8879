#include "lrg/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace lrg {

namespace {

void require_same(const LatticeGeometry& a, const LatticeGeometry& b, const char* what) {
  if (!(a == b)) throw std::invalid_argument(std::string(what) + ": geometry mismatch " + a.describe() + " vs " + b.describe());
}

Eigen::Index count(const LatticeGeometry& g) { return static_cast<Eigen::Index>(g.site_count()); }

}  // namespace

Field::Field(LatticeGeometry g, Vector v) : geometry(g), values(std::move(v)) {
  if (values.size() != count(geometry)) throw std::invalid_argument("field size does not match lattice");
}

Field Field::zeros(const LatticeGeometry& g) { return Field(g, Vector::Zero(count(g))); }

Field Field::constant(const LatticeGeometry& g, cplx c) { return Field(g, Vector::Constant(count(g), c)); }

KernelOperator::KernelOperator(LatticeGeometry source, LatticeGeometry target, Matrix kernel)
    : source_(source), target_(target), kernel_(std::move(kernel)) {
  if (kernel_.rows() != count(target_) || kernel_.cols() != count(source_))
    throw std::invalid_argument("kernel shape does not match lattices");
}

KernelOperator KernelOperator::from_matrix(LatticeGeometry source, LatticeGeometry target, const Matrix& action) {
  return KernelOperator(source, target, action / source.cell_volume());
}

KernelOperator KernelOperator::identity(const LatticeGeometry& g) {
  return from_matrix(g, g, Matrix::Identity(count(g), count(g)));
}

Matrix KernelOperator::matrix() const { return kernel_ * source_.cell_volume(); }

cplx KernelOperator::operator()(const Site& x, const Site& xp) const {
  return kernel_(static_cast<Eigen::Index>(target_.index_of(x)), static_cast<Eigen::Index>(source_.index_of(xp)));
}

Field delta_field(const LatticeGeometry& g, const Site& x) {
  Field f = Field::zeros(g);
  f.values(static_cast<Eigen::Index>(g.index_of(x))) = 1.0 / g.cell_volume();
  return f;
}

cplx inner(const Field& f, const Field& g) {
  require_same(f.geometry, g.geometry, "inner");
  return f.geometry.cell_volume() * f.values.dot(g.values);
}

double norm(const Field& f) { return std::sqrt(f.geometry.cell_volume()) * f.values.norm(); }

Field apply(const KernelOperator& A, const Field& f) {
  require_same(A.source(), f.geometry, "apply");
  return Field(A.target(), A.source().cell_volume() * (A.kernel() * f.values));
}

KernelOperator compose(const KernelOperator& A, const KernelOperator& B) {
  require_same(A.source(), B.target(), "compose");
  return KernelOperator(B.source(), A.target(), A.source().cell_volume() * (A.kernel() * B.kernel()));
}

KernelOperator adjoint(const KernelOperator& A) {
  return KernelOperator(A.target(), A.source(), A.kernel().adjoint());
}

KernelOperator add(const KernelOperator& A, const KernelOperator& B) {
  require_same(A.source(), B.source(), "add");
  require_same(A.target(), B.target(), "add");
  return KernelOperator(A.source(), A.target(), A.kernel() + B.kernel());
}

KernelOperator scale(const KernelOperator& A, cplx s) {
  return KernelOperator(A.source(), A.target(), s * A.kernel());
}

KernelOperator shift(const KernelOperator& A, cplx s) {
  require_same(A.source(), A.target(), "shift");
  Matrix K = A.kernel();
  K.diagonal().array() += s / A.source().cell_volume();
  return KernelOperator(A.source(), A.target(), std::move(K));
}

KernelOperator invert(const KernelOperator& A, double* condition, double rcond_floor) {
  require_same(A.source(), A.target(), "invert");
  const Matrix M = A.matrix();
  Eigen::PartialPivLU<Matrix> lu(M);
  const double rc = lu.rcond();
  if (condition) *condition = rc > 0 ? 1.0 / rc : INFINITY;
  if (!(rc >= rcond_floor))
    throw SingularOperatorError("operator is numerically singular (condition estimate " +
                                    std::to_string(rc > 0 ? 1.0 / rc : INFINITY) + ")",
                                rc > 0 ? 1.0 / rc : INFINITY);
  return KernelOperator::from_matrix(A.target(), A.source(), lu.inverse());
}

double self_adjoint_defect(const KernelOperator& A) {
  require_same(A.source(), A.target(), "self_adjoint_defect");
  const double n = A.kernel().norm();
  if (n == 0.0) return 0.0;
  return (A.kernel() - A.kernel().adjoint()).norm() / n;
}

double relative_difference(const KernelOperator& A, const KernelOperator& B) {
  require_same(A.source(), B.source(), "relative_difference");
  require_same(A.target(), B.target(), "relative_difference");
  const double n = B.kernel().norm();
  const double diff = (A.kernel() - B.kernel()).norm();
  return n == 0.0 ? diff : diff / n;
}

SpectrumReport spectrum(const KernelOperator& A) {
  const double defect = self_adjoint_defect(A);
  if (defect > kSelfAdjointTolerance)
    throw std::invalid_argument("operator is not self-adjoint (defect " + std::to_string(defect) + ")");
  Matrix M = A.matrix();
  M = 0.5 * (M + M.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  SpectrumReport r;
  r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  r.min_eigenvalue = r.eigenvalues.front();
  return r;
}

double min_eigenvalue(const KernelOperator& A) { return spectrum(A).min_eigenvalue; }

namespace {

// Matrix of a one-step difference along `axis`. direction = +1 gives the forward difference
// f(x+e) - f(x); direction = -1 gives f(x) - f(x-e). Missing neighbours are either clamped
// (Neumann) or zero (free interior).
Matrix difference_matrix(const LatticeGeometry& g, int axis, int direction, Boundary bc) {
  if (axis < 0 || axis >= g.d) throw std::out_of_range("axis outside [0, d)");
  const Eigen::Index n = count(g);
  const double eta = g.spacing();
  const std::int64_t N = g.sites_per_axis();
  Matrix D = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Site x = g.site_at(static_cast<std::size_t>(i));
    Site nb = x;
    nb[axis] += direction;
    const bool inside = nb[axis] >= 0 && nb[axis] < N;
    const double sign = direction > 0 ? 1.0 : -1.0;
    // forward: (f(nb) - f(x))/eta ; backward: (f(x) - f(nb))/eta
    if (inside) {
      D(i, static_cast<Eigen::Index>(g.index_of(nb))) += sign / eta;
      D(i, i) -= sign / eta;
    } else if (bc == Boundary::free_interior) {
      D(i, i) -= sign / eta;
    }
  }
  return D;
}

}  // namespace

KernelOperator forward_diff(const LatticeGeometry& g, int axis, Boundary bc) {
  return KernelOperator::from_matrix(g, g, difference_matrix(g, axis, +1, bc));
}

KernelOperator backward_diff(const LatticeGeometry& g, int axis, Boundary bc) {
  return KernelOperator::from_matrix(g, g, -difference_matrix(g, axis, -1, bc));
}

KernelOperator laplacian(const LatticeGeometry& g, Boundary bc) {
  const Eigen::Index n = count(g);
  const double inv_eta2 = 1.0 / (g.spacing() * g.spacing());
  const std::int64_t N = g.sites_per_axis();
  Matrix D = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Site x = g.site_at(static_cast<std::size_t>(i));
    for (int mu = 0; mu < g.d; ++mu) {
      for (int dir : {-1, +1}) {
        Site nb = x;
        nb[mu] += dir;
        if (nb[mu] >= 0 && nb[mu] < N) {
          D(i, static_cast<Eigen::Index>(g.index_of(nb))) += inv_eta2;
          D(i, i) -= inv_eta2;
        } else if (bc == Boundary::free_interior) {
          D(i, i) -= inv_eta2;
        }
        // Neumann: the clamped ghost equals f(x) and the bond contributes nothing.
      }
    }
  }
  return KernelOperator::from_matrix(g, g, D);
}

KernelOperator neumann_laplacian(const LatticeGeometry& g) { return laplacian(g, Boundary::neumann); }

KernelOperator averaging(const LatticeGeometry& g, int j) {
  const LatticeGeometry coarse = coarse_geometry(g, j);
  const Eigen::Index n = count(g);
  const Eigen::Index nc = count(coarse);
  const double block = static_cast<double>(ipow(ipow(g.L, j), g.d));
  Matrix A = Matrix::Zero(nc, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Site y = block_label(g, j, g.site_at(static_cast<std::size_t>(i)));
    A(static_cast<Eigen::Index>(coarse.index_of(y)), i) = 1.0 / block;
  }
  return KernelOperator::from_matrix(g, coarse, A);
}

KernelOperator scaling_unitary(const LatticeGeometry& g, int ell) {
  const LatticeGeometry target = scaled_geometry(g, ell);
  const double factor = std::pow(static_cast<double>(g.L), -0.5 * ell * g.d);
  const Eigen::Index n = count(g);
  return KernelOperator::from_matrix(g, target, factor * Matrix::Identity(n, n));
}

std::vector<double> laplacian_eigenvalues_closed_form(int n, double eta) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  std::vector<double> ev(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double s = std::sin(std::numbers::pi * j / (2.0 * n));
    ev[static_cast<std::size_t>(j)] = -4.0 / (eta * eta) * s * s;
  }
  std::sort(ev.begin(), ev.end());
  return ev;
}

SpectrumReport laplacian_spectrum_1d(int n, double eta) {
  if (n < 2) throw std::invalid_argument("n must be >= 2");
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  const double c = 1.0 / (eta * eta);
  for (int i = 0; i < n; ++i) {
    if (i > 0) {
      T(i, i - 1) = c;
      T(i, i) -= c;
    }
    if (i + 1 < n) {
      T(i, i + 1) = c;
      T(i, i) -= c;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T, Eigen::EigenvaluesOnly);
  SpectrumReport r;
  r.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  r.min_eigenvalue = r.eigenvalues.front();
  r.closed_form = laplacian_eigenvalues_closed_form(n, eta);
  return r;
}

double chebyshev(int n, double alpha) {
  if (n < 0) throw std::invalid_argument("chebyshev: negative degree");
  double prev = 1.0;
  if (n == 0) return prev;
  double cur = 2.0 * alpha;
  for (int i = 1; i < n; ++i) {
    const double next = 2.0 * alpha * cur - prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

std::vector<double> chebyshev_roots(int n) {
  if (n < 1) throw std::invalid_argument("chebyshev_roots: degree must be >= 1");
  std::vector<double> r(static_cast<std::size_t>(n));
  for (int j = 1; j <= n; ++j) r[static_cast<std::size_t>(j - 1)] = std::cos(j * std::numbers::pi / (n + 1));
  std::sort(r.begin(), r.end());
  return r;
}

}  // namespace lrg
