#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrg/lattice.hpp"

namespace lrg {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Complex function on the sites of a lattice; values are stored in row-major site order.
struct Field {
  LatticeGeometry geometry;
  Vector values;

  Field(LatticeGeometry g, Vector v);
  static Field zeros(const LatticeGeometry& g);
  static Field constant(const LatticeGeometry& g, cplx c);
};

/// Dense linear map between two lattices, stored as its integral kernel K(x, x').
///
/// (A f)(x) = eta_src^d * sum_{x'} K(x, x') f(x'), so the identity has kernel delta / eta^d.
class KernelOperator {
 public:
  KernelOperator(LatticeGeometry source, LatticeGeometry target, Matrix kernel);

  /// Builds the operator whose action on value vectors is the given matrix.
  static KernelOperator from_matrix(LatticeGeometry source, LatticeGeometry target, const Matrix& action);
  static KernelOperator identity(const LatticeGeometry& g);

  const LatticeGeometry& source() const { return source_; }
  const LatticeGeometry& target() const { return target_; }
  const Matrix& kernel() const { return kernel_; }
  /// The matrix acting on value vectors: kernel * eta_src^d.
  Matrix matrix() const;
  cplx operator()(const Site& x, const Site& xp) const;

 private:
  LatticeGeometry source_;
  LatticeGeometry target_;
  Matrix kernel_;
};

class SingularOperatorError : public std::runtime_error {
 public:
  SingularOperatorError(const std::string& what, double condition)
      : std::runtime_error(what), condition_(condition) {}
  double condition() const { return condition_; }

 private:
  double condition_;
};

Field delta_field(const LatticeGeometry& g, const Site& x);
/// <f, g> = eta^d sum conj(f) g.
cplx inner(const Field& f, const Field& g);
double norm(const Field& f);

Field apply(const KernelOperator& A, const Field& f);
/// A after B (B acts first); the inner lattice measure enters the kernel product.
KernelOperator compose(const KernelOperator& A, const KernelOperator& B);
KernelOperator adjoint(const KernelOperator& A);
KernelOperator add(const KernelOperator& A, const KernelOperator& B);
KernelOperator scale(const KernelOperator& A, cplx s);
/// A + s * identity on a square operator.
KernelOperator shift(const KernelOperator& A, cplx s);

/// Pivoted LU inverse; throws SingularOperatorError if the reciprocal condition estimate
/// falls below `rcond_floor`. The estimate is written to `condition` when requested.
KernelOperator invert(const KernelOperator& A, double* condition = nullptr, double rcond_floor = 1e-14);

/// ||A - A*||_F / ||A||_F for a square operator (0 for the zero operator).
double self_adjoint_defect(const KernelOperator& A);
/// Relative Frobenius distance ||A - B||_F / ||B||_F between kernels on matching lattices.
double relative_difference(const KernelOperator& A, const KernelOperator& B);

struct SpectrumReport {
  std::vector<double> eigenvalues;  ///< ascending
  double min_eigenvalue = 0.0;
  std::optional<std::vector<double>> closed_form;
};

inline constexpr double kSelfAdjointTolerance = 1e-10;

/// Dense Hermitian eigensolve; rejects inputs whose self-adjoint defect exceeds 1e-10.
SpectrumReport spectrum(const KernelOperator& A);
double min_eigenvalue(const KernelOperator& A);

enum class Boundary { neumann, free_interior };

/// (d f)(x) = (f(x + eta e_mu) - f(x)) / eta. Neumann clamps the ghost value to f(x);
/// free_interior sets ghosts to zero and is meant for comparisons away from the edge.
KernelOperator forward_diff(const LatticeGeometry& g, int axis, Boundary bc);
/// (d^dagger f)(x) = -(f(x) - f(x - eta e_mu)) / eta, same ghost conventions.
KernelOperator backward_diff(const LatticeGeometry& g, int axis, Boundary bc);
/// Second-difference stencil summed over axes with the given ghost convention.
KernelOperator laplacian(const LatticeGeometry& g, Boundary bc);
KernelOperator neumann_laplacian(const LatticeGeometry& g);

/// Q_j: Omega -> Omega_j, block means over L^j-sided blocks.
KernelOperator averaging(const LatticeGeometry& g, int j);
/// Maps L2(Omega) to L2(L^ell Omega): (S f)(x) = L^{-ell d/2} f(L^{-ell} x).
KernelOperator scaling_unitary(const LatticeGeometry& g, int ell);

/// Dense spectrum of the n-site Neumann Laplacian with spacing eta, with the closed form
/// -(4/eta^2) sin^2(pi j / (2n)).
SpectrumReport laplacian_spectrum_1d(int n, double eta);
std::vector<double> laplacian_eigenvalues_closed_form(int n, double eta);

/// Chebyshev polynomial of the second kind U_n(alpha) by the three-term recurrence.
double chebyshev(int n, double alpha);
/// cos(j pi / (n + 1)), j = 1..n, in ascending order.
std::vector<double> chebyshev_roots(int n);

}  // namespace lrg
