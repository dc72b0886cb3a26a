#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "dissipwave/transverse_spectrum.hpp"

namespace dissipwave {

/// phi(y) = A (exp(i lambda y) + ratio * exp(-i lambda y)), A > 0, unit L2 norm.
/// The Neumann ground state (lambda = 0) is the constant 1/sqrt(l).
struct EigenfunctionForm {
  TransverseMode mode;
  RobinPair robin;
  double l = 0.0;
  cplx coeff_ratio{1.0, 0.0};
  double norm_coeff = 0.0;
  bool constant = false;
};

/// Builds the normalized eigenfunction of a computed mode. Throws
/// RatioSingularity when lambda sits inside the pole guard around a_0.
EigenfunctionForm make_eigenfunction(const TransverseMode& mode, const RobinPair& robin,
                                     const Geometry& geom);

cplx eigenfunction_eval(const EigenfunctionForm& form, double y);
cplx eigenfunction_derivative(const EigenfunctionForm& form, double y);

/// (exp(w) - 1) / w, with the removable singularity handled.
cplx exprel(cplx w);

/// \int_0^l exp(i alpha y) conj(exp(i beta y)) dy in closed form.
cplx exp_pair_integral(cplx alpha, cplx beta, double l);

/// <phi_j, phi_k> = \int_0^l phi_j conj(phi_k) dy.
cplx mode_inner_product(const EigenfunctionForm& j, const EigenfunctionForm& k);

/// <phi_j', phi_k'>, used for the derivative Riesz bound.
cplx derivative_inner_product(const EigenfunctionForm& j, const EigenfunctionForm& k);

/// Bilinear \int_0^l phi_j phi_k dy (no conjugation). Vanishes for j != k.
cplx bilinear_pairing(const EigenfunctionForm& j, const EigenfunctionForm& k);

/// \int_0^l phi^2 dy.
cplx self_pairing(const EigenfunctionForm& form);

std::vector<EigenfunctionForm> eigenfunctions(const SpectrumTable& table, std::size_t count);

/// Dual functions psi_k = conj(phi_k) / conj(p_k), p_k = \int phi_k^2.
struct DualFamily {
  std::vector<EigenfunctionForm> forms;
  std::vector<cplx> pairings;

  static constexpr double kPairingFloor = 1e-8;

  [[nodiscard]] std::size_t size() const { return forms.size(); }
  [[nodiscard]] cplx eval(std::size_t k, double y) const;
  /// <phi_j, psi_k> in closed form.
  [[nodiscard]] cplx biorthogonal_product(std::size_t j, std::size_t k) const;
  /// max_{j,k} |<phi_j, psi_k> - delta_jk|.
  [[nodiscard]] double biorthogonality_residual() const;
};

DualFamily dual_family(const SpectrumTable& table);
DualFamily dual_family(const SpectrumTable& table, std::size_t count);

struct GramReport {
  int size = 0;
  Eigen::MatrixXcd gram;
  double min_eig = 0.0;
  double max_eig = 0.0;
  double riesz_condition = 1.0;
};

Eigen::MatrixXcd gram_matrix(const std::vector<EigenfunctionForm>& forms);
Eigen::MatrixXcd derivative_gram_matrix(const std::vector<EigenfunctionForm>& forms);

/// Hermitian Gram matrix of the first n modes and its extreme eigenvalues.
GramReport gram_report(const SpectrumTable& table, int n);

enum class QuadratureRule { Trapezoid, GaussLegendre };

/// Nodes and weights on [0, l].
struct YGrid {
  QuadratureRule rule = QuadratureRule::GaussLegendre;
  double l = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;

  static YGrid trapezoid(double l, int points);
  static YGrid gauss_legendre(double l, int points);
  /// Default for a basis of `modes` functions: 4 modes + 32 Gauss nodes.
  static YGrid for_modes(double l, int modes);
};

struct Decomposition {
  std::vector<cplx> coeffs;
  /// Relative L2 defect ||u - sum c_n phi_n|| / ||u|| on the grid.
  double reconstruction_error = 0.0;
  /// Two-resolution quadrature self-estimate.
  double quadrature_estimate = 0.0;
};

/// c_n = <u, psi_n> by quadrature. Throws GridTooCoarse when the quadrature
/// self-estimate exceeds 1e-6.
Decomposition decompose(std::span<const cplx> samples, const YGrid& grid, const DualFamily& duals);

/// sum_n c_n phi_n(y) at the given points.
std::vector<cplx> reconstruct(std::span<const cplx> coeffs, const std::vector<EigenfunctionForm>& forms,
                              std::span<const double> y);
std::vector<cplx> reconstruct(std::span<const cplx> coeffs, const DualFamily& duals,
                              std::span<const double> y);
std::vector<cplx> reconstruct(std::span<const cplx> coeffs, const SpectrumTable& table,
                              std::span<const double> y);

}  // namespace dissipwave
