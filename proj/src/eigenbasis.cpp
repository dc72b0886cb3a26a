#include "dissipwave/eigenbasis.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "dissipwave/parallel.hpp"

namespace dissipwave {

namespace {

// phi(y) = sum_i coeff[i] * exp(i * wave[i] * y)
struct ExpSum {
  std::array<cplx, 2> coeff;
  std::array<cplx, 2> wave;
};

ExpSum expand(const EigenfunctionForm& f) {
  const cplx lam = f.mode.lambda;
  return {{cplx(f.norm_coeff, 0.0), f.norm_coeff * f.coeff_ratio}, {lam, -lam}};
}

ExpSum differentiate(ExpSum s) {
  for (std::size_t i = 0; i < 2; ++i) s.coeff[i] *= kI * s.wave[i];
  return s;
}

cplx sesquilinear(const ExpSum& a, const ExpSum& b, double l) {
  cplx acc{};
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t q = 0; q < 2; ++q) {
      acc += a.coeff[p] * std::conj(b.coeff[q]) * exp_pair_integral(a.wave[p], b.wave[q], l);
    }
  }
  return acc;
}

cplx bilinear(const ExpSum& a, const ExpSum& b, double l) {
  cplx acc{};
  for (std::size_t p = 0; p < 2; ++p) {
    for (std::size_t q = 0; q < 2; ++q) {
      acc += a.coeff[p] * b.coeff[q] * l * exprel(kI * (a.wave[p] + b.wave[q]) * l);
    }
  }
  return acc;
}

}  // namespace

cplx exprel(cplx w) {
  if (std::abs(w) < 1e-4) {
    return 1.0 + w * (0.5 + w * (1.0 / 6.0 + w * (1.0 / 24.0 + w / 120.0)));
  }
  const double x = w.real();
  const double y = w.imag();
  const double s = std::sin(0.5 * y);
  const cplx expm1(std::expm1(x) * std::cos(y) - 2.0 * s * s, std::exp(x) * std::sin(y));
  return expm1 / w;
}

cplx exp_pair_integral(cplx alpha, cplx beta, double l) {
  return l * exprel(kI * (alpha - std::conj(beta)) * l);
}

EigenfunctionForm make_eigenfunction(const TransverseMode& mode, const RobinPair& robin,
                                     const Geometry& geom) {
  EigenfunctionForm f;
  f.mode = mode;
  f.robin = robin;
  f.l = geom.l;
  if (mode.lambda == cplx{}) {
    // Constant Neumann ground state written as A (1 + 1).
    f.constant = true;
    f.coeff_ratio = 1.0;
    f.norm_coeff = 0.5 / std::sqrt(geom.l);
    return f;
  }
  const cplx gap = mode.lambda - robin.a_0;
  if (std::abs(gap) <= pole_guard_radius(robin.a_0)) {
    throw SolverError(ErrorKind::RatioSingularity,
                      "lambda coincides with a_0; coefficient ratio is singular");
  }
  f.coeff_ratio = (mode.lambda + robin.a_0) / gap;
  f.norm_coeff = 1.0;
  const double norm2 = sesquilinear(expand(f), expand(f), geom.l).real();
  f.norm_coeff = 1.0 / std::sqrt(norm2);
  f.mode.norm_coeff = f.norm_coeff;
  return f;
}

cplx eigenfunction_eval(const EigenfunctionForm& f, double y) {
  const cplx e = std::exp(kI * f.mode.lambda * y);
  return f.norm_coeff * (e + f.coeff_ratio / e);
}

cplx eigenfunction_derivative(const EigenfunctionForm& f, double y) {
  const cplx e = std::exp(kI * f.mode.lambda * y);
  return f.norm_coeff * kI * f.mode.lambda * (e - f.coeff_ratio / e);
}

cplx mode_inner_product(const EigenfunctionForm& j, const EigenfunctionForm& k) {
  return sesquilinear(expand(j), expand(k), j.l);
}

cplx derivative_inner_product(const EigenfunctionForm& j, const EigenfunctionForm& k) {
  return sesquilinear(differentiate(expand(j)), differentiate(expand(k)), j.l);
}

cplx bilinear_pairing(const EigenfunctionForm& j, const EigenfunctionForm& k) {
  return bilinear(expand(j), expand(k), j.l);
}

cplx self_pairing(const EigenfunctionForm& form) { return form.constant ? cplx(1.0) : bilinear_pairing(form, form); }

std::vector<EigenfunctionForm> eigenfunctions(const SpectrumTable& table, std::size_t count) {
  if (count > table.size()) {
    throw SolverError(ErrorKind::InvalidArgument, "requested more eigenfunctions than table modes");
  }
  std::vector<EigenfunctionForm> forms;
  forms.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    forms.push_back(make_eigenfunction(table[n], table.robin, table.geometry));
  }
  return forms;
}

cplx DualFamily::eval(std::size_t k, double y) const {
  return std::conj(eigenfunction_eval(forms[k], y)) / std::conj(pairings[k]);
}

cplx DualFamily::biorthogonal_product(std::size_t j, std::size_t k) const {
  return bilinear_pairing(forms[j], forms[k]) / pairings[k];
}

double DualFamily::biorthogonality_residual() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    for (std::size_t k = 0; k < size(); ++k) {
      const cplx target = (j == k) ? cplx(1.0, 0.0) : cplx{};
      worst = std::max(worst, std::abs(biorthogonal_product(j, k) - target));
    }
  }
  return worst;
}

DualFamily dual_family(const SpectrumTable& table) { return dual_family(table, table.size()); }

DualFamily dual_family(const SpectrumTable& table, std::size_t count) {
  DualFamily d;
  d.forms = eigenfunctions(table, count);
  d.pairings.reserve(count);
  for (const auto& f : d.forms) {
    const cplx p = self_pairing(f);
    if (std::abs(p) < DualFamily::kPairingFloor) {
      throw SolverError(ErrorKind::DegeneratePairing,
                        "pairing of mode " + std::to_string(f.mode.n) + " is below the floor");
    }
    d.pairings.push_back(p);
  }
  return d;
}

namespace {

Eigen::MatrixXcd assemble(const std::vector<EigenfunctionForm>& forms,
                          cplx (*entry)(const EigenfunctionForm&, const EigenfunctionForm&)) {
  const auto n = static_cast<Eigen::Index>(forms.size());
  Eigen::MatrixXcd g(n, n);
  parallel_for(forms.size(), [&](std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    for (Eigen::Index k = 0; k < n; ++k) g(jj, k) = entry(forms[j], forms[static_cast<std::size_t>(k)]);
  });
  return g;
}

}  // namespace

Eigen::MatrixXcd gram_matrix(const std::vector<EigenfunctionForm>& forms) {
  return assemble(forms, &mode_inner_product);
}

Eigen::MatrixXcd derivative_gram_matrix(const std::vector<EigenfunctionForm>& forms) {
  return assemble(forms, &derivative_inner_product);
}

GramReport gram_report(const SpectrumTable& table, int n) {
  if (n < 1 || static_cast<std::size_t>(n) > table.size()) {
    throw SolverError(ErrorKind::InvalidArgument, "Gram size must be in [1, table size]");
  }
  GramReport r;
  r.size = n;
  r.gram = gram_matrix(eigenfunctions(table, static_cast<std::size_t>(n)));
  // Symmetrize away rounding before the Hermitian solve.
  const Eigen::MatrixXcd herm = 0.5 * (r.gram + r.gram.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(herm, Eigen::EigenvaluesOnly);
  r.min_eig = solver.eigenvalues().minCoeff();
  r.max_eig = solver.eigenvalues().maxCoeff();
  if (!(r.min_eig > 1e-14 * r.max_eig)) {
    throw SolverError(ErrorKind::NotPositive, "Gram matrix is not positive definite");
  }
  r.riesz_condition = r.max_eig / r.min_eig;
  return r;
}

YGrid YGrid::trapezoid(double l, int points) {
  if (points < 2) throw SolverError(ErrorKind::InvalidArgument, "trapezoid needs >= 2 points");
  YGrid g;
  g.rule = QuadratureRule::Trapezoid;
  g.l = l;
  const double h = l / (points - 1);
  for (int i = 0; i < points; ++i) {
    g.nodes.push_back(i == points - 1 ? l : i * h);
    g.weights.push_back((i == 0 || i == points - 1) ? 0.5 * h : h);
  }
  return g;
}

YGrid YGrid::gauss_legendre(double l, int points) {
  if (points < 1) throw SolverError(ErrorKind::InvalidArgument, "Gauss-Legendre needs >= 1 point");
  YGrid g;
  g.rule = QuadratureRule::GaussLegendre;
  g.l = l;
  g.nodes.resize(static_cast<std::size_t>(points));
  g.weights.resize(static_cast<std::size_t>(points));
  const int m = (points + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // x runs from +1 downwards; store ascending in y.
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(points - 1 - i);
    g.nodes[lo] = 0.5 * l * (1.0 - x);
    g.nodes[hi] = 0.5 * l * (1.0 + x);
    g.weights[lo] = g.weights[hi] = 0.5 * l * w;
  }
  return g;
}

YGrid YGrid::for_modes(double l, int modes) { return gauss_legendre(l, 4 * modes + 32); }

namespace {

std::vector<cplx> project(std::span<const cplx> samples, std::span<const double> nodes,
                          std::span<const double> weights, std::size_t stride, const DualFamily& duals) {
  std::vector<cplx> c(duals.size());
  for (std::size_t n = 0; n < duals.size(); ++n) {
    cplx acc{};
    for (std::size_t q = 0; q < nodes.size(); q += stride) {
      acc += weights[q] * samples[q] * eigenfunction_eval(duals.forms[n], nodes[q]);
    }
    c[n] = acc / duals.pairings[n];
  }
  return c;
}

}  // namespace

Decomposition decompose(std::span<const cplx> samples, const YGrid& grid, const DualFamily& duals) {
  if (samples.size() != grid.nodes.size()) {
    throw SolverError(ErrorKind::InvalidArgument, "sample count does not match the grid");
  }
  Decomposition d;
  d.coeffs = project(samples, grid.nodes, grid.weights, 1, duals);

  const std::size_t q = grid.nodes.size();
  if (grid.rule == QuadratureRule::Trapezoid && q >= 5 && q % 2 == 1) {
    // Same rule on every other node; Richardson estimate of the fine error.
    std::vector<double> coarse(grid.weights.begin(), grid.weights.end());
    for (auto& w : coarse) w *= 2.0;
    const auto c2 = project(samples, grid.nodes, coarse, 2, duals);
    double scale = 1.0;
    for (const auto& c : d.coeffs) scale = std::max(scale, std::abs(c));
    for (std::size_t n = 0; n < d.coeffs.size(); ++n) {
      d.quadrature_estimate = std::max(d.quadrature_estimate, std::abs(d.coeffs[n] - c2[n]) / (3.0 * scale));
    }
  } else {
    // Resolution check: the rule must reproduce the closed-form pairings.
    for (std::size_t n = 0; n < duals.size(); ++n) {
      cplx acc{};
      for (std::size_t k = 0; k < q; ++k) {
        const cplx v = eigenfunction_eval(duals.forms[n], grid.nodes[k]);
        acc += grid.weights[k] * v * v;
      }
      d.quadrature_estimate =
          std::max(d.quadrature_estimate, std::abs(acc - duals.pairings[n]) / std::abs(duals.pairings[n]));
    }
  }
  if (d.quadrature_estimate > 1e-6) {
    throw SolverError(ErrorKind::GridTooCoarse,
                      "quadrature self-estimate " + std::to_string(d.quadrature_estimate) + " exceeds 1e-6");
  }

  const auto back = reconstruct(d.coeffs, duals, grid.nodes);
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < q; ++k) {
    num += grid.weights[k] * std::norm(samples[k] - back[k]);
    den += grid.weights[k] * std::norm(samples[k]);
  }
  d.reconstruction_error = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  return d;
}

std::vector<cplx> reconstruct(std::span<const cplx> coeffs, const std::vector<EigenfunctionForm>& forms,
                              std::span<const double> y) {
  if (coeffs.size() > forms.size()) {
    throw SolverError(ErrorKind::InvalidArgument, "more coefficients than basis functions");
  }
  std::vector<cplx> out(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    cplx acc{};
    for (std::size_t n = 0; n < coeffs.size(); ++n) {
      if (coeffs[n] != cplx{}) acc += coeffs[n] * eigenfunction_eval(forms[n], y[k]);
    }
    out[k] = acc;
  }
  return out;
}

std::vector<cplx> reconstruct(std::span<const cplx> coeffs, const DualFamily& duals,
                              std::span<const double> y) {
  return reconstruct(coeffs, duals.forms, y);
}

std::vector<cplx> reconstruct(std::span<const cplx> coeffs, const SpectrumTable& table,
                              std::span<const double> y) {
  if (coeffs.size() > table.size()) {
    throw SolverError(ErrorKind::InvalidArgument, "more coefficients than table modes");
  }
  return reconstruct(coeffs, eigenfunctions(table, coeffs.size()), y);
}

}  // namespace dissipwave
