#include "dissipwave/spectrum_geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dissipwave/parallel.hpp"

namespace dissipwave {

double tail_imag_for(const RobinPair& robin, const Geometry& geom) {
  return -2.0 * robin.sum() / geom.l;
}

HalfLineSpectrum::HalfLineSpectrum(SpectrumTable t)
    : table(std::move(t)), tail_imag(tail_imag_for(table.robin, table.geometry)) {
  if (table.modes.empty()) throw SolverError(ErrorKind::TableTooShort, "spectrum table is empty");
  for (std::size_t n = 1; n < table.size(); ++n) {
    if (table[n].mu.real() < table[n - 1].mu.real()) monotone_ = false;
  }
}

cplx HalfLineSpectrum::mu(std::size_t n) const {
  if (n < table.size()) return table[n].mu;
  const double k = static_cast<double>(n) * table.geometry.nu;
  return {k * k, tail_imag};
}

bool HalfLineSpectrum::deep_enough() const {
  const double last = table.modes.back().mu.imag();
  return std::abs(last - tail_imag) <= 0.05 * std::abs(tail_imag);
}

double halfline_distance(cplx z, cplx mu) {
  if (z.real() >= mu.real()) return std::abs(z.imag() - mu.imag());
  return std::abs(z - mu);
}

DistanceResult spectrum_distance(cplx z, const HalfLineSpectrum& spec) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw SolverError(ErrorKind::TableTooShort, "non-finite point: stopping rule cannot be certified");
  }
  DistanceResult out{std::numeric_limits<double>::infinity(), false};
  const std::size_t table_size = spec.table.size();

  // Half-lines starting further right than the current minimum cannot win
  // once Re mu_n is increasing; before that, scan the whole table.
  std::size_t n = 0;
  for (;; ++n) {
    const cplx mu = spec.mu(n);
    const bool in_table = n < table_size;
    const bool can_stop = in_table ? spec.monotone() : true;
    if (can_stop && mu.real() - z.real() > out.distance) break;
    if (!in_table) out.tail_extended = true;
    out.distance = std::min(out.distance, halfline_distance(z, mu));
    if (!in_table && n > table_size + 100000000) {
      throw SolverError(ErrorKind::TableTooShort, "asymptotic extension did not terminate");
    }
  }
  return out;
}

GapReport spectral_gap(const HalfLineSpectrum& spec) {
  GapReport r;
  r.gap = -spec.tail_imag;
  for (const auto& m : spec.table.modes) {
    if (-m.mu.imag() < r.gap) {
      r.gap = -m.mu.imag();
      r.attaining_index = m.n;
    }
  }
  r.depth_ok = spec.deep_enough();
  return r;
}

void GridRegion::validate() const {
  if (!(re_max > re_min) || !(im_max > im_min) || n_re < 1 || n_im < 1) {
    throw SolverError(ErrorKind::InvalidArgument, "grid region needs positive extents and resolutions");
  }
}

cplx GridRegion::point(int i_re, int i_im) const {
  const double re = n_re == 1 ? re_min : re_min + (re_max - re_min) * i_re / (n_re - 1);
  const double im = n_im == 1 ? im_min : im_min + (im_max - im_min) * i_im / (n_im - 1);
  return {re, im};
}

std::vector<double> resolvent_bound_map(const GridRegion& region, const HalfLineSpectrum& spec,
                                        double riesz_c) {
  region.validate();
  if (!(riesz_c >= 1.0)) throw SolverError(ErrorKind::InvalidArgument, "riesz constant must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(region.n_re) * static_cast<std::size_t>(region.n_im));
  parallel_for(static_cast<std::size_t>(region.n_im), [&](std::size_t row) {
    for (int i = 0; i < region.n_re; ++i) {
      const cplx z = region.point(i, static_cast<int>(row));
      const double d = spectrum_distance(z, spec).distance;
      out[row * static_cast<std::size_t>(region.n_re) + static_cast<std::size_t>(i)] =
          d < 1e-12 ? std::numeric_limits<double>::infinity() : riesz_c / d;
    }
  });
  return out;
}

}  // namespace dissipwave
