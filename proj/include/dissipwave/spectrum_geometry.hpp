#pragma once

#include <optional>
#include <vector>

#include "dissipwave/transverse_spectrum.hpp"

namespace dissipwave {

/// Spectrum of the full waveguide operator: the union over n of the
/// rightward half-lines {mu_n + r : r >= 0}.
struct HalfLineSpectrum {
  SpectrumTable table;
  double tail_imag = 0.0;  // limit of Im mu_n, -2 (a_l + a_0) / l

  explicit HalfLineSpectrum(SpectrumTable t);

  /// mu_n from the table, or (n nu)^2 + i tail_imag beyond it.
  [[nodiscard]] cplx mu(std::size_t n) const;
  [[nodiscard]] bool deep_enough() const;
  /// Re mu_n nondecreasing over the table (enables early stopping).
  [[nodiscard]] bool monotone() const { return monotone_; }

 private:
  bool monotone_ = true;
};

double tail_imag_for(const RobinPair& robin, const Geometry& geom);

/// Distance from z to the half-line mu + [0, inf).
double halfline_distance(cplx z, cplx mu);

struct DistanceResult {
  double distance = 0.0;
  bool tail_extended = false;
};

DistanceResult spectrum_distance(cplx z, const HalfLineSpectrum& spec);

struct GapReport {
  double gap = 0.0;
  std::optional<int> attaining_index;  // empty: attained by the tail
  bool depth_ok = true;                // |Im mu_N - tail| < 5% |tail| at the last mode

  [[nodiscard]] bool positive() const { return gap > 0.0; }
};

GapReport spectral_gap(const HalfLineSpectrum& spec);

struct GridRegion {
  double re_min = -1.0, re_max = 1.0;
  double im_min = -1.0, im_max = 1.0;
  int n_re = 2, n_im = 2;

  void validate() const;
  [[nodiscard]] cplx point(int i_re, int i_im) const;
};

/// riesz_c / d(z, spectrum) on the grid, row-major with Re fastest. Points
/// closer than 1e-12 to the spectrum are +infinity.
std::vector<double> resolvent_bound_map(const GridRegion& region, const HalfLineSpectrum& spec,
                                        double riesz_c);

}  // namespace dissipwave
