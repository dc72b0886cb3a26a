#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "dissipwave/evolution.hpp"
#include "dissipwave/parallel.hpp"
#include "dissipwave/spectrum_geometry.hpp"
#include "dissipwave/sweeps.hpp"
#include "output.hpp"

#ifndef DISSIPWAVE_VERSION
#define DISSIPWAVE_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace dissipwave;
using dwcli::fmt;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolver = 2;
constexpr int kExitUsage = 64;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

using Outputs = std::map<std::string, std::string>;

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json cplx_json(cplx z) { return json::array({z.real(), z.imag()}); }

// Every option registered through Registry is recorded so the resolved
// parameter set can be written to the manifest and replayed later.
class Registry {
 public:
  explicit Registry(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* option(const std::string& name, T& var, const std::string& desc) {
    getters_.emplace_back(name, [&var]() -> json {
      if constexpr (std::is_floating_point_v<T>) {
        return fmt(var);
      } else if constexpr (std::is_integral_v<T>) {
        return std::to_string(var);
      } else {
        return std::string(var);
      }
    });
    return app_->add_option("--" + name, var, desc)->capture_default_str();
  }

  CLI::Option* flag(const std::string& name, bool& var, const std::string& desc) {
    getters_.emplace_back(name, [&var]() -> json { return var; });
    return app_->add_flag("--" + name, var, desc);
  }

  [[nodiscard]] json params() const {
    json p = json::object();
    for (const auto& [name, get] : getters_) p[name] = get();
    return p;
  }

  [[nodiscard]] CLI::App* app() const { return app_; }

 private:
  CLI::App* app_;
  std::vector<std::pair<std::string, std::function<json()>>> getters_;
};

struct Common {
  double l = 0.0;
  double al = 0.0;
  double a0 = 0.0;
  int nmax = 30;
  double tol = 1e-12;
  std::string out_dir = ".";
  int threads = 1;
  std::uint64_t seed = 0;

  [[nodiscard]] Geometry geometry() const {
    if (!(l > 0.0) || !std::isfinite(l)) throw UsageError("--l must be a positive number");
    return Geometry::with_width(l);
  }
  [[nodiscard]] RobinPair robin() const { return {al, a0}; }
  [[nodiscard]] SolverOptions options() const {
    SolverOptions o;
    o.newton_tol = tol;
    return o;
  }
};

void add_common(Registry& r, Common& c) {
  r.option("l", c.l, "strip width l > 0")->required();
  r.option("al", c.al, "absorption a_l at y = l");
  r.option("a0", c.a0, "absorption a_0 at y = 0");
  r.option("nmax", c.nmax, "highest transverse mode index");
  r.option("tol", c.tol, "Newton tolerance (relative residual)");
  r.option("seed", c.seed, "seed for random initial data");
  // Not part of the manifest: they do not change the outputs.
  r.app()->add_option("--out-dir", c.out_dir, "output directory")->capture_default_str();
  r.app()->add_option("--threads", c.threads, "worker threads")->capture_default_str()->check(CLI::PositiveNumber);
}

// ---------------------------------------------------------------- spectrum

struct SpectrumCmd {
  Common c;
};

Outputs run_spectrum(const SpectrumCmd& cmd) {
  const auto table = solve_spectrum(cmd.c.nmax, cmd.c.robin(), cmd.c.geometry(), cmd.c.options());
  dwcli::Csv csv({"n", "re_lambda", "im_lambda", "re_mu", "im_mu", "residual", "abs_pairing"});
  for (const auto& m : table.modes) {
    csv.row({std::to_string(m.n), fmt(m.lambda.real()), fmt(m.lambda.imag()), fmt(m.mu.real()), fmt(m.mu.imag()),
             fmt(m.residual), fmt(std::abs(m.pairing))});
  }
  const HalfLineSpectrum spec(table);
  const auto gap = spectral_gap(spec);
  json g;
  g["gap"] = gap.gap;
  g["positive"] = gap.positive();
  g["attaining_index"] = gap.attaining_index ? json(*gap.attaining_index) : json("tail");
  g["tail_imag"] = spec.tail_imag;
  g["depth_ok"] = gap.depth_ok;

  const auto rep = gram_report(table, static_cast<int>(table.size()));
  const auto duals = dual_family(table);
  json gr;
  gr["size"] = rep.size;
  gr["min_eig"] = rep.min_eig;
  gr["max_eig"] = rep.max_eig;
  gr["riesz_condition"] = rep.riesz_condition;
  gr["biorthogonality_residual"] = duals.biorthogonality_residual();
  return {{"spectrum.csv", csv.text()}, {"gap.json", dump(g)}, {"gram.json", dump(gr)}};
}

// ------------------------------------------------------------ trajectories

struct TrajectoriesCmd {
  Common c;
  double s_max = 1.0;
  int steps = 101;
  bool overdamp = false;
};

void require_overdamp_direction(const RobinPair& d) {
  if (!(d.a_l * d.a_0 < 0.0) || !(d.sum() > 0.0)) {
    throw UsageError("overdamping path needs --al and --a0 of opposite signs with a positive sum");
  }
}

json crossings_json(const SweepReport& r) {
  json list = json::array();
  for (std::size_t n = 0; n < r.crossings.size(); ++n) {
    json e;
    e["n"] = n;
    if (const auto& c = r.crossings[n]) {
      e["found"] = true;
      e["s_star"] = c->s_star;
      e["bracket_lo"] = c->bracket_lo;
      e["bracket_hi"] = c->bracket_hi;
      e["im_mu"] = c->im_mu;
    } else {
      e["found"] = false;
    }
    list.push_back(e);
  }
  json out;
  out["direction"] = json::array({r.direction.a_l, r.direction.a_0});
  out["s_max"] = r.s_grid.back();
  out["steps"] = r.s_grid.size();
  out["crossings"] = list;
  const auto m = r.min_crossing();
  out["min_crossing"] = m ? json{{"n", m->n}, {"s_star", m->s_star}} : json(nullptr);
  return out;
}

Outputs run_trajectories(const TrajectoriesCmd& cmd) {
  const RobinPair dir = cmd.c.robin();
  if (cmd.overdamp) require_overdamp_direction(dir);
  SweepReport r;
  if (cmd.overdamp) {
    r = overdamping_scan(dir, cmd.c.geometry(), cmd.c.nmax, cmd.s_max, cmd.steps, cmd.c.options());
  } else {
    r = figure_data({cmd.c.geometry(), cmd.c.nmax, dir, cmd.s_max, cmd.steps}, cmd.c.options());
  }
  dwcli::Csv csv({"s", "n", "re_lambda", "im_lambda"});
  std::vector<dwcli::Series> series;
  for (const auto& b : r.branches) {
    dwcli::Series s;
    for (const auto& p : b) {
      csv.row({fmt(p.s), std::to_string(p.n), fmt(p.lambda.real()), fmt(p.lambda.imag())});
      s.x.push_back(p.lambda.real());
      s.y.push_back(p.lambda.imag());
    }
    series.push_back(std::move(s));
  }
  std::ostringstream title;
  title << "branches 0.." << cmd.c.nmax << ", (a_l, a_0) = s (" << fmt(dir.a_l) << ", " << fmt(dir.a_0)
        << "), s in [0, " << fmt(cmd.s_max) << "], l = " << fmt(cmd.c.l);
  Outputs out{{"trajectories.csv", csv.text()},
              {"trajectories.svg", dwcli::svg_lines(series, "Re λ", "Im λ", title.str())}};
  if (cmd.overdamp) out["crossings.json"] = dump(crossings_json(r));
  return out;
}

// ------------------------------------------------------------------ evolve

struct EvolveCmd {
  Common c;
  int modes = 6;
  std::string initial = "random";
  int mode_index = 0;
  std::string grid_file;
  double x_box = 20.0;
  int n_x = 256;
  double t_end = 0.0;  // 0: 10 / gap
  int samples = 201;
  bool smoothing = false;
  double delta = 0.75;
  int n_t = 201;
};

struct GridFileData {
  std::vector<double> x;
  std::vector<double> y;
  Eigen::MatrixXcd values;
};

GridFileData read_grid_file(const std::string& path) {
  std::istringstream in(dwcli::read_file(path));
  std::string line;
  if (!std::getline(in, line) || (line != "x,y,re,im" && line != "x,y,re,im\r")) {
    throw UsageError("grid file must start with the header x,y,re,im");
  }
  std::vector<std::array<double, 4>> rows;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    std::array<double, 4> r{};
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i < 4; ++i) {
      if (!std::getline(ls, cell, ',')) throw UsageError("grid file row has fewer than 4 columns: " + line);
      try {
        r[static_cast<std::size_t>(i)] = std::stod(cell);
      } catch (const std::exception&) {
        throw UsageError("grid file cell is not a number: " + cell);
      }
    }
    rows.push_back(r);
  }
  GridFileData g;
  for (const auto& r : rows) {
    if (g.x.empty() || r[0] != g.x.back()) {
      if (!g.x.empty() && !(r[0] > g.x.back())) throw UsageError("grid file x must be strictly increasing");
      g.x.push_back(r[0]);
    }
  }
  if (g.x.empty() || rows.size() % g.x.size() != 0) throw UsageError("grid file is not a full x-y grid");
  const std::size_t ny = rows.size() / g.x.size();
  for (std::size_t k = 0; k < ny; ++k) g.y.push_back(rows[k][1]);
  for (std::size_t k = 1; k < ny; ++k) {
    if (!(g.y[k] > g.y[k - 1])) throw UsageError("grid file y must be strictly increasing");
  }
  g.values.resize(static_cast<Eigen::Index>(g.x.size()), static_cast<Eigen::Index>(ny));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::size_t j = i / ny;
    const std::size_t q = i % ny;
    if (rows[i][0] != g.x[j] || rows[i][1] != g.y[q]) throw UsageError("grid file is not row-major x then y");
    g.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(q)) = cplx(rows[i][2], rows[i][3]);
  }
  return g;
}

Outputs run_evolve(const EvolveCmd& cmd) {
  const Geometry geom = cmd.c.geometry();
  if (cmd.modes < 1) throw UsageError("--modes must be >= 1");
  if (cmd.c.nmax + 1 < cmd.modes) throw UsageError("--nmax must be at least --modes - 1");
  if (cmd.samples < 8) throw UsageError("--samples must be >= 8");
  const auto table = solve_spectrum(cmd.c.nmax, cmd.c.robin(), geom, cmd.c.options());

  std::optional<GridFileData> file;
  std::optional<YGrid> y_grid;
  if (cmd.initial == "file") {
    if (cmd.grid_file.empty()) throw UsageError("--initial file needs --grid-file");
    file = read_grid_file(cmd.grid_file);
    const auto& y = file->y;
    const double h = geom.l / static_cast<double>(y.size() - 1);
    for (std::size_t k = 0; k < y.size(); ++k) {
      if (std::abs(y[k] - k * h) > 1e-9 * geom.l) throw UsageError("grid file y nodes must be uniform on [0, l]");
    }
    y_grid = YGrid::trapezoid(geom.l, static_cast<int>(y.size()));
  }
  const int n_x = file ? static_cast<int>(file->x.size()) : cmd.n_x;
  const double x_box = file ? -file->x.front() : cmd.x_box;
  const EvolutionPlan plan = y_grid ? EvolutionPlan::build(table, x_box, n_x, cmd.modes, *y_grid)
                                    : EvolutionPlan::build(table, x_box, n_x, cmd.modes);
  if (file) {
    const auto xs = plan.x_nodes();
    for (std::size_t j = 0; j < xs.size(); ++j) {
      if (std::abs(xs[j] - file->x[j]) > 1e-9 * x_box) throw UsageError("grid file x nodes must be -L + j 2L/n_x");
    }
  }

  ModalState u0;
  std::optional<double> defect;
  if (cmd.initial == "random") {
    u0 = random_state(plan, cmd.modes, cmd.c.seed);
  } else if (cmd.initial == "mode") {
    u0 = mode_pure_state(plan, cmd.mode_index, gaussian_profile(plan, 0.0, 1.0, 0.0));
  } else if (cmd.initial == "gaussian") {
    const auto d = initial_decompose(plan, gaussian_wave(plan, 0.0, 1.5, 0.0, geom.l / 2, 0.1 * geom.l));
    u0 = d.state;
    defect = d.defect;
  } else if (cmd.initial == "file") {
    const auto d = initial_decompose(plan, WaveState{0.0, file->values});
    u0 = d.state;
    defect = d.defect;
  } else {
    throw UsageError("--initial must be one of random, mode, gaussian, file");
  }

  const HalfLineSpectrum spec(table);
  const auto gap = spectral_gap(spec);
  const double riesz = gram_report(table, cmd.modes).riesz_condition;
  const double horizon = cmd.t_end > 0.0 ? cmd.t_end : (gap.gap > 0.0 ? 10.0 / gap.gap : 10.0);
  const double n0 = state_norm(plan, u0);
  if (!(n0 > 0.0)) throw SolverError(ErrorKind::NonPositiveNorm, "initial data has zero norm");

  std::vector<double> ts(static_cast<std::size_t>(cmd.samples));
  std::vector<double> ns(ts.size());
  parallel_for(ts.size(), [&](std::size_t k) {
    ts[k] = horizon * static_cast<double>(k) / static_cast<double>(cmd.samples - 1);
    ns[k] = state_norm(plan, propagate(plan, u0, ts[k]));
  });
  dwcli::Csv csv({"t", "norm", "bound"});
  bool bound_ok = true;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const double b = riesz * std::exp(-gap.gap * ts[k]) * n0;
    bound_ok = bound_ok && ns[k] <= b;
    csv.row({fmt(ts[k]), fmt(ns[k]), fmt(b)});
  }
  const auto fit = decay_fit(ts, ns, horizon / 2, horizon);
  const double edge = edge_mass_fraction(plan, propagate(plan, u0, horizon));
  if (edge > 1e-6) std::cerr << "warning: edge mass fraction " << edge << " exceeds 1e-6 (box wrap-around)\n";

  json f;
  f["rate"] = fit.rate;
  f["intercept"] = fit.intercept;
  f["window"] = json::array({fit.window_begin, fit.window_end});
  f["residual"] = fit.residual;
  f["gap"] = gap.gap;
  f["gap_attaining_index"] = gap.attaining_index ? json(*gap.attaining_index) : json("tail");
  f["rate_relative_to_gap"] = gap.gap != 0.0 ? json(std::abs(fit.rate - gap.gap) / std::abs(gap.gap)) : json(nullptr);
  f["riesz_condition"] = riesz;
  f["bound_respected"] = bound_ok;
  f["edge_mass_fraction"] = edge;
  f["initial_norm"] = n0;
  f["decomposition_defect"] = defect ? json(*defect) : json(nullptr);
  Outputs out{{"norms.csv", csv.text()}, {"fit.json", dump(f)}};

  if (cmd.smoothing) {
    const auto q = smoothing_functional(plan, u0, cmd.delta, horizon, cmd.n_t);
    json s;
    s["delta"] = cmd.delta;
    s["horizon"] = horizon;
    s["q_full"] = q.q_full;
    s["q_half"] = q.q_half;
    s["tail_increment"] = q.tail_increment();
    s["q_over_norm_sq"] = q.q_full / (n0 * n0);
    out["smoothing.json"] = dump(s);
  }
  return out;
}

// -------------------------------------------------------------- pseudospec

struct PseudospecCmd {
  Common c;
  GridRegion region{-5.0, 40.0, -3.0, 1.0, 64, 32};
};

Outputs run_pseudospec(const PseudospecCmd& cmd) {
  try {
    cmd.region.validate();
  } catch (const SolverError& e) {
    throw UsageError(e.what());
  }
  const auto table = solve_spectrum(cmd.c.nmax, cmd.c.robin(), cmd.c.geometry(), cmd.c.options());
  const double riesz = gram_report(table, static_cast<int>(table.size())).riesz_condition;
  const HalfLineSpectrum spec(table);
  const auto map = resolvent_bound_map(cmd.region, spec, riesz);
  dwcli::Csv csv({"i_re", "i_im", "re_z", "im_z", "bound"});
  for (int j = 0; j < cmd.region.n_im; ++j) {
    for (int i = 0; i < cmd.region.n_re; ++i) {
      const cplx z = cmd.region.point(i, j);
      csv.row({std::to_string(i), std::to_string(j), fmt(z.real()), fmt(z.imag()),
               fmt(map[static_cast<std::size_t>(j) * cmd.region.n_re + i])});
    }
  }
  std::ostringstream title;
  title << "resolvent estimate C / d(z, S), C = " << fmt(std::round(riesz * 1e4) / 1e4);
  return {{"resolvent.csv", csv.text()},
          {"resolvent.svg", dwcli::svg_heatmap(map, cmd.region.n_re, cmd.region.n_im, cmd.region.re_min,
                                                cmd.region.re_max, cmd.region.im_min, cmd.region.im_max, "Re z",
                                                "Im z", title.str())}};
}

// ---------------------------------------------------------------- overdamp

struct OverdampCmd {
  Common c;
  double s_max = 6.0;
  int steps = 121;
};

Outputs run_overdamp(const OverdampCmd& cmd) {
  require_overdamp_direction(cmd.c.robin());
  const auto r = overdamping_scan(cmd.c.robin(), cmd.c.geometry(), cmd.c.nmax, cmd.s_max, cmd.steps, cmd.c.options());
  dwcli::Csv csv({"s", "gap", "attaining_index"});
  for (const auto& g : r.gap_curve) {
    csv.row({fmt(g.s), fmt(g.gap), g.attaining_index ? std::to_string(*g.attaining_index) : "tail"});
  }
  return {{"crossings.json", dump(crossings_json(r))}, {"gap_curve.csv", csv.text()}};
}

// ------------------------------------------------------------------- riesz

struct RieszCmd {
  Common c;
  std::vector<int> sizes{16, 32, 64};
};

Outputs run_riesz(const RieszCmd& cmd) {
  if (cmd.sizes.empty()) throw UsageError("--sizes must not be empty");
  int largest = 0;
  for (int n : cmd.sizes) {
    if (n < 1) throw UsageError("--sizes entries must be >= 1");
    largest = std::max(largest, n);
  }
  const auto table = solve_spectrum(std::max(cmd.c.nmax, largest - 1), cmd.c.robin(), cmd.c.geometry(),
                                    cmd.c.options());
  json list = json::array();
  std::optional<double> prev;
  for (int n : cmd.sizes) {
    const auto rep = gram_report(table, n);
    json e;
    e["size"] = n;
    e["min_eig"] = rep.min_eig;
    e["max_eig"] = rep.max_eig;
    e["riesz_condition"] = rep.riesz_condition;
    e["biorthogonality_residual"] = dual_family(table, static_cast<std::size_t>(n)).biorthogonality_residual();
    e["relative_change"] = prev ? json(std::abs(rep.riesz_condition - *prev) / *prev) : json(nullptr);
    prev = rep.riesz_condition;
    list.push_back(e);
  }
  json out;
  out["robin"] = json::array({cmd.c.al, cmd.c.a0});
  out["reports"] = list;
  return {{"riesz.json", dump(out)}};
}

// --------------------------------------------------------------- smoothing

struct SmoothingCmd {
  Common c;
  double delta = 0.75;
  double horizon = 1.0;
  int doublings = 3;
  int samples = 10;
  int modes = 6;
  int n_x = 128;
  double x_box = 20.0;
  int n_t = 101;
};

Outputs run_smoothing(const SmoothingCmd& cmd) {
  if (cmd.doublings < 1 || cmd.samples < 1 || cmd.modes < 1) throw UsageError("counts must be >= 1");
  if (cmd.n_t < 3 || cmd.n_t % 2 == 0) throw UsageError("--nt must be odd and >= 3");
  if (cmd.c.nmax + 1 < cmd.modes) throw UsageError("--nmax must be at least --modes - 1");
  const auto table = solve_spectrum(cmd.c.nmax, cmd.c.robin(), cmd.c.geometry(), cmd.c.options());
  const auto plan = EvolutionPlan::build(table, cmd.x_box, cmd.n_x, cmd.modes);

  const auto u0 = random_state(plan, cmd.modes, cmd.c.seed);
  json incs = json::array();
  std::optional<double> prev;
  for (int k = 0; k <= cmd.doublings; ++k) {
    // Same time step at every horizon so the Q values are comparable.
    const double t = cmd.horizon * std::ldexp(1.0, k + 1);
    const auto q = smoothing_functional(plan, u0, cmd.delta, t, (cmd.n_t - 1) * (2 << k) + 1);
    json e;
    e["horizon"] = t;
    e["q"] = q.q_full;
    e["increment"] = q.tail_increment();
    e["ratio"] = prev && *prev > 0.0 ? json(q.tail_increment() / *prev) : json(nullptr);
    prev = q.tail_increment();
    incs.push_back(e);
  }
  double worst = 0.0;
  json per = json::array();
  for (int i = 0; i < cmd.samples; ++i) {
    const auto u = random_state(plan, cmd.modes, cmd.c.seed + 1 + static_cast<std::uint64_t>(i));
    const double n0 = state_norm(plan, u);
    const double q = smoothing_functional(plan, u, cmd.delta, cmd.horizon, cmd.n_t).q_full / (n0 * n0);
    worst = std::max(worst, q);
    per.push_back(q);
  }
  json out;
  out["delta"] = cmd.delta;
  out["doublings"] = incs;
  out["q_over_norm_sq"] = per;
  out["max_q_over_norm_sq"] = worst;
  return {{"smoothing.json", dump(out)}};
}

// ---------------------------------------------------------------- manifest

json make_manifest(const std::string& command, const json& params, const Outputs& outputs) {
  json m;
  m["command"] = command;
  m["params"] = params;
  m["version"] = DISSIPWAVE_VERSION;
  json h = json::object();
  for (const auto& [name, content] : outputs) h[name] = dwcli::sha256_hex(content);
  m["outputs"] = h;
  return m;
}

void write_outputs(const std::string& dir, const Outputs& outputs, const json& manifest) {
  fs::create_directories(dir);
  for (const auto& [name, content] : outputs) dwcli::write_file(fs::path(dir) / name, content);
  dwcli::write_file(fs::path(dir) / "manifest.json", dump(manifest));
}

std::vector<std::string> argv_from_manifest(const json& m) {
  std::vector<std::string> args{"dissipwave", m.at("command").get<std::string>()};
  for (const auto& [name, value] : m.at("params").items()) {
    if (value.is_boolean()) {
      if (value.get<bool>()) args.push_back("--" + name);
    } else {
      args.push_back("--" + name);
      args.push_back(value.get<std::string>());
    }
  }
  return args;
}

int verify_dir(const std::string& dir) {
  const json m = json::parse(dwcli::read_file(fs::path(dir) / "manifest.json"));
  int bad = 0;
  for (const auto& [name, hash] : m.at("outputs").items()) {
    const std::string got = dwcli::sha256_hex(dwcli::read_file(fs::path(dir) / name));
    if (got != hash.get<std::string>()) {
      std::cerr << "HashMismatch: " << name << "\n";
      ++bad;
    }
  }
  return bad == 0 ? kExitOk : kExitSolver;
}

int run(std::vector<std::string> args);

int replay(const std::string& manifest_path, const std::string& out_dir, int threads) {
  const json m = json::parse(dwcli::read_file(manifest_path));
  auto args = argv_from_manifest(m);
  args.push_back("--out-dir");
  args.push_back(out_dir);
  args.push_back("--threads");
  args.push_back(std::to_string(threads));
  const int rc = run(args);
  if (rc != kExitOk) return rc;
  const json fresh = json::parse(dwcli::read_file(fs::path(out_dir) / "manifest.json"));
  if (fresh.at("outputs") != m.at("outputs") || fresh.at("params") != m.at("params")) {
    std::cerr << "ReplayMismatch: outputs differ from " << manifest_path << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

int run(std::vector<std::string> args) {
  CLI::App app{"Spectral toolkit for the dissipative Schrodinger waveguide", "dissipwave"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DISSIPWAVE_VERSION);

  SpectrumCmd spectrum;
  auto* s_app = app.add_subcommand("spectrum", "transverse eigenvalues, gap and Gram report");
  Registry s_reg(s_app);
  add_common(s_reg, spectrum.c);

  TrajectoriesCmd traj;
  traj.c.al = 1.0;
  traj.c.a0 = -0.5;
  auto* t_app = app.add_subcommand("trajectories", "eigenvalue branches along s (a_l, a_0)");
  Registry t_reg(t_app);
  add_common(t_reg, traj.c);
  t_reg.option("s-max", traj.s_max, "largest scaling s");
  t_reg.option("steps", traj.steps, "grid points in [0, s_max]");
  t_reg.flag("overdamp", traj.overdamp, "mixed-sign path; also report crossings");

  EvolveCmd evo;
  evo.c.al = 1.0;
  evo.c.a0 = 1.0;
  auto* e_app = app.add_subcommand("evolve", "exact modal evolution, norms and decay fit");
  Registry e_reg(e_app);
  add_common(e_reg, evo.c);
  e_reg.option("modes", evo.modes, "transverse modes carried");
  e_reg.option("initial", evo.initial, "random | mode | gaussian | file");
  e_reg.option("mode-index", evo.mode_index, "mode for --initial mode");
  e_reg.option("grid-file", evo.grid_file, "CSV x,y,re,im for --initial file");
  e_reg.option("x-box", evo.x_box, "half-width L of the periodic x box");
  e_reg.option("nx", evo.n_x, "x grid size (power of two)");
  e_reg.option("t-end", evo.t_end, "horizon (0: 10 / gap)");
  e_reg.option("samples", evo.samples, "time samples in [0, t_end]");
  e_reg.flag("smoothing", evo.smoothing, "also compute the smoothing functional");
  e_reg.option("delta", evo.delta, "weight exponent for --smoothing");
  e_reg.option("nt", evo.n_t, "time nodes for --smoothing (odd)");

  PseudospecCmd ps;
  ps.c.al = 1.0;
  ps.c.a0 = 1.0;
  auto* p_app = app.add_subcommand("pseudospec", "resolvent estimate on a grid");
  Registry p_reg(p_app);
  add_common(p_reg, ps.c);
  p_reg.option("re-min", ps.region.re_min, "grid Re z minimum");
  p_reg.option("re-max", ps.region.re_max, "grid Re z maximum");
  p_reg.option("im-min", ps.region.im_min, "grid Im z minimum");
  p_reg.option("im-max", ps.region.im_max, "grid Im z maximum");
  p_reg.option("n-re", ps.region.n_re, "points along Re z");
  p_reg.option("n-im", ps.region.n_im, "points along Im z");

  OverdampCmd od;
  od.c.al = 1.0;
  od.c.a0 = -0.5;
  od.c.nmax = 5;
  auto* o_app = app.add_subcommand("overdamp", "crossings of Im mu_n and the gap curve");
  Registry o_reg(o_app);
  add_common(o_reg, od.c);
  o_reg.option("s-max", od.s_max, "largest scaling s");
  o_reg.option("steps", od.steps, "grid points in [0, s_max]");

  RieszCmd rz;
  rz.c.al = 1.0;
  rz.c.a0 = 1.0;
  auto* r_app = app.add_subcommand("riesz", "Gram condition across truncations");
  Registry r_reg(r_app);
  add_common(r_reg, rz.c);
  std::string sizes = "16,32,64";
  r_reg.option("sizes", sizes, "comma separated truncation sizes");

  SmoothingCmd sm;
  sm.c.al = 1.0;
  sm.c.a0 = 1.0;
  sm.c.nmax = 16;
  auto* m_app = app.add_subcommand("smoothing", "smoothing functional saturation");
  Registry m_reg(m_app);
  add_common(m_reg, sm.c);
  m_reg.option("delta", sm.delta, "weight exponent (> 1/2)");
  m_reg.option("horizon", sm.horizon, "base horizon T");
  m_reg.option("doublings", sm.doublings, "number of horizon doublings");
  m_reg.option("samples", sm.samples, "random initial states for the ratio bound");
  m_reg.option("modes", sm.modes, "transverse modes carried");
  m_reg.option("nx", sm.n_x, "x grid size (power of two)");
  m_reg.option("x-box", sm.x_box, "half-width L of the periodic x box");
  m_reg.option("nt", sm.n_t, "time nodes per base horizon (odd)");

  std::string manifest_path;
  std::string replay_out = "replay";
  int replay_threads = 1;
  auto* rp_app = app.add_subcommand("replay", "re-run a manifest and compare output hashes");
  rp_app->add_option("manifest", manifest_path, "manifest.json to replay")->required();
  rp_app->add_option("--out-dir", replay_out, "output directory")->capture_default_str();
  rp_app->add_option("--threads", replay_threads, "worker threads")->check(CLI::PositiveNumber);

  std::string verify_path;
  auto* v_app = app.add_subcommand("verify", "check output hashes against manifest.json");
  v_app->add_option("dir", verify_path, "output directory")->required();

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  struct Dispatch {
    CLI::App* app;
    Registry* reg;
    Common* common;
    std::function<Outputs()> body;
  };
  const std::vector<Dispatch> table{
      {s_app, &s_reg, &spectrum.c, [&] { return run_spectrum(spectrum); }},
      {t_app, &t_reg, &traj.c, [&] { return run_trajectories(traj); }},
      {e_app, &e_reg, &evo.c, [&] { return run_evolve(evo); }},
      {p_app, &p_reg, &ps.c, [&] { return run_pseudospec(ps); }},
      {o_app, &o_reg, &od.c, [&] { return run_overdamp(od); }},
      {r_app, &r_reg, &rz.c,
       [&] {
         rz.sizes.clear();
         std::istringstream ss(sizes);
         std::string item;
         while (std::getline(ss, item, ',')) {
           try {
             rz.sizes.push_back(std::stoi(item));
           } catch (const std::exception&) {
             throw UsageError("--sizes must be a comma separated list of integers");
           }
         }
         return run_riesz(rz);
       }},
      {m_app, &m_reg, &sm.c, [&] { return run_smoothing(sm); }},
  };

  try {
    if (*rp_app) return replay(manifest_path, replay_out, replay_threads);
    if (*v_app) return verify_dir(verify_path);
    for (const auto& d : table) {
      if (!*d.app) continue;
      set_thread_count(d.common->threads);
      const Outputs outputs = d.body();
      write_outputs(d.common->out_dir, outputs, make_manifest(d.app->get_name(), d.reg->params(), outputs));
      return kExitOk;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SolverError& e) {
    std::cerr << e.name() << ": " << e.what() << "\n";
    return kExitSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run(std::move(args));
}
