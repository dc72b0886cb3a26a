#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dissipwave/evolution.hpp"
#include "dissipwave/spectrum_geometry.hpp"
#include "dissipwave/sweeps.hpp"

namespace py = pybind11;
using namespace dissipwave;

namespace {

Geometry geom_of(double l) { return Geometry::with_width(l); }

// Plan keeps its table alive on the Python side.
struct PyPlan {
  EvolutionPlan plan;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transverse Robin spectra, eigenbasis, spectral geometry and strip evolution";

  static py::exception<SolverError> solver_error(m, "SolverError", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const SolverError& e) {
      py::object inst = py::reinterpret_borrow<py::object>(solver_error.ptr())(std::string(e.name()) + ": " + e.what());
      inst.attr("kind") = std::string(e.name());
      PyErr_SetObject(solver_error.ptr(), inst.ptr());
    }
  });

  py::class_<RobinPair>(m, "RobinPair")
      .def(py::init<double, double>(), py::arg("a_l"), py::arg("a_0"))
      .def_readwrite("a_l", &RobinPair::a_l)
      .def_readwrite("a_0", &RobinPair::a_0)
      .def("__repr__", [](const RobinPair& r) {
        return "RobinPair(" + std::to_string(r.a_l) + ", " + std::to_string(r.a_0) + ")";
      });

  py::class_<TransverseMode>(m, "TransverseMode")
      .def_readonly("n", &TransverseMode::n)
      .def_readonly("lam", &TransverseMode::lambda)
      .def_readonly("mu", &TransverseMode::mu)
      .def_readonly("residual", &TransverseMode::residual)
      .def_readonly("pairing", &TransverseMode::pairing);

  py::class_<SpectrumTable>(m, "SpectrumTable")
      .def_property_readonly("l", [](const SpectrumTable& t) { return t.geometry.l; })
      .def_readonly("robin", &SpectrumTable::robin)
      .def_readonly("modes", &SpectrumTable::modes)
      .def("__len__", &SpectrumTable::size)
      .def("__getitem__",
           [](const SpectrumTable& t, std::size_t n) {
             if (n >= t.size()) throw py::index_error();
             return t[n];
           })
      .def_property_readonly("lams",
                             [](const SpectrumTable& t) {
                               std::vector<cplx> v;
                               for (const auto& md : t.modes) v.push_back(md.lambda);
                               return v;
                             })
      .def_property_readonly("mus", [](const SpectrumTable& t) {
        std::vector<cplx> v;
        for (const auto& md : t.modes) v.push_back(md.mu);
        return v;
      });

  m.def(
      "characteristic",
      [](cplx lam, const RobinPair& rb, double l) { return characteristic(lam, rb, geom_of(l)).value; },
      py::arg("lam"), py::arg("robin"), py::arg("l"));
  m.def(
      "characteristic_residual",
      [](cplx lam, const RobinPair& rb, double l) { return characteristic_residual(lam, rb, geom_of(l)); },
      py::arg("lam"), py::arg("robin"), py::arg("l"));
  m.def(
      "solve_mode", [](int n, const RobinPair& rb, double l) { return solve_mode(n, rb, geom_of(l)); },
      py::arg("n"), py::arg("robin"), py::arg("l"));
  m.def(
      "solve_spectrum",
      [](int n_max, const RobinPair& rb, double l) { return solve_spectrum(n_max, rb, geom_of(l)); },
      py::arg("n_max"), py::arg("robin"), py::arg("l"));

  py::class_<GramReport>(m, "GramReport")
      .def_readonly("size", &GramReport::size)
      .def_readonly("min_eig", &GramReport::min_eig)
      .def_readonly("max_eig", &GramReport::max_eig)
      .def_readonly("riesz_condition", &GramReport::riesz_condition);
  m.def("gram_report", &gram_report, py::arg("table"), py::arg("n"));
  m.def(
      "gram_matrix",
      [](const SpectrumTable& t, std::size_t n) { return gram_matrix(eigenfunctions(t, n)); }, py::arg("table"),
      py::arg("n"));
  m.def(
      "biorthogonality_residual",
      [](const SpectrumTable& t, std::size_t n) { return dual_family(t, n).biorthogonality_residual(); },
      py::arg("table"), py::arg("n"));
  m.def(
      "eigenfunction",
      [](const SpectrumTable& t, std::size_t n, const std::vector<double>& y) {
        if (n >= t.size()) throw py::index_error();
        const auto form = make_eigenfunction(t[n], t.robin, t.geometry);
        std::vector<cplx> out;
        out.reserve(y.size());
        for (double yy : y) out.push_back(eigenfunction_eval(form, yy));
        return out;
      },
      py::arg("table"), py::arg("n"), py::arg("y"));

  py::class_<GapReport>(m, "GapReport")
      .def_readonly("gap", &GapReport::gap)
      .def_readonly("attaining_index", &GapReport::attaining_index)
      .def_readonly("depth_ok", &GapReport::depth_ok);
  m.def(
      "spectral_gap", [](const SpectrumTable& t) { return spectral_gap(HalfLineSpectrum(t)); }, py::arg("table"));
  m.def(
      "spectrum_distance",
      [](const SpectrumTable& t, const std::vector<cplx>& z) {
        const HalfLineSpectrum spec(t);
        std::vector<double> out;
        out.reserve(z.size());
        for (cplx zz : z) out.push_back(spectrum_distance(zz, spec).distance);
        return out;
      },
      py::arg("table"), py::arg("z"));

  py::class_<TrajectoryPoint>(m, "TrajectoryPoint")
      .def_readonly("s", &TrajectoryPoint::s)
      .def_readonly("n", &TrajectoryPoint::n)
      .def_readonly("lam", &TrajectoryPoint::lambda)
      .def_readonly("mu", &TrajectoryPoint::mu);
  py::class_<Crossing>(m, "Crossing")
      .def_readonly("n", &Crossing::n)
      .def_readonly("s_star", &Crossing::s_star)
      .def_readonly("im_mu", &Crossing::im_mu);
  py::class_<GapSample>(m, "GapSample")
      .def_readonly("s", &GapSample::s)
      .def_readonly("gap", &GapSample::gap)
      .def_readonly("attaining_index", &GapSample::attaining_index);
  py::class_<SweepReport>(m, "SweepReport")
      .def_readonly("s_grid", &SweepReport::s_grid)
      .def_readonly("branches", &SweepReport::branches)
      .def_readonly("crossings", &SweepReport::crossings)
      .def_readonly("gap_curve", &SweepReport::gap_curve);

  m.def(
      "trajectory",
      [](int n, const RobinPair& dir, double l, double s_max, int steps) {
        return trajectory(n, dir, geom_of(l), s_max, steps);
      },
      py::arg("n"), py::arg("direction"), py::arg("l"), py::arg("s_max") = 1.0, py::arg("steps") = 101);
  m.def(
      "overdamping_scan",
      [](const RobinPair& dir, double l, int n_max, double s_max, int steps) {
        return overdamping_scan(dir, geom_of(l), n_max, s_max, steps);
      },
      py::arg("direction"), py::arg("l"), py::arg("n_max") = 5, py::arg("s_max") = 6.0, py::arg("steps") = 121);
  m.def(
      "figure_data",
      [](double l, int n_max, const RobinPair& dir, double s_max, int steps) {
        return figure_data({geom_of(l), n_max, dir, s_max, steps});
      },
      py::arg("l") = std::numbers::pi, py::arg("n_max") = 30, py::arg("direction") = RobinPair{1.0, -0.5},
      py::arg("s_max") = 1.0, py::arg("steps") = 101);

  py::class_<ModalState>(m, "ModalState")
      .def_readonly("t", &ModalState::t)
      .def_readonly("coeffs", &ModalState::coeffs);

  py::class_<PyPlan>(m, "EvolutionPlan")
      .def(py::init([](const SpectrumTable& t, double x_box, int n_x, int n_modes) {
             return PyPlan{EvolutionPlan::build(t, x_box, n_x, n_modes)};
           }),
           py::arg("table"), py::arg("x_box") = 20.0, py::arg("n_x") = 256, py::arg("n_modes") = 6)
      .def_property_readonly("x", [](const PyPlan& p) { return p.plan.x_nodes(); })
      .def("random_state", [](const PyPlan& p, int modes, std::uint64_t seed) { return random_state(p.plan, modes, seed); },
           py::arg("modes"), py::arg("seed"))
      .def(
          "mode_state",
          [](const PyPlan& p, int n, double center, double width, double k0) {
            return mode_pure_state(p.plan, n, gaussian_profile(p.plan, center, width, k0));
          },
          py::arg("n"), py::arg("center") = 0.0, py::arg("width") = 1.0, py::arg("wavenumber") = 0.0)
      .def(
          "decompose",
          [](const PyPlan& p, const Eigen::MatrixXcd& values) {
            const auto d = initial_decompose(p.plan, WaveState{0.0, values});
            return py::make_tuple(d.state, d.defect);
          },
          py::arg("values"))
      .def("propagate", [](const PyPlan& p, const ModalState& s, double t) { return propagate(p.plan, s, t); },
           py::arg("state"), py::arg("t"))
      .def("synthesize", [](const PyPlan& p, const ModalState& s) { return synthesize(p.plan, s).values; },
           py::arg("state"))
      .def("norm", [](const PyPlan& p, const ModalState& s) { return state_norm(p.plan, s); }, py::arg("state"))
      .def(
          "smoothing",
          [](const PyPlan& p, const ModalState& s, double delta, double horizon, int n_t) {
            const auto r = smoothing_functional(p.plan, s, delta, horizon, n_t);
            return py::make_tuple(r.q_full, r.q_half);
          },
          py::arg("state"), py::arg("delta"), py::arg("horizon"), py::arg("n_t") = 101);

  m.def(
      "decay_fit",
      [](const std::vector<double>& t, const std::vector<double>& norms, double t0, double t1) {
        const auto f = decay_fit(t, norms, t0, t1);
        return py::make_tuple(f.rate, f.intercept);
      },
      py::arg("times"), py::arg("norms"), py::arg("window_begin"), py::arg("window_end"));
  m.def(
      "fd_transverse_eigenvalues",
      [](const RobinPair& rb, double l, int n_y) { return fd_transverse_eigenvalues(rb, geom_of(l), n_y); },
      py::arg("robin"), py::arg("l"), py::arg("n_y"));
}
