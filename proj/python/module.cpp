#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <sstream>

#include "sktlimit/branch.hpp"
#include "sktlimit/bvp.hpp"
#include "sktlimit/commands.hpp"
#include "sktlimit/config.hpp"
#include "sktlimit/errors.hpp"
#include "sktlimit/model.hpp"
#include "sktlimit/sktfd.hpp"
#include "sktlimit/spectral.hpp"
#include "sktlimit/timemap.hpp"

namespace py = pybind11;
using namespace sktlimit;

namespace {

py::array_t<double> as_array(const std::vector<double>& v) {
  py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

std::string repr_params(const ModelParams& p) {
  std::ostringstream os;
  os.precision(17);
  os << "ModelParams(a1=" << p.a1 << ", a2=" << p.a2 << ", b1=" << p.b1 << ", b2=" << p.b2
     << ", c1=" << p.c1 << ", c2=" << p.c2 << ", gamma=" << p.gamma << ", delta=" << p.delta
     << ")";
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Steady states of the full cross-diffusion limit of the SKT model";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::class_<ModelParams>(m, "ModelParams")
      .def(py::init([](double a1, double a2, double b1, double b2, double c1, double c2,
                       double gamma, double delta) {
             ModelParams p{a1, a2, b1, b2, c1, c2, gamma, delta};
             p.validate();
             return p;
           }),
           py::arg("a1"), py::arg("a2"), py::arg("b1"), py::arg("b2"), py::arg("c1"),
           py::arg("c2"), py::arg("gamma") = 1.0, py::arg("delta") = 1.0)
      .def_readwrite("a1", &ModelParams::a1)
      .def_readwrite("a2", &ModelParams::a2)
      .def_readwrite("b1", &ModelParams::b1)
      .def_readwrite("b2", &ModelParams::b2)
      .def_readwrite("c1", &ModelParams::c1)
      .def_readwrite("c2", &ModelParams::c2)
      .def_readwrite("gamma", &ModelParams::gamma)
      .def_readwrite("delta", &ModelParams::delta)
      .def("__repr__", &repr_params);
  m.def("preset", &preset_model, py::arg("name"), "fig2 (strong) or fig3 (weak) parameters");

  m.def(
      "classify_regime",
      [](const ModelParams& p) {
        const Regime r = classify_regime(p);
        return py::make_tuple(std::string(to_string(r.tag)), r.detail);
      },
      py::arg("p"), "(tag, detail) with tag weak, strong or degenerate");
  m.def("reaction_f", &reaction_f, py::arg("u"), py::arg("v"), py::arg("p"));
  m.def("reaction_g", &reaction_g, py::arg("u"), py::arg("v"), py::arg("p"));
  m.def(
      "uv_from_w",
      [](double w, double tau, const ModelParams& p) {
        const DensityPair q = uv_from_w(w, tau, p);
        return py::make_tuple(q.u, q.v);
      },
      py::arg("w"), py::arg("tau"), py::arg("p"));
  m.def(
      "w_from_uv",
      [](double u, double v, const ModelParams& p) {
        const LimitPair q = w_from_uv(u, v, p);
        return py::make_tuple(q.w, q.tau);
      },
      py::arg("u"), py::arg("v"), py::arg("p"));
  m.def("h_value", &h_value, py::arg("u"), py::arg("tau"), py::arg("p"));
  m.def("h_du", &h_du, py::arg("u"), py::arg("tau"), py::arg("p"));
  m.def("potential_H", &potential_H, py::arg("u"), py::arg("tau"), py::arg("p"));

  py::class_<ZeroTriple>(m, "ZeroTriple")
      .def_readonly("tau", &ZeroTriple::tau)
      .def_readonly("zeros", &ZeroTriple::zeros)
      .def_readonly("complete", &ZeroTriple::complete);
  m.def("zeros_of_h", &zeros_of_h, py::arg("tau"), py::arg("p"));
  m.def("tau_bar", &tau_bar, py::arg("p"));
  m.def("tau_tilde", &tau_tilde, py::arg("p"), py::arg("resolution") = 1e-8);
  m.def("discriminant_D", &discriminant_D, py::arg("p"));

  py::class_<ConstantState>(m, "ConstantState")
      .def_readonly("u_star", &ConstantState::u_star)
      .def_readonly("v_star", &ConstantState::v_star)
      .def_readonly("w_star", &ConstantState::w_star)
      .def_readonly("tau_star", &ConstantState::tau_star);
  m.def("constant_state", &constant_state, py::arg("p"));

  m.def("bifurcation_point", &bifurcation_point, py::arg("p"), py::arg("j"));
  py::class_<SpectralReport>(m, "SpectralReport")
      .def_readonly("d", &SpectralReport::d)
      .def_readonly("mu0", &SpectralReport::mu0)
      .def_readonly("mu_seq", &SpectralReport::mu_seq)
      .def_readonly("sigma", &SpectralReport::sigma)
      .def_readonly("index", &SpectralReport::index);
  m.def("spectral_report", &spectral_report, py::arg("p"), py::arg("d"), py::arg("j_max") = 16);
  m.def("expected_index", &expected_index, py::arg("p"), py::arg("d"));

  m.def(
      "time_map",
      [](double m_, double tau, double d, const ModelParams& p) { return time_map_X(m_, tau, d, p); },
      py::arg("m"), py::arg("tau"), py::arg("d"), py::arg("p"));
  m.def(
      "conjugate",
      [](double m_, double tau, const ModelParams& p) { return conjugate_M(m_, tau, p); },
      py::arg("m"), py::arg("tau"), py::arg("p"));
  m.def(
      "solve_amplitude",
      [](int j, double tau, double d, const ModelParams& p) {
        return solve_amplitude(j, tau, d, p);
      },
      py::arg("j"), py::arg("tau"), py::arg("d"), py::arg("p"));

  py::class_<Profile>(m, "Profile")
      .def_readonly("j", &Profile::j)
      .def_property_readonly("orientation",
                             [](const Profile& p) { return std::string(to_string(p.orientation)); })
      .def_readonly("tau", &Profile::tau)
      .def_readonly("d", &Profile::d)
      .def_readonly("m", &Profile::m)
      .def_readonly("M", &Profile::M)
      .def_property_readonly("x", [](const Profile& p) { return as_array(p.x); })
      .def_property_readonly("u", [](const Profile& p) { return as_array(p.u); })
      .def_property_readonly("w", [](const Profile& p) { return as_array(p.w); })
      .def_readonly("int_f", &Profile::int_f)
      .def_readonly("int_g", &Profile::int_g);
  m.def(
      "reconstruct_profile",
      [](int j, const std::string& o, double m_, double tau, double d, const ModelParams& p,
         int n_nodes) {
        return reconstruct_profile(j, orientation_from_string(o), m_, tau, d, p, n_nodes);
      },
      py::arg("j"), py::arg("orientation"), py::arg("m"), py::arg("tau"), py::arg("d"),
      py::arg("p"), py::arg("n_nodes") = kDefaultProfileNodes);
  m.def("shifted", &shifted, py::arg("profile"));
  m.def(
      "residual_check",
      [](const Profile& prof, const ModelParams& p) {
        const ResidualReport r = residual_check(prof, p);
        return py::dict(py::arg("ode_residual_max") = r.ode_residual_max,
                        py::arg("bc_residual") = r.bc_residual, py::arg("h_scale") = r.h_scale);
      },
      py::arg("profile"), py::arg("p"));

  py::class_<BranchPoint>(m, "BranchPoint")
      .def_readonly("d", &BranchPoint::d)
      .def_readonly("tau", &BranchPoint::tau)
      .def_readonly("m", &BranchPoint::m)
      .def_readonly("M", &BranchPoint::M)
      .def_readonly("j", &BranchPoint::j)
      .def_property_readonly("orientation",
                             [](const BranchPoint& b) { return std::string(to_string(b.orientation)); })
      .def_readonly("amplitude", &BranchPoint::amplitude)
      .def_readonly("int_f", &BranchPoint::int_f)
      .def_readonly("int_g", &BranchPoint::int_g)
      .def_readonly("tau_resolution_limited", &BranchPoint::tau_resolution_limited);
  py::class_<Branch>(m, "Branch")
      .def_readonly("j", &Branch::j)
      .def_property_readonly("orientation",
                             [](const Branch& b) { return std::string(to_string(b.orientation)); })
      .def_readonly("points", &Branch::points)
      .def_readonly("onset_d", &Branch::onset_d)
      .def_property_readonly("endpoint_kind",
                             [](const Branch& b) { return std::string(to_string(b.endpoint.kind)); })
      .def_property_readonly("tau0", [](const Branch& b) { return b.endpoint.tau0; })
      .def_readonly("truncated", &Branch::truncated)
      .def_readonly("diagnostic", &Branch::diagnostic);
  m.def("default_d_grid", &default_d_grid, py::arg("p"), py::arg("j"),
        py::arg("d_min_fraction") = 1e-4, py::arg("onset_points") = 12,
        py::arg("per_decade") = 8);
  m.def(
      "trace_branch",
      [](int j, const std::string& o, const ModelParams& p, const std::vector<double>& grid) {
        return trace_branch(j, orientation_from_string(o), p, grid);
      },
      py::arg("j"), py::arg("orientation"), py::arg("p"), py::arg("d_grid"),
      py::call_guard<py::gil_scoped_release>());
  m.def(
      "solve_branch_point",
      [](int j, const std::string& o, const ModelParams& p, double d) {
        return solve_branch_point(j, orientation_from_string(o), p, d);
      },
      py::arg("j"), py::arg("orientation"), py::arg("p"), py::arg("d"),
      py::call_guard<py::gil_scoped_release>());
  m.def("solve_balance", &solve_balance, py::arg("p"), py::arg("scan_points") = 200);
  m.def(
      "classify_singular_limit",
      [](double tau, const ModelParams& p) {
        const SingularLimit s = classify_singular_limit(tau, p);
        return py::dict(py::arg("kind") = std::string(to_string(s.kind)), py::arg("H1") = s.H1,
                        py::arg("H3") = s.H3, py::arg("eta") = s.eta, py::arg("zeta") = s.zeta);
      },
      py::arg("tau"), py::arg("p"));
  m.def("solve_ell", &solve_ell, py::arg("tau0"), py::arg("p"));

  py::class_<SktParams>(m, "SktParams")
      .def_static("from_limit", &SktParams::from_limit, py::arg("p"), py::arg("d"),
                  py::arg("alpha"), py::arg("N") = 400)
      .def_readonly("d1", &SktParams::d1)
      .def_readonly("d2", &SktParams::d2)
      .def_readonly("alpha", &SktParams::alpha)
      .def_readonly("beta", &SktParams::beta)
      .def_readonly("N", &SktParams::N);
  py::class_<SktSolution>(m, "SktSolution")
      .def_property_readonly("x", [](const SktSolution& s) { return as_array(s.x); })
      .def_property_readonly("u", [](const SktSolution& s) { return as_array(s.u); })
      .def_property_readonly("v", [](const SktSolution& s) { return as_array(s.v); })
      .def_readonly("residual_norm", &SktSolution::residual_norm)
      .def_readonly("iterations", &SktSolution::iterations);
  m.def("constant_guess", &constant_guess, py::arg("sp"));
  m.def("guess_from_profile", &guess_from_profile, py::arg("sp"), py::arg("profile"));
  m.def(
      "solve_skt", [](const SktParams& sp, const SktSolution& guess) { return solve_skt(sp, guess); },
      py::arg("sp"), py::arg("guess"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "compare_with_limit",
      [](const SktSolution& sol, const SktParams& sp, const Profile& limit) {
        const LimitComparison c = compare_with_limit(sol, sp, limit);
        return py::dict(py::arg("tau") = c.tau, py::arg("sup_uv_minus_tau") = c.sup_uv_minus_tau,
                        py::arg("sup_u_distance") = c.sup_u_distance,
                        py::arg("sup_w_distance") = c.sup_w_distance);
      },
      py::arg("sol"), py::arg("sp"), py::arg("limit"));

  m.def(
      "run",
      [](const std::string& command, const std::string& config_path,
         const std::vector<std::string>& overrides) {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        for (const auto& a : overrides) apply_assignment(cfg, a);
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = run_command(command, cfg, CommandIO{&out, nullptr}, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("command"), py::arg("config") = "",
      py::arg("overrides") = std::vector<std::string>{},
      "Runs a batch command; returns (exit_code, report, errors).");
}
