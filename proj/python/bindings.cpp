#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "piezo/diagnostics.hpp"
#include "piezo/error.hpp"
#include "piezo/evolution.hpp"
#include "piezo/grid.hpp"
#include "piezo/operator.hpp"
#include "piezo/params.hpp"
#include "piezo/spectral.hpp"

namespace py = pybind11;
using namespace piezo;

namespace {

// Dense copies: the library keeps sparse storage, numpy callers want arrays.
Eigen::MatrixXd dense(const SparseMatrix& s) { return Eigen::MatrixXd(s); }

InitialSpec initial_from(const std::string& kind, std::uint64_t seed, std::array<int, kInitialBlocks> modes,
                         double amplitude) {
  if (kind == "zero") return ZeroInitial{};
  if (kind == "sine") return SineModeInitial{modes, amplitude};
  if (kind == "random") return SeededRandomInitial{seed};
  throw Error(ErrorCode::InvalidConfig, "initial must be zero, sine or random, got " + kind);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Piezoelectric beam with heat conduction of memory type: discretisation and diagnostics";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object cls = py::module_::import("piezolab").attr("PiezoError");
      py::object inst = cls(std::string(to_string(e.code())), e.what());
      PyErr_SetObject(cls.ptr(), inst.ptr());
    }
  });

  py::class_<PhysicalParams>(m, "PhysicalParams")
      .def_property_readonly("rho", &PhysicalParams::rho)
      .def_property_readonly("alpha1", &PhysicalParams::alpha1)
      .def_property_readonly("gamma", &PhysicalParams::gamma)
      .def_property_readonly("beta", &PhysicalParams::beta)
      .def_property_readonly("mu", &PhysicalParams::mu)
      .def_property_readonly("delta", &PhysicalParams::delta)
      .def_property_readonly("c", &PhysicalParams::c)
      .def_property_readonly("m", &PhysicalParams::m)
      .def_property_readonly("length", &PhysicalParams::length)
      .def_property_readonly("alpha", &PhysicalParams::alpha)
      .def_property_readonly("wave_speed", &PhysicalParams::wave_speed);

  m.def(
      "make_params",
      [](double rho, double alpha1, double gamma, double beta, double mu, double delta, double c, double mix,
         double length) {
        return make_params({rho, alpha1, gamma, beta, mu, delta, c, mix, length});
      },
      py::arg("rho") = 1.0, py::arg("alpha1") = 1.0, py::arg("gamma") = 1.0, py::arg("beta") = 1.0,
      py::arg("mu") = 1.0, py::arg("delta") = 1.0, py::arg("c") = 1.0, py::arg("m") = 0.5,
      py::arg("length") = 1.0);

  py::class_<MemoryKernel>(m, "MemoryKernel")
      .def_static("exponential", &MemoryKernel::exponential, py::arg("k") = 1.0)
      .def_static("tabulated", &MemoryKernel::tabulated, py::arg("s"), py::arg("sigma"), py::arg("d_sigma"))
      .def_property_readonly("g0", &MemoryKernel::g0)
      .def_property_readonly("d_sigma", &MemoryKernel::d_sigma)
      .def("sigma", &MemoryKernel::sigma)
      .def("g", &MemoryKernel::g)
      .def("truncation_point", &MemoryKernel::truncation_point, py::arg("rel_tol") = 1e-8);

  py::class_<DafermosReport>(m, "DafermosReport")
      .def_readonly("holds", &DafermosReport::holds)
      .def_readonly("worst_margin", &DafermosReport::worst_margin)
      .def_readonly("worst_at", &DafermosReport::worst_at);
  m.def("check_dafermos", [](const MemoryKernel& k) { return check_dafermos(k, default_dafermos_grid(k)); });

  py::class_<DissipationConstants>(m, "DissipationConstants")
      .def_readonly("k1", &DissipationConstants::k1)
      .def_readonly("k2", &DissipationConstants::k2)
      .def_readonly("k3", &DissipationConstants::k3)
      .def_readonly("k4", &DissipationConstants::k4);
  m.def("dissipation_constants", &dissipation_constants);
  m.def("poincare_one_end", &poincare_one_end);

  py::class_<GridSpec>(m, "GridSpec")
      .def_readonly("n_x", &GridSpec::n_x)
      .def_readonly("n_s", &GridSpec::n_s)
      .def_readonly("h", &GridSpec::h)
      .def_readonly("s_max", &GridSpec::s_max)
      .def_readonly("s_nodes", &GridSpec::s_nodes)
      .def_readonly("s_weights", &GridSpec::s_weights)
      .def_property_readonly("dim", &GridSpec::dim);
  m.def("build_grid", [](const PhysicalParams& p, const MemoryKernel& k, int n_x, int n_s) {
    return build_grid(p, k, n_x, n_s);
  });

  py::class_<DiscreteOperator>(m, "DiscreteOperator")
      .def_property_readonly("dim", &DiscreteOperator::dim)
      .def_property_readonly("grid", &DiscreteOperator::grid)
      .def_property_readonly("params", &DiscreteOperator::params)
      .def_property_readonly("matrix", [](const DiscreteOperator& op) { return dense(op.sparse_matrix()); })
      .def_property_readonly("gram", [](const DiscreteOperator& op) { return dense(op.sparse_gram()); })
      .def("apply", [](const DiscreteOperator& op, const StateVector& u) { return apply(op, u); })
      .def("solve_static", [](const DiscreteOperator& op, const StateVector& f) { return solve_static(op, f); })
      .def("energy_norm", [](const DiscreteOperator& op, const StateVector& u) { return energy_norm(op, u); });
  m.def("assemble", &assemble);

  py::class_<EnergyBreakdown>(m, "EnergyBreakdown")
      .def_readonly("e1", &EnergyBreakdown::e1)
      .def_readonly("e2", &EnergyBreakdown::e2)
      .def_readonly("e3", &EnergyBreakdown::e3)
      .def_readonly("total", &EnergyBreakdown::total)
      .def_readonly("flux_dissipation", &EnergyBreakdown::flux_dissipation)
      .def_readonly("memory_dissipation", &EnergyBreakdown::memory_dissipation);
  m.def("energy", &energy);

  m.def(
      "initial_state",
      [](const DiscreteOperator& op, const std::string& kind, std::uint64_t seed, std::array<int, kInitialBlocks> modes,
         double amplitude) { return initial_state(op, initial_from(kind, seed, modes, amplitude)); },
      py::arg("op"), py::arg("kind") = "random", py::arg("seed") = 0,
      py::arg("modes") = std::array<int, kInitialBlocks>{1, 0, 0, 0, 1}, py::arg("amplitude") = 1.0);

  // Returns plain arrays: times, total energies, the identity residual and the final state.
  m.def(
      "simulate",
      [](const DiscreteOperator& op, double t_final, double dt, int record_every, const std::string& kind,
         std::uint64_t seed) {
        SimConfig cfg;
        cfg.dt = dt;
        cfg.t_final = t_final;
        cfg.record_every = record_every;
        cfg.initial = initial_from(kind, seed, {1, 0, 0, 0, 1}, 1.0);
        Trajectory traj;
        {
          py::gil_scoped_release release;
          traj = simulate(op, cfg);
        }
        std::vector<double> totals;
        for (const auto& e : traj.energies) totals.push_back(e.total);
        py::dict out;
        out["times"] = traj.times;
        out["energy"] = totals;
        out["dt"] = traj.dt;
        out["identity_residual"] = energy_identity_residual(op, traj).per_interval;
        out["final_state"] = traj.states.back();
        return out;
      },
      py::arg("op"), py::arg("t_final"), py::arg("dt") = 0.0, py::arg("record_every") = 1,
      py::arg("initial") = "random", py::arg("seed") = 0);

  py::class_<DecayFit>(m, "DecayFit")
      .def_readonly("coefficient", &DecayFit::coefficient)
      .def_readonly("rate", &DecayFit::rate)
      .def_readonly("r_squared", &DecayFit::r_squared)
      .def_readonly("samples", &DecayFit::samples);
  m.def("fit_exponential", [](const std::vector<double>& t, const std::vector<double>& e, double lo, double hi) {
    return fit_exponential(t, e, {lo, hi});
  });
  m.def("fit_polynomial", [](const std::vector<double>& t, const std::vector<double>& e, double lo, double hi) {
    return fit_polynomial(t, e, {lo, hi});
  });

  py::class_<DissipationBoundsReport>(m, "DissipationBoundsReport")
      .def_readonly("lhs", &DissipationBoundsReport::lhs)
      .def_readonly("bound", &DissipationBoundsReport::bound)
      .def_readonly("ratio", &DissipationBoundsReport::ratio)
      .def_property_readonly("worst_ratio", &DissipationBoundsReport::worst_ratio);
  m.def("check_dissipation_bounds", &check_dissipation_bounds);

  m.def("eigenvalues", [](const DiscreteOperator& op) {
    py::gil_scoped_release release;
    return eigenvalues(op);
  });

  py::enum_<ResolventMethod>(m, "ResolventMethod")
      .value("Auto", ResolventMethod::Auto)
      .value("DenseSvd", ResolventMethod::DenseSvd)
      .value("Iterative", ResolventMethod::Iterative);
  m.def("resolvent_norm", &resolvent_norm, py::arg("op"), py::arg("lam"),
        py::arg("method") = ResolventMethod::Auto, py::call_guard<py::gil_scoped_release>());

  py::class_<ResolventScan>(m, "ResolventScan")
      .def_readonly("lambdas", &ResolventScan::lambdas)
      .def_readonly("norms", &ResolventScan::norms)
      .def_readonly("growth_exponent", &ResolventScan::growth_exponent)
      .def_readonly("max_norm", &ResolventScan::max_norm)
      .def_property_readonly("singular_count", &ResolventScan::singular_count);
  m.def(
      "resolvent_scan",
      [](const DiscreteOperator& op, const std::vector<double>& lambdas, ResolventMethod method, double tail_decades,
         int threads) {
        ScanOptions opts{method, tail_decades, threads};
        py::gil_scoped_release release;
        return resolvent_scan(op, lambdas, opts);
      },
      py::arg("op"), py::arg("lambdas"), py::arg("method") = ResolventMethod::Auto, py::arg("tail_decades") = 1.0,
      py::arg("threads") = 0);
  m.def("log_grid", &log_grid);

  m.def(
      "classify",
      [](const DiscreteOperator& op, const ResolventScan& scan, double tail_decades) {
        const RegimeReport r = classify(scan, summarize(op, eigenvalues(op)), tail_decades);
        py::dict out;
        out["regime"] = to_string(r.regime);
        out["growth_exponent"] = r.growth_exponent;
        out["max_norm"] = r.max_norm;
        out["eigen_evidence"] = r.eigen_evidence;
        out["max_real"] = r.eigen.max_real;
        out["rationale"] = r.rationale;
        return out;
      },
      py::arg("op"), py::arg("scan"), py::arg("tail_decades") = 1.0);
}
