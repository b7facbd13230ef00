#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "asnn/cli.hpp"
#include "asnn/config.hpp"
#include "asnn/errors.hpp"
#include "asnn/masnn.hpp"

namespace py = pybind11;
using namespace asnn;
using nlohmann::json;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const Field& f) {
    Array a({f.grid().nx, f.grid().nt});
    std::copy(f.values().begin(), f.values().end(), a.mutable_data());
    return a;
}

Field to_field(const Array& a, const Grid& g) {
    if (a.ndim() != 2 || std::size_t(a.shape(0)) != g.nx || std::size_t(a.shape(1)) != g.nt)
        throw ShapeError("array shape does not match the grid (nx, nt)");
    return Field(g, Quantity::speed, std::vector<double>(a.data(), a.data() + a.size()));
}

ObservationSet to_obs(const Array& x, const Array& t, const Array& v) {
    if (x.ndim() != 1 || t.ndim() != 1 || v.ndim() != 1 || x.size() != t.size() || x.size() != v.size())
        throw ShapeError("x, t and v must be 1-d arrays of equal length");
    ObservationSet obs;
    for (py::ssize_t k = 0; k < x.size(); ++k) obs.add({x.data()[k], t.data()[k], v.data()[k]});
    return obs;
}

RunConfig config_of(const std::string& text) {
    return RunConfig::from_json(merge_config_json(json::parse(text.empty() ? "{}" : text)));
}

py::dict report_dict(const TrainReport& r) {
    py::dict d;
    d["params"] = r.final_params;
    d["cost_history"] = r.cost_history;
    d["epochs"] = r.epochs_run;
    d["stop_reason"] = to_string(r.stop_reason);
    d["warnings"] = r.warnings;
    return d;
}

}  // namespace

PYBIND11_MODULE(_asnn, m) {
    m.doc() = "Traffic speed field reconstruction: ASM, trained ASM and ensembles";

    auto base = py::register_exception<Error>(m, "AsnnError", PyExc_RuntimeError);
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<ShapeError>(m, "ShapeError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<IoError>(m, "IoError", base.ptr());
    py::register_exception<DivergenceError>(m, "DivergenceError", base.ptr());

    py::class_<Grid>(m, "Grid")
        .def(py::init<double, double, std::size_t, double, double, std::size_t>(), py::arg("x0"), py::arg("dx"),
             py::arg("nx"), py::arg("t0"), py::arg("dt"), py::arg("nt"))
        .def_readonly("x0", &Grid::x0)
        .def_readonly("dx", &Grid::dx)
        .def_readonly("nx", &Grid::nx)
        .def_readonly("t0", &Grid::t0)
        .def_readonly("dt", &Grid::dt)
        .def_readonly("nt", &Grid::nt)
        .def("__eq__", [](const Grid& a, const Grid& b) { return a == b; })
        .def("__repr__", [](const Grid& g) {
            std::ostringstream s;
            s << "Grid(x0=" << g.x0 << ", dx=" << g.dx << ", nx=" << g.nx << ", t0=" << g.t0 << ", dt=" << g.dt
              << ", nt=" << g.nt << ")";
            return s.str();
        });

    py::class_<AsmParams>(m, "AsmParams")
        .def(py::init([](double c_free, double c_cong, double v_thr, double dv, double sigma, double tau) {
                 AsmParams p{c_free, c_cong, v_thr, dv, sigma, tau};
                 p.validate();
                 return p;
             }),
             py::arg("c_free"), py::arg("c_cong"), py::arg("v_thr"), py::arg("dv"), py::arg("sigma"),
             py::arg("tau"))
        .def_static("typical", &AsmParams::typical, py::arg("detector_spacing"), py::arg("sampling_period"))
        .def_readwrite("c_free", &AsmParams::c_free)
        .def_readwrite("c_cong", &AsmParams::c_cong)
        .def_readwrite("v_thr", &AsmParams::v_thr)
        .def_readwrite("dv", &AsmParams::dv)
        .def_readwrite("sigma", &AsmParams::sigma)
        .def_readwrite("tau", &AsmParams::tau)
        .def("__eq__", [](const AsmParams& a, const AsmParams& b) { return a == b; })
        .def("__repr__", [](const AsmParams& p) {
            std::ostringstream s;
            s << "AsmParams(c_free=" << p.c_free << ", c_cong=" << p.c_cong << ", v_thr=" << p.v_thr
              << ", dv=" << p.dv << ", sigma=" << p.sigma << ", tau=" << p.tau << ")";
            return s.str();
        });

    m.def("_default_config", [] { return default_config_json().dump(); });
    m.def("_resolve_config", [](const std::string& text) { return config_of(text).to_json().dump(); });

    m.def(
        "_simulate",
        [](const std::string& cfg_text) {
            const RunConfig cfg = config_of(cfg_text);
            const auto& s = cfg.simulation;
            const Field rho = simulate(s.initial_profile(), s.steps, cfg.fd, s.dx, s.dt, s.boundary);
            return py::make_tuple(rho.grid(), to_array(to_speed(rho, cfg.fd)), to_array(rho));
        },
        py::arg("config"));

    m.def(
        "_sample_detectors",
        [](const Array& speed, const Grid& g, const std::string& cfg_text) {
            const ObservationSet obs = sample_detectors(to_field(speed, g), config_of(cfg_text).sampling);
            Array x(obs.size()), t(obs.size()), v(obs.size());
            for (std::size_t k = 0; k < obs.size(); ++k) {
                x.mutable_data()[k] = obs[k].x;
                t.mutable_data()[k] = obs[k].t;
                v.mutable_data()[k] = obs[k].value;
            }
            return py::make_tuple(x, t, v);
        },
        py::arg("speed"), py::arg("grid"), py::arg("config"));

    m.def(
        "asm_estimate",
        [](const Grid& g, const Array& x, const Array& t, const Array& v, const AsmParams& p,
           std::optional<double> cutoff) {
            AsmOptions opts;
            opts.cutoff = cutoff;
            return to_array(asm_estimate(to_obs(x, t, v), g, p, opts));
        },
        py::arg("grid"), py::arg("x"), py::arg("t"), py::arg("v"), py::arg("params"), py::arg("cutoff") = py::none(),
        "ASM speed field of shape (nx, nt) from scattered observations (SI units).");

    m.def(
        "_train",
        [](const Grid& g, const Array& x, const Array& t, const Array& v, const std::string& cfg_text,
           std::optional<AsmParams> init) {
            const RunConfig cfg = config_of(cfg_text);
            const ObservationSet obs = to_obs(x, t, v);
            const AsnnObjective objective(obs, g, cfg.cost, cfg.train.asm_options);
            const TrainReport r = train(objective, cfg.train, init ? *init : cfg.asm_params(g));
            py::dict d = report_dict(r);
            d["estimate"] = to_array(objective.forward(r.final_params));
            return d;
        },
        py::arg("grid"), py::arg("x"), py::arg("t"), py::arg("v"), py::arg("config"), py::arg("init") = py::none());

    m.def(
        "_train_ensemble",
        [](const Grid& g, const Array& x, const Array& t, const Array& v, const std::string& cfg_text) {
            const RunConfig cfg = config_of(cfg_text);
            const ObservationSet obs = to_obs(x, t, v);
            const TrainConfig tcfg = cfg.ensemble_train();
            const AsnnObjective objective(obs, g, cfg.cost, tcfg.asm_options);
            const MasnnReport r = train_masnn(objective, tcfg, cfg.ensemble_inits(g).branches());
            py::dict d = report_dict(r.joint);
            d["branches"] = r.ensemble.branches;
            d["weights"] = r.ensemble.weights();
            d["vertex_restart"] = r.vertex_restart;
            d["estimate"] = to_array(masnn_forward(r.ensemble, obs, g, tcfg.asm_options));
            return d;
        },
        py::arg("grid"), py::arg("x"), py::arg("t"), py::arg("v"), py::arg("config"));

    m.def(
        "relative_error",
        [](const Array& est, const Array& truth) {
            if (est.ndim() != 2 || truth.ndim() != 2 || est.shape(0) != truth.shape(0) ||
                est.shape(1) != truth.shape(1))
                throw ShapeError("estimate and truth must be 2-d arrays of equal shape");
            const Grid g(0.0, 1.0, std::size_t(est.shape(0)), 0.0, 1.0, std::size_t(est.shape(1)));
            return relative_error(to_field(est, g), to_field(truth, g));
        },
        py::arg("estimate"), py::arg("truth"), "||est - truth|| / ||truth|| (Frobenius).");

    m.def(
        "_physics_residual",
        [](const Array& speed, const Grid& g, const std::string& cfg_text) {
            return physics_residual(to_field(speed, g), config_of(cfg_text).fd);
        },
        py::arg("speed"), py::arg("grid"), py::arg("config"));

    m.def(
        "cli",
        [](const std::vector<std::string>& args) {
            std::vector<const char*> argv = {"asnn"};
            for (const auto& a : args) argv.push_back(a.c_str());
            std::ostringstream out, err;
            int code;
            {
                py::gil_scoped_release release;
                code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
            }
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the asnn command line in-process; returns (exit_code, stdout, stderr).");
}
