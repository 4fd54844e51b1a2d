#include "simcav/config.hpp"
#include "simcav/core_model.hpp"
#include "simcav/csv.hpp"
#include "simcav/observables.hpp"
#include "simcav/propagator.hpp"
#include "simcav/scenarios.hpp"

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace simcav;

namespace {

py::array_t<double> to_array(const std::vector<double>& v) { return py::array_t<double>(v.size(), v.data()); }

py::array_t<std::complex<double>> to_array(const std::vector<cplx>& v) {
    return py::array_t<std::complex<double>>(v.size(), v.data());
}

py::dict series_dict(const ObservableSeries& s) {
    py::dict d;
    d["t"] = to_array(s.times);
    d["norm"] = to_array(s.norm);
    d["W"] = to_array(s.inversion);
    d["pop_plus"] = to_array(s.pop_plus);
    d["pop_minus"] = to_array(s.pop_minus);
    d["mean_z"] = to_array(s.mean_z);
    d["mean_p"] = to_array(s.mean_p);
    d["reflect"] = to_array(s.reflect);
    d["transmit"] = to_array(s.transmit);
    d["inside"] = to_array(s.inside);
    d["energy"] = to_array(s.energy);
    return d;
}

}  // namespace

PYBIND11_MODULE(_simcav, m) {
    m.doc() = "Atom-cavity wave-packet dynamics in bare and dressed bases";
    m.attr("__version__") = SIMCAV_VERSION;

    auto error = py::register_exception<Error>(m, "SimcavError", PyExc_RuntimeError);
    py::register_exception<InvalidArgument>(m, "InvalidArgument", error.ptr());
    py::register_exception<DegenerateFrame>(m, "DegenerateFrame", error.ptr());
    py::register_exception<GridTooCoarse>(m, "GridTooCoarse", error.ptr());
    py::register_exception<BoundaryContact>(m, "BoundaryContact", error.ptr());
    py::register_exception<LinearSolveFailure>(m, "LinearSolveFailure", error.ptr());
    py::register_exception<PacketNotCleared>(m, "PacketNotCleared", error.ptr());
    py::register_exception<IoError>(m, "IoError", error.ptr());

    py::class_<SystemParams>(m, "SystemParams")
        .def(py::init<double, double, double, double, int>(), py::arg("mass"), py::arg("detuning"),
             py::arg("field_freq") = 0.0, py::arg("coupling") = 1.0, py::arg("photon_n") = 0)
        .def_property_readonly("mass", &SystemParams::mass)
        .def_property_readonly("detuning", &SystemParams::detuning)
        .def_property_readonly("field_freq", &SystemParams::field_freq)
        .def_property_readonly("coupling", &SystemParams::coupling)
        .def_property_readonly("photon_n", &SystemParams::photon_n)
        .def("with_photon_n", &SystemParams::with_photon_n)
        .def("__repr__", [](const SystemParams& p) {
            std::ostringstream os;
            os << "SystemParams(mass=" << p.mass() << ", detuning=" << p.detuning() << ", field_freq="
               << p.field_freq() << ", coupling=" << p.coupling() << ", photon_n=" << p.photon_n() << ")";
            return os.str();
        });

    py::class_<ModeProfile>(m, "ModeProfile")
        .def_static("mesa", py::overload_cast<>(&ModeProfile::mesa))
        .def_static("zero", &ModeProfile::zero, py::arg("z_on"), py::arg("z_off"))
        .def_static("sine_squared", &ModeProfile::sine_squared, py::arg("z_on"), py::arg("z_off"),
                    py::arg("half_periods") = 1)
        .def_static("gaussian", &ModeProfile::gaussian, py::arg("z_on"), py::arg("z_off"), py::arg("width"))
        .def_property_readonly("kind", [](const ModeProfile& p) { return std::string(to_string(p.kind())); })
        .def("value", &ModeProfile::value)
        .def("slope", &ModeProfile::slope)
        .def("curvature", &ModeProfile::curvature);

    m.def("rabi_radical", &rabi_radical, py::arg("params"), py::arg("f") = 1.0);
    m.def(
        "eigenvalues",
        [](const SystemParams& p, double f) {
            const auto e = eigenvalues(p, f);
            return py::make_tuple(e.plus, e.minus);
        },
        py::arg("params"), py::arg("f") = 1.0);
    m.def("mixing_angle", &mixing_angle, py::arg("params"), py::arg("f") = 1.0);
    m.def(
        "identity_tan_forms",
        [](const SystemParams& p, double f) {
            const auto t = identity_tan_forms(p, f);
            return py::make_tuple(t.via_difference, t.via_sum);
        },
        py::arg("params"), py::arg("f") = 1.0);
    m.def(
        "double_angle",
        [](const SystemParams& p, double f) {
            const auto d = double_angle(p, f);
            return py::make_tuple(d.cos2, d.sin2, d.tan2);
        },
        py::arg("params"), py::arg("f") = 1.0);
    m.def(
        "potential_matrix",
        [](const SystemParams& p, const ModeProfile& prof, double z, bool ip) {
            const auto v = potential_matrix(p, prof, z, ip);
            py::array_t<std::complex<double>> out({2, 2});
            auto r = out.mutable_unchecked<2>();
            for (int i = 0; i < 2; ++i) {
                for (int j = 0; j < 2; ++j) r(i, j) = v(i, j);
            }
            return out;
        },
        py::arg("params"), py::arg("profile"), py::arg("z") = 0.0, py::arg("interaction_picture") = false);

    py::class_<DressedFrame>(m, "DressedFrame")
        .def(py::init<SystemParams, ModeProfile>())
        .def("theta", &DressedFrame::theta)
        .def("dtheta_dz", &DressedFrame::dtheta_dz)
        .def("d2theta_dz2", &DressedFrame::d2theta_dz2)
        .def("radical", &DressedFrame::radical)
        .def("potentials", [](const DressedFrame& f, double z) {
            const auto v = f.potentials(z);
            return py::make_tuple(v.plus, v.minus);
        });

    py::class_<Grid>(m, "Grid")
        .def(py::init<double, double, std::size_t, double, std::size_t>(), py::arg("z_min"), py::arg("z_max"),
             py::arg("n_points"), py::arg("dt"), py::arg("n_steps"))
        .def_property_readonly("dz", &Grid::dz)
        .def_property_readonly("k_max", &Grid::k_max)
        .def_property_readonly("n_points", &Grid::n_points)
        .def_property_readonly("n_steps", &Grid::n_steps)
        .def_property_readonly("dt", &Grid::dt)
        .def("z", [](const Grid& g) {
            std::vector<double> z(g.n_points());
            for (std::size_t i = 0; i < z.size(); ++i) z[i] = g.z(i);
            return to_array(z);
        });

    py::class_<InitialCondition>(m, "InitialCondition")
        .def(py::init([](double z0, double sigma_z, double p0, const std::string& prep,
                         std::vector<std::pair<int, double>> sectors) {
                 InitialCondition ic{z0, sigma_z, p0, preparation_from_string(prep), {}};
                 for (const auto& [n, w] : sectors) ic.sectors.push_back({n, w});
                 return ic;
             }),
             py::arg("z0") = 0.0, py::arg("sigma_z") = 1.0, py::arg("p0") = 0.0,
             py::arg("preparation") = "bare-excited", py::arg("sectors") = std::vector<std::pair<int, double>>{})
        .def_readwrite("z0", &InitialCondition::z0)
        .def_readwrite("sigma_z", &InitialCondition::sigma_z)
        .def_readwrite("p0", &InitialCondition::p0);

    m.def(
        "coherent_sector_weights",
        [](double mean, int truncation) {
            std::vector<std::pair<int, double>> out;
            for (const auto& s : coherent_sector_weights(mean, truncation)) out.emplace_back(s.photon_n, s.weight);
            return out;
        },
        py::arg("mean"), py::arg("truncation") = 24);

    m.def(
        "simulate",
        [](const InitialCondition& ic, const SystemParams& p, const ModeProfile& prof, const Grid& g,
           const std::string& basis, std::size_t stride, bool interaction_picture) {
            EvolveOptions o;
            o.stride = stride;
            o.interaction_picture = interaction_picture;
            const BasisMode mode = basis == "dressed" ? BasisMode::Dressed : BasisMode::Bare;
            if (basis != "dressed" && basis != "bare") throw InvalidArgument("basis must be 'bare' or 'dressed'");
            ObservableSeries s;
            {
                py::gil_scoped_release release;
                s = record_series(ic, p, prof, g, mode, o);
            }
            return series_dict(s);
        },
        py::arg("initial"), py::arg("params"), py::arg("profile"), py::arg("grid"), py::arg("basis") = "bare",
        py::arg("stride") = 1, py::arg("interaction_picture") = false,
        "Evolve and return observables per snapshot as numpy arrays.");

    m.def(
        "final_state",
        [](const InitialCondition& ic, const SystemParams& p, const ModeProfile& prof, const Grid& g,
           const std::string& basis) {
            const BasisMode mode = basis == "dressed" ? BasisMode::Dressed : BasisMode::Bare;
            EvolveOptions o;
            o.stride = std::max<std::size_t>(g.n_steps(), 1);
            Trajectory tr;
            {
                py::gil_scoped_release release;
                tr = evolve(ic, p, prof, g, mode, o);
            }
            if (tr.sectors.size() != 1) throw InvalidArgument("final_state needs a single-sector run");
            SpinorState s = tr.sectors[0].snapshots.back().state;
            if (s.basis == Basis::Dressed) s = to_bare(s, DressedFrame(p, prof), g);
            return py::make_tuple(to_array(s.a), to_array(s.b));
        },
        py::arg("initial"), py::arg("params"), py::arg("profile"), py::arg("grid"), py::arg("basis") = "bare",
        "Final bare-basis amplitudes (excited, ground) of a single-sector run.");

    m.def("scenarios", [] {
        std::vector<std::pair<std::string, std::string>> out;
        for (auto s : all_scenarios()) out.emplace_back(std::string(to_string(s)), std::string(describe(s)));
        return out;
    });

    m.def(
        "run_config",
        [](const std::string& text, const std::string& output) {
            RunConfig c = parse_config_text(text);
            if (!output.empty()) {
                c.output = output;
                c.echo["output"] = output;
            }
            std::ostringstream log, err;
            int status = 0;
            {
                py::gil_scoped_release release;
                status = run(c, log, err);
            }
            return py::make_tuple(status, log.str() + err.str());
        },
        py::arg("config_json"), py::arg("output") = "",
        "Run a JSON config as the command line tool would; returns (exit status, messages).");
}
