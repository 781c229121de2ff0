#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "app.hpp"
#include "ltlab/calibration.hpp"
#include "ltlab/certifier.hpp"
#include "ltlab/constants.hpp"
#include "ltlab/errors.hpp"
#include "ltlab/gn_solver.hpp"
#include "ltlab/grid.hpp"

namespace py = pybind11;
using namespace ltlab;

namespace {

py::array_t<cplx> to_numpy(const GridFunction& u) {
    std::vector<py::ssize_t> shape(u.box.points.begin(), u.box.points.end());
    py::array_t<cplx> a(shape);
    std::copy(u.values.begin(), u.values.end(), a.mutable_data());
    return a;
}

GridFunction from_numpy(const BoxSpec& box, py::array_t<cplx, py::array::c_style | py::array::forcecast> a) {
    if (static_cast<std::size_t>(a.size()) != box.size()) throw ConfigError("array size does not match the box");
    return GridFunction(box, std::vector<cplx>(a.data(), a.data() + a.size()));
}

py::dict quotient_dict(const QuotientResult& r) {
    py::dict d;
    d["value"] = r.value;
    d["iterations"] = r.iterations;
    d["converged"] = r.converged;
    d["restart_values"] = r.restart_values;
    d["minimizer"] = to_numpy(r.minimizer);
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Spectral fractional energies, GN/Hardy constants and certificate arithmetic";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);

    py::class_<BoxSpec>(m, "BoxSpec")
        .def_static("centered", &BoxSpec::centered, py::arg("d"), py::arg("length"), py::arg("points"))
        .def_static("cube", &BoxSpec::cube, py::arg("d"), py::arg("lo"), py::arg("hi"), py::arg("points"))
        .def_readonly("d", &BoxSpec::d)
        .def_readonly("lo", &BoxSpec::lo)
        .def_readonly("hi", &BoxSpec::hi)
        .def_readonly("points", &BoxSpec::points)
        .def_property_readonly("h", &BoxSpec::h)
        .def("size", &BoxSpec::size)
        .def("coords", [](const BoxSpec& b, int axis) {
            std::vector<double> x(static_cast<std::size_t>(b.points.at(static_cast<std::size_t>(axis))));
            for (std::size_t j = 0; j < x.size(); ++j) x[j] = b.coord(axis, int(j));
            return x;
        });

    py::class_<GridFunction>(m, "GridFunction")
        .def(py::init(&from_numpy), py::arg("box"), py::arg("values"))
        .def_readonly("box", &GridFunction::box)
        .def_property_readonly("values", &to_numpy)
        .def("norm2", &GridFunction::norm2)
        .def("integral_abs_pow", &GridFunction::integral_abs_pow);

    m.def("frac_laplacian_apply", &frac_laplacian_apply, py::arg("u"), py::arg("s"));
    m.def("seminorm_global", [](const GridFunction& u, double s) { return seminorm_global(u, s).value; },
          py::arg("u"), py::arg("s"));
    m.def("gn_quotient", &gn_quotient, py::arg("u"), py::arg("s"));
    m.def("hgn_quotient", &hgn_quotient, py::arg("u"), py::arg("s"));

    m.def("hardy_constant", [](double s, int d) { return hardy_constant(s, d).value; }, py::arg("s"), py::arg("d"));
    m.def("semiclassical_constant", [](int d) { return semiclassical_constant(d).value; }, py::arg("d"));
    m.def("gn_reference_1d", [] { return gn_reference_1d().value; });

    m.def(
        "minimize_gn",
        [](double s, int d, const BoxSpec& box, int restarts, std::uint64_t seed) {
            OptimizerParams p;
            p.restarts = restarts;
            p.seed = seed;
            return quotient_dict(minimize_gn(s, d, box, p));
        },
        py::arg("s"), py::arg("d"), py::arg("box"), py::arg("restarts") = 4, py::arg("seed") = 1);
    m.def(
        "minimize_hgn",
        [](double s, int d, const BoxSpec& box, int restarts, std::uint64_t seed) {
            OptimizerParams p;
            p.restarts = restarts;
            p.seed = seed;
            return quotient_dict(minimize_hgn(s, d, box, p));
        },
        py::arg("s"), py::arg("d"), py::arg("box"), py::arg("restarts") = 4, py::arg("seed") = 1);

    m.def("certificate_factor", &certificate_factor, py::arg("delta"), py::arg("s"), py::arg("d"), py::arg("c_emp"),
          py::arg("gn_constant"));
    m.def("exclusion_conversion_constant", &exclusion_conversion_constant, py::arg("delta"), py::arg("epsilon_inv"),
          py::arg("s"), py::arg("d"));
    m.def("lambda_threshold", &lambda_threshold, py::arg("delta"), py::arg("epsilon_inv"), py::arg("s"), py::arg("d"),
          py::arg("c_emp"), py::arg("c_loc"));

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::vector<std::string> full{"ltlab"};
            full.insert(full.end(), args.begin(), args.end());
            std::ostringstream out, err;
            const int code = ltlab::app::run(full, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs one CLI subcommand in-process; returns (exit_code, stdout, stderr).");
}
