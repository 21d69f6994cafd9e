// Python bindings for the double-precision surface of the library.
// The extended-precision backend stays C++-side; scripts that need it
// should drive the CLI, which accepts --precision ext everywhere.
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "renormlab/circlemap.hpp"
#include "renormlab/contfrac.hpp"
#include "renormlab/geometry.hpp"
#include "renormlab/parabolic.hpp"

namespace py = pybind11;
using namespace renormlab;

using Map = map::CircleMap<double>;
using Family = map::MapFamily<double>;

PYBIND11_MODULE(_renormlab, m) {
  m.doc() = "circle-map renormalization laboratory (double precision)";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const error& e) {
      PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  // -- continued fractions --------------------------------------------------
  py::class_<cf::ContinuedFraction>(m, "ContinuedFraction")
      .def(py::init<std::vector<std::int64_t>, std::vector<std::int64_t>>(),
           py::arg("head"), py::arg("period") = std::vector<std::int64_t>{})
      .def_static("golden", &cf::ContinuedFraction::golden)
      .def_static("silver", &cf::ContinuedFraction::silver)
      .def_property_readonly("head", &cf::ContinuedFraction::head)
      .def_property_readonly("period", &cf::ContinuedFraction::period)
      .def_property_readonly("infinite", &cf::ContinuedFraction::infinite)
      .def("term", &cf::ContinuedFraction::term, py::arg("i"))
      .def("__repr__", [](const cf::ContinuedFraction& c) {
        return "ContinuedFraction(" + c.to_json() + ")";
      });

  m.def(
      "convergent",
      [](const cf::ContinuedFraction& c, std::size_t depth) {
        auto v = cf::convergents(c, depth);
        return py::make_tuple(py::cast(static_cast<std::int64_t>(v.p)),
                              py::cast(static_cast<std::int64_t>(v.q)));
      },
      py::arg("cf"), py::arg("m"), "(p_m, q_m) of the m-th convergent");
  m.def(
      "cf_value",
      [](const cf::ContinuedFraction& c, std::size_t depth) {
        return cf::value<double>(c, depth);
      },
      py::arg("cf"), py::arg("depth"));
  m.def(
      "gauss_expand",
      [](double x, std::size_t n) {
        auto g = cf::gauss_expand<double>(x, n);
        return py::make_tuple(g.cf.head(), g.precision_exhausted);
      },
      py::arg("x"), py::arg("n"), "(terms, precision_exhausted)");

  // -- circle maps ----------------------------------------------------------
  py::class_<Map>(m, "CircleMap")
      .def_property_readonly("theta", &Map::theta)
      .def("lift", &Map::lift, py::arg("x"))
      .def("iterate", &Map::iterate, py::arg("x"), py::arg("n"),
           py::arg("p") = 0, "lift^n(x) - p")
      .def("derivative",
           [](const Map& f, double x) { return f.eval(x, 1); },
           py::arg("x"));

  py::class_<Family>(m, "MapFamily")
      .def_property_readonly("name", &Family::name)
      .def("at", &Family::at, py::arg("theta"));

  m.def("arnold_cubic", &map::arnold_cubic<double>);
  m.def("two_harmonic", &map::two_harmonic<double>, py::arg("eps"));

  py::class_<map::RotationNumber<double>>(m, "RotationNumber")
      .def_readonly("rho", &map::RotationNumber<double>::rho)
      .def_readonly("rational", &map::RotationNumber<double>::rational)
      .def_readonly("accuracy_flag",
                    &map::RotationNumber<double>::accuracy_flag)
      .def_readonly("digits", &map::RotationNumber<double>::digits);
  m.def(
      "rotation_number",
      [](const Map& f, double tol, std::int64_t max_iter) {
        return map::rotation_number(f, tol, max_iter);
      },
      py::arg("map"), py::arg("tol") = 1e-12,
      py::arg("max_iter") = std::int64_t{50'000'000});

  m.def("critical_cycle_parameter", &map::critical_cycle_parameter<double>,
        py::arg("family"), py::arg("p"), py::arg("q"));
  m.def("tune_to_rotation", &map::tune_to_rotation<double>, py::arg("family"),
        py::arg("cf"), py::arg("depth"));

  // -- renormalization geometry ---------------------------------------------
  using Part = geometry::DynamicalPartition<double>;
  py::class_<Part::Atom>(m, "PartitionAtom")
      .def_readonly("start", &Part::Atom::start)
      .def_readonly("length", &Part::Atom::length)
      .def_readonly("deep", &Part::Atom::deep)
      .def_readonly("index", &Part::Atom::index);
  py::class_<Part>(m, "DynamicalPartition")
      .def_readonly("level", &Part::level)
      .def_readonly("q_m", &Part::q_m)
      .def_readonly("q_m1", &Part::q_m1)
      .def_readonly("atoms", &Part::atoms)
      .def("total_length", &Part::total_length);
  m.def("partition", &geometry::partition<double>, py::arg("map"),
        py::arg("m"));

  py::class_<geometry::BoundsStats>(m, "BoundsStats")
      .def_readonly("k_max", &geometry::BoundsStats::k_max)
      .def_readonly("k_min", &geometry::BoundsStats::k_min)
      .def_readonly("min_exp", &geometry::BoundsStats::min_exp)
      .def_readonly("hist", &geometry::BoundsStats::hist);
  m.def("bounds_stats", &geometry::bounds_stats<double>, py::arg("partition"));

  py::class_<geometry::ScalingRatios<double>>(m, "ScalingRatios")
      .def_readonly("lengths", &geometry::ScalingRatios<double>::lengths)
      .def_readonly("ratios", &geometry::ScalingRatios<double>::ratios)
      .def_readonly("limit", &geometry::ScalingRatios<double>::limit)
      .def_readonly("drift", &geometry::ScalingRatios<double>::drift);
  m.def("scaling_ratios", &geometry::scaling_ratios<double>, py::arg("map"),
        py::arg("levels"));

  py::class_<geometry::RenormConvergence<double>>(m, "RenormConvergence")
      .def_readonly("d", &geometry::RenormConvergence<double>::d)
      .def_readonly("exact_identity",
                    &geometry::RenormConvergence<double>::exact_identity)
      .def_readonly("c", &geometry::RenormConvergence<double>::c)
      .def_readonly("mu", &geometry::RenormConvergence<double>::mu)
      .def_readonly("r2", &geometry::RenormConvergence<double>::r2);
  m.def("renorm_convergence", &geometry::renorm_convergence<double>,
        py::arg("f1"), py::arg("f2"), py::arg("levels"),
        py::arg("fit_lo") = 4);

  py::class_<geometry::DeltaEstimate<double>>(m, "DeltaEstimate")
      .def_readonly("theta", &geometry::DeltaEstimate<double>::theta)
      .def_readonly("ratios", &geometry::DeltaEstimate<double>::ratios)
      .def_readonly("delta_hat", &geometry::DeltaEstimate<double>::delta_hat)
      .def_readonly("truncated", &geometry::DeltaEstimate<double>::truncated);
  m.def("delta_estimate", &geometry::delta_estimate<double>, py::arg("family"),
        py::arg("cf"), py::arg("levels"));

  // -- complex escape rasters -----------------------------------------------
  py::class_<para::Raster>(m, "Raster")
      .def_readonly("resolution", &para::Raster::resolution)
      .def_readonly("level", &para::Raster::level)
      .def_readonly("max_iter", &para::Raster::max_iter)
      .def_readonly("half", &para::Raster::half)
      .def_readonly("degenerate", &para::Raster::degenerate)
      .def("pixel_size", &para::Raster::pixel_size)
      .def_property_readonly("pixels", [](const para::Raster& r) {
        auto n = static_cast<py::ssize_t>(r.resolution);
        return py::array_t<std::uint8_t>({n, n}, r.pixels.data());
      });
  m.def("julia_raster", &para::julia_raster, py::arg("map"), py::arg("level"),
        py::arg("resolution"), py::arg("max_iter") = 512,
        py::arg("k_range") = 2.0, py::arg("workers") = 1);

  py::class_<para::DeepPointProfile>(m, "DeepPointProfile")
      .def_readonly("r", &para::DeepPointProfile::r)
      .def_readonly("s", &para::DeepPointProfile::s)
      .def_readonly("slope", &para::DeepPointProfile::slope)
      .def_readonly("beta", &para::DeepPointProfile::beta)
      .def_readonly("r2", &para::DeepPointProfile::r2);
  m.def("deep_point_profile", &para::deep_point_profile, py::arg("raster"),
        py::arg("radii"));
}
