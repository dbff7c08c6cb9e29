#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pat/adjoint.hpp"
#include "pat/harness.hpp"
#include "pat/io.hpp"
#include "pat/reconstruct.hpp"

namespace py = pybind11;
using namespace pat;

namespace {

// Copies into a (ny, nx) array.
py::array_t<double> field_array(const Field& f) {
  py::array_t<double> out({f.grid().ny, f.grid().nx});
  std::copy(f.data().begin(), f.data().end(), out.mutable_data());
  return out;
}

Field field_from(const Grid2D& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != g.ny || static_cast<std::size_t>(a.shape(1)) != g.nx)
    throw std::invalid_argument("array shape must be (ny, nx) of the grid");
  return Field(g, std::vector<double>(a.data(), a.data() + a.size()));
}

py::array_t<double> samples_array(const Sinogram& s) {
  py::array_t<double> out({s.n_det, s.n_t});
  std::copy(s.samples.begin(), s.samples.end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_pat, m) {
  m.doc() = "Photoacoustic forward solver and reconstructions in variable media";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);
  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);

  py::class_<Arc>(m, "Arc")
      .def(py::init<double, double>(), py::arg("start"), py::arg("end"))
      .def_static("full", &Arc::full)
      .def_static("lower_half", &Arc::lower_half)
      .def_readwrite("start", &Arc::start)
      .def_readwrite("end", &Arc::end)
      .def("contains", &Arc::contains)
      .def("is_full", &Arc::is_full)
      .def("__repr__", [](const Arc& a) { return "Arc(" + arc_label(a) + ")"; });
  m.def("parse_arc", &parse_arc);

  py::class_<Grid2D>(m, "Grid2D")
      .def_static("covering_unit_disk", &Grid2D::covering_unit_disk, py::arg("dx"), py::arg("pml_width") = 20)
      .def_static("spanning_unit_square", &Grid2D::spanning_unit_square, py::arg("n_across"),
                  py::arg("pml_width") = 0)
      .def_readonly("nx", &Grid2D::nx)
      .def_readonly("ny", &Grid2D::ny)
      .def_readonly("dx", &Grid2D::dx)
      .def_readonly("origin_x", &Grid2D::origin_x)
      .def_readonly("origin_y", &Grid2D::origin_y)
      .def_readonly("pml_width", &Grid2D::pml_width)
      .def_property_readonly("shape", [](const Grid2D& g) { return py::make_tuple(g.ny, g.nx); })
      .def(py::self == py::self);

  py::class_<Field>(m, "Field")
      .def(py::init([](const Grid2D& g, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
             return field_from(g, a);
           }),
           py::arg("grid"), py::arg("values"))
      .def(py::init<const Grid2D&, double>(), py::arg("grid"), py::arg("fill") = 0.0)
      .def_property_readonly("grid", &Field::grid)
      .def("to_numpy", &field_array)
      .def("max_abs", &Field::max_abs);

  py::class_<MediumField>(m, "MediumField")
      .def_static("homogeneous", &MediumField::homogeneous)
      .def_static("from_arrays",
                  [](const Grid2D& g, py::array_t<double> kappa, py::array_t<double> rho) {
                    return MediumField::from_fields(field_from(g, kappa), field_from(g, rho));
                  })
      .def_property_readonly("grid", &MediumField::grid)
      .def_property_readonly("kappa", [](const MediumField& md) { return field_array(md.kappa()); })
      .def_property_readonly("rho", [](const MediumField& md) { return field_array(md.rho()); })
      .def_property_readonly("c_max", &MediumField::c_max)
      .def("product_in_kappa", &MediumField::product_in_kappa)
      .def("product_in_rho", &MediumField::product_in_rho);

  py::class_<PhantomSpec>(m, "PhantomSpec")
      .def_static("builtin", &PhantomSpec::builtin)
      .def_static("parse", &PhantomSpec::parse, py::arg("text"), py::arg("base_dir") = ".")
      .def_static("load", &PhantomSpec::load)
      .def_static("resolve", &PhantomSpec::resolve)
      .def_readonly("name", &PhantomSpec::name);
  m.def("build_medium", &build_medium);
  m.def(
      "build_initial_pressure",
      [](const PhantomSpec& s, const Grid2D& g) { return build_initial_pressure(s, g).values; });
  m.def(
      "compute_T0",
      [](const Field& f, const Arc& arc, const MediumField& md) {
        return compute_T0(InitialPressure::from_field(f), arc, md);
      },
      py::arg("f"), py::arg("arc"), py::arg("medium"));
  m.def("norm_H1kr", &norm_H1kr);

  py::class_<DetectorArray>(m, "DetectorArray")
      .def_static("uniform", &DetectorArray::uniform, py::arg("n_det"), py::arg("arc") = Arc::full())
      .def_readonly("angles", &DetectorArray::angles)
      .def_readonly("arc", &DetectorArray::arc)
      .def("active_count", &DetectorArray::active_count)
      .def("__len__", &DetectorArray::size);

  py::class_<TimeAxis>(m, "TimeAxis")
      .def_static("for_medium", &TimeAxis::for_medium, py::arg("medium"), py::arg("T"),
                  py::arg("dt_divisor") = TimeAxis::kDefaultDivisor)
      .def_readonly("n_t", &TimeAxis::n_t)
      .def_readonly("dt", &TimeAxis::dt)
      .def_readonly("T", &TimeAxis::T);

  py::class_<Sinogram>(m, "Sinogram")
      .def_readonly("n_det", &Sinogram::n_det)
      .def_readonly("n_t", &Sinogram::n_t)
      .def_readonly("dt", &Sinogram::dt)
      .def_readonly("T", &Sinogram::T)
      .def_readonly("arc", &Sinogram::arc)
      .def_readonly("angles", &Sinogram::angles)
      .def("to_numpy", &samples_array)
      .def("max_abs", &Sinogram::max_abs)
      .def("resample_time", &resample_time)
      .def("__sub__", [](const Sinogram& a, const Sinogram& b) { return a - b; });
  m.def("norm_sigma", &norm_sigma);
  m.def("inner_product_sigma", &inner_product_sigma);

  py::class_<WaveSolver>(m, "WaveSolver")
      .def(py::init([](const MediumField& md, const TimeAxis& ax, const DetectorArray& d) {
             return WaveSolver(md, ax, d);
           }),
           py::arg("medium"), py::arg("axis"), py::arg("detectors"))
      .def_property_readonly("axis", &WaveSolver::axis)
      .def("forward", &WaveSolver::forward, py::call_guard<py::gil_scoped_release>())
      .def("adjoint_l2", &WaveSolver::adjoint_l2, py::call_guard<py::gil_scoped_release>());

  py::enum_<ReconMethod>(m, "ReconMethod")
      .value("time_reversal", ReconMethod::time_reversal)
      .value("neumann", ReconMethod::neumann)
      .value("landweber", ReconMethod::landweber);
  py::enum_<MediumVariant>(m, "MediumVariant")
      .value("true_params", MediumVariant::true_params)
      .value("product_in_kappa", MediumVariant::product_in_kappa)
      .value("product_in_rho", MediumVariant::product_in_rho);

  py::class_<ReconConfig>(m, "ReconConfig")
      .def(py::init<>())
      .def_readwrite("method", &ReconConfig::method)
      .def_readwrite("k_max", &ReconConfig::k_max)
      .def_readwrite("omega", &ReconConfig::omega)
      .def_readwrite("tau", &ReconConfig::tau)
      .def_readwrite("delta", &ReconConfig::delta)
      .def_readwrite("taper_width", &ReconConfig::taper_width)
      .def_readwrite("power_iters", &ReconConfig::power_iters)
      .def_readwrite("seed", &ReconConfig::seed);

  py::class_<ReconResult>(m, "ReconResult")
      .def_readonly("f_rec", &ReconResult::f_rec)
      .def_readonly("residual_history", &ReconResult::residual_history)
      .def_readonly("error_history", &ReconResult::error_history)
      .def_property_readonly("stop_reason", [](const ReconResult& r) { return to_string(r.stop_reason); })
      .def_readonly("iterations", &ReconResult::iterations)
      .def_readonly("omega", &ReconResult::omega);

  py::class_<ReconContext>(m, "ReconContext")
      .def(py::init([](const MediumField& md, const TimeAxis& ax, const DetectorArray& d) {
             return ReconContext(md, ax, d);
           }),
           py::arg("medium"), py::arg("axis"), py::arg("detectors"))
      .def_static(
          "for_data", [](const MediumField& md, const Sinogram& s) { return ReconContext::for_data(md, s); })
      .def("forward", &ReconContext::forward, py::call_guard<py::gil_scoped_release>())
      .def("adjoint_H1",
           [](const ReconContext& c, const Sinogram& h) {
             py::gil_scoped_release release;
             return adjoint_H1(h, c.solver(), c.elliptic());
           })
      .def("time_reverse", [](const ReconContext& c, const Sinogram& h) { return c.time_reverse(h); })
      .def("modified_time_reverse", &ReconContext::modified_time_reverse);

  m.def(
      "reconstruct",
      [](const Sinogram& data, const ReconContext& ctx, const ReconConfig& cfg, std::optional<Field> truth) {
        ErrorFn err;
        if (truth) err = [t = *truth](const Field& x) { return rel_l2_error(x, t); };
        py::gil_scoped_release release;
        return reconstruct(data, ctx, cfg, err);
      },
      py::arg("data"), py::arg("ctx"), py::arg("config") = ReconConfig{}, py::arg("truth") = std::nullopt);
  m.def("estimate_contraction",
        py::overload_cast<const ReconContext&, std::size_t, std::uint64_t>(&estimate_contraction), py::arg("ctx"),
        py::arg("trials") = 8, py::arg("seed") = 1);

  m.def("add_noise", &add_noise, py::arg("data"), py::arg("snr_db"), py::arg("seed"));
  m.def("rel_l2_error", &rel_l2_error, py::arg("f_rec"), py::arg("f_true"));

  m.def("write_field", &write_field);
  m.def("read_field", &read_field, py::arg("path"), py::arg("pml_width") = 0);
  m.def("write_sinogram", &write_sinogram);
  m.def("read_sinogram", &read_sinogram);

  m.def("verify", [](const std::string& suite, const std::string& size) {
    const VerifyReport r = verify(suite, size);
    py::list checks;
    for (const VerifyCheck& c : r.checks)
      checks.append(py::dict(py::arg("name") = c.name, py::arg("measured") = c.measured,
                             py::arg("tolerance") = c.tolerance, py::arg("pass") = c.pass));
    return py::make_tuple(r.passed(), checks);
  });
}
