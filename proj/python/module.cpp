#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "cptych/commands.hpp"
#include "cptych/metrics.hpp"
#include "cptych/tv_prox.hpp"

namespace py = pybind11;
using namespace cptych;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;
using RArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

template <typename T>
Grid<T> to_grid(const py::array_t<T, py::array::c_style | py::array::forcecast>& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  const auto r = static_cast<std::size_t>(a.shape(0)), c = static_cast<std::size_t>(a.shape(1));
  return Grid<T>(r, c, std::vector<T>(a.data(), a.data() + r * c));
}

template <typename T>
py::array_t<T> to_array(const Grid<T>& g) {
  py::array_t<T> out({g.rows(), g.cols()});
  std::copy(g.begin(), g.end(), out.mutable_data());
  return out;
}

RunConfig config_from(const py::object& cfg) {
  if (cfg.is_none()) return parse_run_config(nlohmann::json::object());
  const std::string text = py::module_::import("json").attr("dumps")(cfg).cast<std::string>();
  return parse_run_config(nlohmann::json::parse(text));
}

py::dict trace_dict(const ConvergenceTrace& t) {
  std::vector<int> it;
  std::vector<double> fid, obj, rmse, secs;
  for (const auto& r : t.records) {
    it.push_back(r.iteration);
    fid.push_back(r.fidelity);
    obj.push_back(r.objective);
    rmse.push_back(r.rmse ? *r.rmse : std::nan(""));
    secs.push_back(r.seconds);
  }
  py::dict d;
  d["iteration"] = py::array(py::cast(it));
  d["fidelity"] = py::array(py::cast(fid));
  d["objective"] = py::array(py::cast(obj));
  d["rmse"] = py::array(py::cast(rmse));
  d["seconds"] = py::array(py::cast(secs));
  d["flags"] = t.flags;
  return d;
}

py::dict dataset_dict(const DatasetContainer& ds) {
  py::list frames;
  for (const auto& f : ds.measurements.frames) frames.append(to_array(f));
  std::vector<std::pair<double, double>> pos;
  for (const auto& p : ds.measurements.positions) pos.emplace_back(p.dx, p.dy);
  py::dict d;
  d["frames"] = frames;
  d["positions"] = pos;
  d["ground_truth"] = ds.ground_truth ? py::object(to_array(*ds.ground_truth)) : py::none();
  d["coded_surface"] = ds.coded_surface ? py::object(to_array(ds.coded_surface->transmittance())) : py::none();
  d["seed"] = ds.seed;
  d["config_hash"] = ds.config_hash;
  return d;
}

OpticalGeometry geometry(double wavelength, double pitch, double d1, double d2, int sr_ratio) {
  OpticalGeometry g{wavelength, pitch, d1, d2, sr_ratio};
  g.validate();
  return g;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coded-surface ptychography core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<DivergenceError>(m, "DivergenceError", PyExc_RuntimeError);

  m.def("fft2", [](const CArray& a) { return to_array(fft2(to_grid(a))); }, "Unitary 2-D FFT.");
  m.def("ifft2", [](const CArray& a) { return to_array(ifft2(to_grid(a))); });
  m.def(
      "propagate",
      [](const CArray& a, double distance, double wavelength, double pitch) {
        return to_array(propagate(to_grid(a), distance, geometry(wavelength, pitch, 0, 0, 1)));
      },
      py::arg("field"), py::arg("distance"), py::arg("wavelength") = 532e-9, py::arg("pitch") = 1e-6);
  m.def(
      "shift",
      [](const CArray& a, double dx, double dy, double pitch) {
        return to_array(shift(to_grid(a), {dx, dy}, geometry(532e-9, pitch, 0, 0, 1)));
      },
      py::arg("field"), py::arg("dx"), py::arg("dy"), py::arg("pitch") = 1e-6);
  m.def("bin_intensity", [](const RArray& a, int r) { return to_array(bin_intensity(to_grid(a), r)); });
  m.def("upsample_adjoint", [](const RArray& a, int r) { return to_array(upsample_adjoint(to_grid(a), r)); });
  m.def(
      "forward_intensity",
      [](const CArray& object, const CArray& cs, double dx, double dy, double wavelength, double pitch, double d1,
         double d2, int sr_ratio) {
        return to_array(forward_intensity(to_grid(object), CodedSurface(to_grid(cs)), {dx, dy},
                                          geometry(wavelength, pitch, d1, d2, sr_ratio)));
      },
      py::arg("object"), py::arg("coded_surface"), py::arg("dx") = 0.0, py::arg("dy") = 0.0,
      py::arg("wavelength") = 532e-9, py::arg("pitch") = 1e-6, py::arg("d1") = 500e-6, py::arg("d2") = 500e-6,
      py::arg("sr_ratio") = 4);
  m.def(
      "tv_prox",
      [](const CArray& a, double lambda, int sub_iters, double eta) {
        TVProxConfig cfg;
        cfg.lambda = lambda;
        cfg.sub_iters = sub_iters;
        cfg.eta = eta;
        return to_array(tv_prox(to_grid(a), cfg));
      },
      py::arg("field"), py::arg("lam"), py::arg("sub_iters") = 20, py::arg("eta") = 0.125);
  m.def("tv_seminorm", [](const CArray& a) { return tv_seminorm(to_grid(a)); });
  m.def("aligned_rmse", [](const CArray& rec, const CArray& gt) { return aligned_rmse(to_grid(rec), to_grid(gt)).rmse; });

  m.def(
      "simulate", [](const py::object& cfg) { return dataset_dict(build_dataset(config_from(cfg))); },
      py::arg("config") = py::none(), "Builds a synthetic dataset from a config dict.");
  m.def(
      "simulate_to_file",
      [](const py::object& cfg, const std::filesystem::path& out) { cmd_simulate(config_from(cfg), out); },
      py::arg("config"), py::arg("path"));
  m.def("read_dataset", [](const std::filesystem::path& p) { return dataset_dict(read_dataset(p)); });
  m.def(
      "reconstruct",
      [](const std::filesystem::path& dataset, const py::object& cfg) {
        const auto ds = read_dataset(dataset);
        const auto run_cfg = config_from(cfg);
        RunOutcome run;
        {
          py::gil_scoped_release release;
          run = reconstruct(ds, run_cfg);
        }
        if (!run.ok()) {
          if (run.last_good_iteration >= 0) throw DivergenceError(run.error, run.last_good_iteration);
          throw std::runtime_error(run.error);
        }
        py::dict d;
        d["object"] = to_array(run.state->object);
        d["coded_surface"] = to_array(run.state->cs.transmittance());
        d["iterations"] = run.state->iteration;
        d["trace"] = trace_dict(run.state->trace);
        return d;
      },
      py::arg("dataset"), py::arg("config") = py::none());
}
