// Python face of the laboratory.  The four commands take a config as a json
// string or dict and return (exit_code, captured_output), mirroring the CLI
// contract; a few computational primitives are exposed directly for
// notebook-scale poking.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <string>
#include <vector>

#include "erwlab/config.hpp"
#include "erwlab/errors.hpp"
#include "erwlab/estimators.hpp"
#include "erwlab/renewal.hpp"
#include "erwlab/runner.hpp"

namespace py = pybind11;
using namespace erwlab;

namespace {

RunConfig config_from_obj(const py::object& obj) {
  std::string text;
  if (py::isinstance<py::str>(obj)) {
    text = obj.cast<std::string>();
  } else {
    py::object dumps = py::module_::import("json").attr("dumps");
    text = dumps(obj).cast<std::string>();
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  return RunConfig::from_json(j);
}

py::tuple run_command(int (*cmd)(const RunConfig&, std::ostream&), const py::object& cfg_obj) {
  std::ostringstream out;
  int code;
  try {
    RunConfig cfg = config_from_obj(cfg_obj);
    code = cmd(cfg, out);
  } catch (const ConfigError& e) {
    out << "config error: " << e.what() << "\n";
    code = 2;
  } catch (const MissingInputError& e) {
    out << "missing input: " << e.what() << "\n";
    code = 3;
  } catch (const ValidationError& e) {
    out << "condition violated: " << e.what() << "\n";
    code = 1;
  } catch (const std::exception& e) {
    out << "error: " << e.what() << "\n";
    code = 1;
  }
  return py::make_tuple(code, out.str());
}

py::dict certificate_dict(const py::object& cfg_obj) {
  RunConfig cfg = config_from_obj(cfg_obj);
  auto kernel = cfg.build_kernel(0);
  auto cert = certify_kernel(*kernel, cfg.build_direction(), cfg.probe_count);
  py::dict d;
  d["d"] = cert.d;
  d["jump_bound"] = cert.jump_bound;
  d["has_excited"] = cert.has_excited;
  d["lambda"] = cert.lambda;
  d["max_offdrift"] = cert.max_offdrift;
  d["zero_drift_ok"] = cert.zero_drift_ok;
  d["ballistic_ok"] = cert.ballistic_ok;
  d["ellipticity_ok"] = cert.ellipticity.ok;
  d["ellipticity_h"] = cert.ellipticity.h;
  d["ellipticity_r"] = cert.ellipticity.r;
  d["notes"] = cert.notes;
  return d;
}

std::vector<long> streaming_times(const std::vector<double>& proj, double margin) {
  auto seq = detect_from_projections(proj, margin);
  std::vector<long> out;
  for (const auto& t : seq.taus) out.push_back(t.time);
  return out;
}

py::dict submartingale_dict(double b, double radius, int d) {
  auto cert = submartingale_certificate(symmetric_nn_law(d), b, radius);
  py::dict out;
  out["certified"] = cert.certified;
  out["b"] = cert.b;
  out["gamma2"] = cert.gamma2;
  out["violations"] = cert.violations;
  out["scanned"] = cert.scanned;
  out["min_margin"] = cert.min_margin;
  return out;
}

}  // namespace

PYBIND11_MODULE(erwlab, m) {
  m.doc() = "monte carlo laboratory for excited random walks on Z^d";

  m.def("defaults", [] { return RunConfig::defaults().to_json().dump(2); },
        "default configuration as a json string");

  m.def("validate", [](const py::object& cfg) { return run_command(cmd_validate, cfg); },
        py::arg("config"), "certify the kernel; returns (exit_code, output)");
  m.def("simulate", [](const py::object& cfg) { return run_command(cmd_simulate, cfg); },
        py::arg("config"), "run the ensembles; returns (exit_code, output)");
  m.def("analyze", [](const py::object& cfg) { return run_command(cmd_analyze, cfg); },
        py::arg("config"), "estimate from simulate outputs; returns (exit_code, output)");
  m.def("checks", [](const py::object& cfg) { return run_command(cmd_checks, cfg); },
        py::arg("config"), "run the theory-check battery; returns (exit_code, output)");

  m.def("certificate", &certificate_dict, py::arg("config"),
        "structural kernel certificate as a dict");
  m.def("regeneration_times", &streaming_times, py::arg("projections"), py::arg("margin") = 0.0,
        "streaming regeneration times of a projection path (index 0 is the start)");
  m.def("oracle_regeneration_times",
        [](const std::vector<double>& proj) { return oracle_regeneration_times(proj); },
        py::arg("projections"), "literal recursion reference for the same quantity");
  m.def("azuma_bound", &azuma_bound, py::arg("n"), py::arg("a"), py::arg("c") = 1.0,
        py::arg("two_sided") = true);
  m.def("submartingale_certificate", &submartingale_dict, py::arg("b") = 0.9,
        py::arg("radius") = 200.0, py::arg("d") = 2,
        "exact-scan certificate that ||Y||^b is a submartingale off a bounded set");

  m.attr("__version__") = kToolVersion;
}
