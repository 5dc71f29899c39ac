#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fsdea/econ.hpp"
#include "fsdea/malmquist.hpp"
#include "fsdea/netdea.hpp"
#include "fsdea/panel.hpp"
#include "fsdea/synth.hpp"

namespace py = pybind11;
using namespace fsdea;

namespace {

py::dict fit_to_dict(const FitResult& f) {
  py::dict d;
  py::dict coefs;
  for (size_t j = 0; j < f.names.size(); ++j) {
    const int i = static_cast<int>(j);
    coefs[py::str(f.names[j])] =
        py::make_tuple(f.coef(i), f.se(i), f.tstat(i), f.pvalue(i));
  }
  d["coef"] = coefs;
  d["n_obs"] = f.n_obs;
  d["n_clusters"] = f.n_clusters;
  d["r2_within"] = f.r2_within;
  return d;
}

Panel panel_from_csv(const std::string& text, const VariableDictionary& dict) {
  return parse_panel_csv(text, dict);
}

}  // namespace

PYBIND11_MODULE(_fsdea, m) {
  m.doc() = "Three-stage network DEA, Malmquist indices and panel estimators";

  py::register_exception<Error>(m, "FsdeaError");

  py::class_<VariableDictionary>(m, "VariableDictionary")
      .def_static("builtin_default", &VariableDictionary::builtin_default)
      .def_static("load", &VariableDictionary::load, py::arg("path"));

  py::class_<Panel>(m, "Panel")
      .def_property_readonly("n_units", &Panel::n_units)
      .def_property_readonly("n_periods", &Panel::n_periods)
      .def_property_readonly("units", &Panel::units)
      .def_property_readonly("periods", &Panel::periods)
      .def_property_readonly("columns", &Panel::column_names)
      .def("value",
           [](const Panel& p, const std::string& col, const std::string& unit,
              int period) {
             return p.value(p.require_column(col), p.unit_index(unit),
                            p.period_index(period));
           },
           py::arg("column"), py::arg("unit"), py::arg("period"))
      .def("to_csv", [](const Panel& p) { return panel_to_csv(p); });

  m.def("load_panel", &load_panel, py::arg("path"), py::arg("dictionary"));
  m.def("parse_panel_csv", &panel_from_csv, py::arg("text"), py::arg("dictionary"));

  py::class_<NetworkSpec>(m, "NetworkSpec")
      .def_static("three_stage_default", &NetworkSpec::three_stage_default,
                  py::arg("stage3_external_input"))
      .def_static("load", &NetworkSpec::load, py::arg("path"))
      .def_property_readonly("n_stages", &NetworkSpec::n_stages)
      .def("all_columns", &NetworkSpec::all_columns);

  m.def("validate_panel",
        [](const Panel& p, const NetworkSpec& spec) {
          const auto report = validate_panel(p, spec.all_columns());
          return py::make_tuple(report.dea_ready(), report.to_json().dump());
        },
        py::arg("panel"), py::arg("spec"));

  m.def("efficiency",
        [](const Panel& p, const NetworkSpec& spec, int data_period,
           int frontier_period) {
          py::dict out;
          for (const auto& r : evaluate_period(spec, p, data_period, frontier_period)) {
            py::dict rec;
            rec["theta"] = r.theta;
            rec["stage_scores"] = r.stage_scores;
            rec["stage_weights"] = r.stage_weights;
            rec["status"] = lp_status_name(r.status);
            out[py::str(r.dmu)] = rec;
          }
          return out;
        },
        py::arg("panel"), py::arg("spec"), py::arg("data_period"),
        py::arg("frontier_period"));

  m.def("fsi_panel",
        [](const Panel& p, const NetworkSpec& spec, double shift_floor) {
          FsiOptions opt;
          opt.shift_floor = shift_floor;
          FsiResult r = fsi_panel(p, spec, opt);
          return py::make_tuple(r.panel, r.solves, r.skipped);
        },
        py::arg("panel"), py::arg("spec"), py::arg("shift_floor") = 0.1);

  py::class_<RegressionDesign>(m, "RegressionDesign")
      .def(py::init<>())
      .def_readwrite("dependent", &RegressionDesign::dependent)
      .def_readwrite("explanatory", &RegressionDesign::explanatory)
      .def_readwrite("controls", &RegressionDesign::controls)
      .def_readwrite("unit_effect", &RegressionDesign::unit_effect)
      .def_readwrite("time_effect", &RegressionDesign::time_effect)
      .def_readwrite("cluster", &RegressionDesign::cluster);

  m.def("fit_twfe",
        [](const RegressionDesign& d, const Panel& p) {
          return fit_to_dict(fit_twfe(d, p));
        },
        py::arg("design"), py::arg("panel"));

  m.def("fit_2sls",
        [](const RegressionDesign& d, const Panel& p, const std::string& spillover) {
          InstrumentSpec iv;
          iv.spillover = spillover;
          const IvFit f = fit_2sls(d, iv, p);
          py::dict out;
          out["first_stage"] = fit_to_dict(f.first_stage);
          out["second_stage"] = fit_to_dict(f.second_stage);
          out["diagnostics"] = f.diagnostics.to_json().dump();
          return out;
        },
        py::arg("design"), py::arg("panel"), py::arg("spillover"));

  m.def("simulate",
        [](int n_units, int n_periods, uint64_t seed, double fintech_effect,
           double endogeneity_rho) {
          DgpConfig c;
          c.n_units = n_units;
          c.n_periods = n_periods;
          c.seed = seed;
          c.fintech_effect = fintech_effect;
          c.endogeneity_rho = endogeneity_rho;
          return generate(c);
        },
        py::arg("n_units") = 104, py::arg("n_periods") = 9, py::arg("seed") = 1,
        py::arg("fintech_effect") = -0.5, py::arg("endogeneity_rho") = 0.0);
}
