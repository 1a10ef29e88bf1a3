#include "ovsim/device_profile.h"
#include "ovsim/scenario.h"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;

namespace {

py::dict to_dict(const ovsim::scenario_result& r)
{
  py::list asserts;
  for (const auto& a : r.assertions) {
    asserts.append(py::make_tuple(a.name, ovsim::to_string(a.status), a.detail));
  }
  py::dict metrics;
  for (const auto& [k, v] : r.metrics) {
    metrics[py::str(k)] = v;
  }
  py::dict d;
  d["seed"]       = r.seed;
  d["end_t"]      = r.end_tti;
  d["passed"]     = r.passed();
  d["log"]        = r.log_text;
  d["assertions"] = asserts;
  d["metrics"]    = metrics;
  return d;
}

py::list events_to_list(const std::vector<ovsim::event>& events)
{
  py::list out;
  for (const auto& e : events) {
    py::dict fields;
    for (const auto& [k, v] : e.fields) {
      fields[py::str(k)] = v;
    }
    py::dict d;
    d["t"]      = e.tti;
    d["node"]   = e.node;
    d["kind"]   = e.kind;
    d["fields"] = fields;
    out.append(d);
  }
  return out;
}

std::string describe_hex(const std::string& hex)
{
  const auto b = ovsim::codec::from_hex(hex);
  const auto l = ovsim::codec::detect_layer(b);
  if (!l) {
    throw ovsim::codec::codec_error("unknown protocol layer");
  }
  switch (*l) {
  case ovsim::codec::layer::rrc: return ovsim::codec::describe(ovsim::codec::decode_rrc(b));
  case ovsim::codec::layer::nas: return ovsim::codec::describe(ovsim::codec::decode_nas(b));
  case ovsim::codec::layer::mac: break;
  }
  std::string out;
  for (const auto& pdu : ovsim::codec::decode_transport_block(b)) {
    out += (out.empty() ? "" : "; ") + ovsim::codec::describe(pdu);
  }
  return out;
}

} // namespace

PYBIND11_MODULE(_ovsim, m)
{
  m.doc() = "LTE overshadowing attack simulator";

  py::register_exception<ovsim::config_error>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ovsim::log_format_error>(m, "LogFormatError", PyExc_ValueError);
  py::register_exception<ovsim::codec::codec_error>(m, "CodecError", PyExc_ValueError);

  m.def(
      "run_scenario",
      [](const std::string& text, std::optional<std::uint64_t> seed) {
        const auto cfg = ovsim::load_config(text);
        ovsim::scenario_result r;
        {
          py::gil_scoped_release release;
          r = ovsim::run_scenario(cfg, seed);
        }
        return to_dict(r);
      },
      py::arg("config"), py::arg("seed") = py::none(), "Run a scenario given as config text.");

  m.def(
      "parse_log", [](const std::string& text) { return events_to_list(ovsim::parse_log(text)); }, py::arg("text"));
  m.def(
      "replay", [](const std::string& text) { return ovsim::replay_log(ovsim::parse_log(text)); }, py::arg("text"));
  m.def("describe_hex", &describe_hex, py::arg("hex"), "Decode an RRC, NAS or MAC byte string.");

  m.def(
      "resolve_powers",
      [](const std::vector<double>& rx, const std::vector<double>& offsets, double margin, double tolerance) {
        const auto out = ovsim::phy::resolve_powers(rx, offsets, margin, tolerance);
        py::dict   d;
        d["kind"]   = ovsim::phy::to_string(out.kind);
        d["winner"] = out.winner ? py::cast(*out.winner) : py::none();
        d["gap_db"] = out.gap_db;
        return d;
      },
      py::arg("rx_dbm"), py::arg("offsets_us"), py::arg("margin_db") = 3.0, py::arg("tolerance_us") = 4.7);

  m.def("profiles", [] {
    py::list out;
    for (const auto& p : ovsim::builtin_profiles()) {
      out.append(py::make_tuple(p.name, p.model, p.total_retries(), p.block_duration));
    }
    return out;
  });
}
