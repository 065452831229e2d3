#pragma once

// Experiment configuration: a single JSON document describing the noise
// kernel, the space-time grid, the coefficient system, and per-command
// parameter blocks.  Every parse failure is reported as a config_error whose
// message starts with the JSON path of the offending key, e.g.
//   "config:model.sigma[0][1].shape: unknown coefficient shape 'xyz'".

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "shelab/errors.hpp"
#include "shelab/grid.hpp"
#include "shelab/kernels.hpp"
#include "shelab/model.hpp"
#include "shelab/solver.hpp"

namespace shelab {

// A JSON node paired with its path, for uniform error reporting.  All typed
// getters throw config_error mentioning the full path on wrong or missing
// data.
class ConfigView {
 public:
  ConfigView(const nlohmann::json& node, std::string path)
      : node_(&node), path_(std::move(path)) {}

  const nlohmann::json& json() const { return *node_; }
  const std::string& path() const { return path_; }

  [[noreturn]] void fail(const std::string& what) const {
    throw config_error(path_ + ": " + what);
  }

  bool has(const char* key) const {
    return node_->is_object() && node_->contains(key);
  }

  ConfigView child(const char* key) const {
    if (!node_->is_object()) fail("expected an object");
    auto it = node_->find(key);
    if (it == node_->end()) fail(std::string("missing required key '") + key + "'");
    return ConfigView(*it, path_ + "." + key);
  }

  ConfigView element(std::size_t i) const {
    if (!node_->is_array() || i >= node_->size()) {
      fail("array index " + std::to_string(i) + " out of range");
    }
    return ConfigView((*node_)[i], path_ + "[" + std::to_string(i) + "]");
  }

  std::size_t size() const {
    if (!node_->is_array()) fail("expected an array");
    return node_->size();
  }

  double number() const {
    if (!node_->is_number()) fail("expected a number");
    return node_->get<double>();
  }
  double number(const char* key) const { return child(key).number(); }
  double number_or(const char* key, double def) const {
    return has(key) ? number(key) : def;
  }

  std::int64_t integer() const {
    if (!node_->is_number_integer()) fail("expected an integer");
    return node_->get<std::int64_t>();
  }
  std::int64_t integer(const char* key) const { return child(key).integer(); }
  std::int64_t integer_or(const char* key, std::int64_t def) const {
    return has(key) ? integer(key) : def;
  }

  std::uint64_t unsigned_or(const char* key, std::uint64_t def) const {
    if (!has(key)) return def;
    const ConfigView v = child(key);
    if (!v.json().is_number_unsigned()) v.fail("expected a non-negative integer");
    return v.json().get<std::uint64_t>();
  }

  bool boolean_or(const char* key, bool def) const {
    if (!has(key)) return def;
    const ConfigView v = child(key);
    if (!v.json().is_boolean()) v.fail("expected true or false");
    return v.json().get<bool>();
  }

  std::string text() const {
    if (!node_->is_string()) fail("expected a string");
    return node_->get<std::string>();
  }
  std::string text(const char* key) const { return child(key).text(); }
  std::string text_or(const char* key, const std::string& def) const {
    return has(key) ? text(key) : def;
  }

  std::vector<double> number_array() const {
    if (!node_->is_array()) fail("expected an array of numbers");
    std::vector<double> out;
    out.reserve(node_->size());
    for (std::size_t i = 0; i < node_->size(); ++i) {
      out.push_back(element(i).number());
    }
    return out;
  }
  std::vector<double> number_array(const char* key) const {
    return child(key).number_array();
  }

 private:
  const nlohmann::json* node_;
  std::string path_;
};

struct GridConfig {
  std::size_t n = 0;
  std::size_t steps = 0;
  double t_final = 0.0;
  double probe_window = 0.0;
  double box_length = 0.0;  // 0 = derive from the leakage rule
};

struct ExperimentConfig {
  KernelSpec kernel = KernelSpec::white(1);
  GridConfig grid;
  Model model;
  std::uint64_t seed = 1;
  nlohmann::json document;  // full parsed config; command blocks live here

  GridSpec make_grid_spec() const {
    return make_grid(kernel.dim, grid.n, grid.steps, grid.t_final,
                     grid.probe_window, grid.box_length);
  }
  ConfigView view() const { return ConfigView(document, "config"); }
};

namespace detail {

inline KernelSpec parse_kernel(const ConfigView& v) {
  const std::string family = v.text("family");
  if (family == "white") {
    return KernelSpec::white(static_cast<int>(v.integer("dim")));
  }
  if (family == "riesz") {
    return KernelSpec::riesz(static_cast<int>(v.integer("dim")),
                             v.number("gamma"));
  }
  if (family == "bessel") {
    return KernelSpec::bessel(static_cast<int>(v.integer("dim")),
                              v.number("alpha"));
  }
  if (family == "fractional") {
    std::vector<double> hurst = v.number_array("hurst");
    const int dim = static_cast<int>(
        v.integer_or("dim", static_cast<std::int64_t>(hurst.size())));
    return KernelSpec::fractional(dim, std::move(hurst));
  }
  v.child("family").fail("unknown kernel family '" + family + "'");
}

inline GridConfig parse_grid(const ConfigView& v) {
  GridConfig g;
  const std::int64_t n = v.integer("n");
  const std::int64_t steps = v.integer("steps");
  if (n <= 0) v.child("n").fail("grid extent must be positive");
  if (steps <= 0) v.child("steps").fail("step count must be positive");
  g.n = static_cast<std::size_t>(n);
  g.steps = static_cast<std::size_t>(steps);
  g.t_final = v.number("t_final");
  g.probe_window = v.number_or("probe_window", 0.0);
  g.box_length = v.number_or("box_length", 0.0);
  return g;
}

inline CoefficientEntry parse_entry(const ConfigView& v, int m) {
  if (v.json().is_number()) {
    return CoefficientEntry::constant(v.json().get<double>());
  }
  if (!v.json().is_object()) v.fail("expected a number or an object");
  CoefficientEntry e;
  const std::string shape = v.text_or("shape", "constant");
  try {
    e.shape = shape_from_name(shape);
  } catch (const config_error&) {
    v.child("shape").fail("unknown coefficient shape '" + shape + "'");
  }
  e.offset = v.number_or("offset", 0.0);
  // A constant entry evaluates to offset + scale, so its scale defaults to
  // zero; shaped entries default to unit amplitude.
  e.scale = v.number_or(
      "scale", e.shape == CoefficientShape::Constant ? 0.0 : 1.0);
  e.arg_shift = v.number_or("arg_shift", 0.0);
  if (v.has("weights")) {
    e.weights = v.number_array("weights");
  } else if (e.state_dependent()) {
    // Default: the shape reads the matching component; for m = 1 that is the
    // only sensible choice and keeps configs terse.
    e.weights.assign(static_cast<std::size_t>(m), 0.0);
    if (m == 1) e.weights[0] = 1.0;
  }
  if (e.state_dependent() &&
      e.weights.size() != static_cast<std::size_t>(m)) {
    v.fail("weights must have one entry per component (" + std::to_string(m) +
           ")");
  }
  return e;
}

inline Model parse_model(const ConfigView& v) {
  if (v.has("preset")) {
    const std::string preset = v.text("preset");
    if (preset == "additive") {
      const int m = static_cast<int>(v.integer_or("m", 1));
      const int q = static_cast<int>(v.integer_or("q", m));
      return Model::additive(m, q, v.number_or("amplitude", 1.0));
    }
    if (preset == "scalar_nonlinear") return Model::scalar_nonlinear();
    if (preset == "coupled_pair") return Model::coupled_pair();
    v.child("preset").fail("unknown model preset '" + preset + "'");
  }
  Model md;
  md.m = static_cast<int>(v.integer("m"));
  md.q = static_cast<int>(v.integer("q"));
  if (md.m <= 0 || md.q <= 0) v.fail("component counts must be positive");
  const ConfigView sigma = v.child("sigma");
  if (sigma.size() != static_cast<std::size_t>(md.m)) {
    sigma.fail("need one row per component");
  }
  for (std::size_t i = 0; i < sigma.size(); ++i) {
    const ConfigView row = sigma.element(i);
    if (row.size() != static_cast<std::size_t>(md.q)) {
      row.fail("need one entry per channel");
    }
    for (std::size_t j = 0; j < row.size(); ++j) {
      md.sigma.push_back(parse_entry(row.element(j), md.m));
    }
  }
  if (v.has("drift")) {
    const ConfigView drift = v.child("drift");
    if (drift.size() != static_cast<std::size_t>(md.m)) {
      drift.fail("need one entry per component");
    }
    for (std::size_t i = 0; i < drift.size(); ++i) {
      md.drift.push_back(parse_entry(drift.element(i), md.m));
    }
  } else {
    md.drift.assign(static_cast<std::size_t>(md.m),
                    CoefficientEntry::constant(0.0));
  }
  try {
    md.validate();
  } catch (const config_error& err) {
    v.fail(err.what());
  }
  return md;
}

}  // namespace detail

inline ExperimentConfig parse_config(nlohmann::json document) {
  ExperimentConfig cfg;
  cfg.document = std::move(document);
  const ConfigView root = cfg.view();
  if (!root.json().is_object()) root.fail("top level must be an object");
  try {
    cfg.kernel = detail::parse_kernel(root.child("kernel"));
  } catch (const config_error& err) {
    // Factory-level complaints (bad gamma range etc.) get the kernel path.
    const std::string what = err.what();
    if (what.rfind("config", 0) == 0) throw;
    root.child("kernel").fail(what);
  }
  cfg.grid = detail::parse_grid(root.child("grid"));
  try {
    cfg.model = detail::parse_model(root.child("model"));
  } catch (const config_error& err) {
    const std::string what = err.what();
    if (what.rfind("config", 0) == 0) throw;
    root.child("model").fail(what);
  }
  cfg.seed = root.unsigned_or("seed", 1);
  return cfg;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& err) {
    throw config_error("config parse error in " + path + ": " + err.what());
  }
  return parse_config(std::move(doc));
}

// Probe parsing shared by the simulate and verify blocks:
// {"t": 1.0, "x": [0.0]} snapped to the nearest step boundary and cell.
inline ProbePoint parse_probe(const ConfigView& v, const GridSpec& grid) {
  const double t = v.number("t");
  if (!(t >= 0.0) || t > grid.t_final() * (1.0 + 1e-12)) {
    v.child("t").fail("probe time outside [0, t_final]");
  }
  const std::vector<double> x = v.number_array("x");
  if (x.size() != static_cast<std::size_t>(grid.dim)) {
    v.child("x").fail("need one coordinate per axis (" +
                      std::to_string(grid.dim) + ")");
  }
  return snap_probe(grid, t, x.data());
}

// The canonical configuration echo written next to run outputs: the parsed
// document with the seed and the realized box length substituted, so a run
// can be reproduced from its artifacts alone.  Worker counts are runtime
// details and never enter the payload.
inline nlohmann::json resolved_config(const ExperimentConfig& cfg,
                                      const GridSpec& grid,
                                      std::uint64_t seed) {
  nlohmann::json doc = cfg.document;
  doc["seed"] = seed;
  doc["grid"]["box_length"] = grid.box_length;
  doc.erase("workers");
  return doc;
}

}  // namespace shelab
