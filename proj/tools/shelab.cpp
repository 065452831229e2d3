// shelab -- command-line front end of the stochastic heat-equation lab.
//
// One experiment configuration (JSON) describes a noise kernel, a lattice,
// and a coefficient model; the --command flag selects what to do with it:
//
//   kernel    admissibility conditions of the noise kernel
//   phi       variance functional: profile, growth laws, two-sided control
//   simulate  path ensemble with probe records and optional field dumps
//   verify    statistical hypothesis checks against the simulated ensemble
//
// Every run writes resolved_config.json (the exact reproducible input) and
// run_metadata.json (the only file allowed to carry timestamps) into the
// output directory, plus command-specific artifacts.  Payload files are
// byte-identical across reruns and worker counts.
//
// Exit codes: 0 all checks passed, 1 a hypothesis check failed, 2 broken
// configuration or usage, 3 numerical instability.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "shelab/config.hpp"
#include "shelab/density.hpp"
#include "shelab/errors.hpp"
#include "shelab/grid.hpp"
#include "shelab/io.hpp"
#include "shelab/kernels.hpp"
#include "shelab/malliavin.hpp"
#include "shelab/model.hpp"
#include "shelab/parallel.hpp"
#include "shelab/phi.hpp"
#include "shelab/rng.hpp"
#include "shelab/solver.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Small utilities
// ---------------------------------------------------------------------------

std::string iso_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json_file(const fs::path& path, const json& doc) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw shelab::config_error("cannot open for writing: " + path.string());
  out << doc.dump(2) << '\n';
  if (!out) throw shelab::config_error("write failed: " + path.string());
}

json finite_or_null(double v) {
  return std::isfinite(v) ? json(v) : json();
}

json condition_json(const shelab::ConditionReport& rep) {
  return json{{"condition", rep.condition},
              {"threshold", rep.threshold},
              {"holds", rep.holds},
              {"moment", finite_or_null(rep.value)}};
}

json scaling_json(const shelab::ScalingReport& rep) {
  return json{{"quantity", rep.quantity},
              {"fitted_exponent", rep.fitted_exponent},
              {"reference_exponent", rep.reference_exponent},
              {"tolerance", rep.tolerance},
              {"r_squared", rep.r_squared},
              {"pass", rep.pass}};
}

void append_scaling_row(shelab::CsvTable& table, const shelab::ScalingReport& rep) {
  table.add_row({rep.quantity, shelab::format_double(rep.fitted_exponent),
                 shelab::format_double(rep.reference_exponent),
                 shelab::format_double(rep.tolerance),
                 shelab::format_double(rep.r_squared),
                 rep.pass ? "true" : "false"});
}

// Positive integer array (probe lags, window steps) out of a JSON number list.
std::vector<std::size_t> index_array(const shelab::ConfigView& v) {
  std::vector<std::size_t> out;
  for (double x : v.number_array()) {
    if (!(x > 0.0) || x != std::floor(x)) {
      v.fail("expected positive whole numbers");
    }
    out.push_back(static_cast<std::size_t>(x));
  }
  return out;
}

std::optional<std::uint64_t> env_u64(const char* name) {
  const char* text = std::getenv(name);
  if (text == nullptr || *text == '\0') return std::nullopt;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(text, &end, 10);
  if (errno != 0 || end == text || *end != '\0') {
    throw shelab::config_error(std::string(name) + ": expected an unsigned integer, got '" +
                               text + "'");
  }
  return static_cast<std::uint64_t>(v);
}

// ---------------------------------------------------------------------------
// kernel: admissibility report
// ---------------------------------------------------------------------------

bool run_kernel(const shelab::ExperimentConfig& cfg, const fs::path& out) {
  const shelab::KernelSpec& k = cfg.kernel;
  json report;
  report["kernel"] = k.describe();
  report["dim"] = k.dim;
  report["minimal_eta"] = shelab::minimal_eta(k);
  const shelab::ConditionReport integ = shelab::check_integrability(k);
  report["integrability"] = condition_json(integ);

  bool pass = integ.holds;
  json etas = json::array();
  const shelab::ConfigView root = cfg.view();
  if (root.has("kernel_conditions")) {
    const shelab::ConfigView block = root.child("kernel_conditions");
    if (block.has("etas")) {
      for (double eta : block.number_array("etas")) {
        const shelab::ConditionReport rep = shelab::check_h_eta(k, eta);
        json entry = condition_json(rep);
        entry["eta"] = eta;
        etas.push_back(entry);
        pass = pass && rep.holds;
      }
    }
  }
  report["eta_conditions"] = etas;
  report["pass"] = pass;
  write_json_file(out / "kernel_report.json", report);

  std::cout << "kernel: " << k.describe() << "\n"
            << "  minimal eta " << shelab::minimal_eta(k) << ", integrability "
            << (integ.holds ? "holds" : "fails") << ", " << etas.size()
            << " eta condition(s)\n"
            << (pass ? "PASS" : "FAIL") << "\n";
  return pass;
}

// ---------------------------------------------------------------------------
// phi: variance functional profile and growth laws
// ---------------------------------------------------------------------------

std::vector<double> profile_times(const shelab::ExperimentConfig& cfg) {
  const shelab::ConfigView root = cfg.view();
  double t_min = 1e-3, t_max = 1.0;
  std::size_t points = 17;
  if (root.has("phi")) {
    const shelab::ConfigView block = root.child("phi");
    if (block.has("times")) {
      std::vector<double> times = block.number_array("times");
      for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
          block.child("times").fail("need strictly increasing positive times");
        }
      }
      return times;
    }
    t_min = block.number_or("t_min", t_min);
    t_max = block.number_or("t_max", t_max);
    const std::int64_t p = block.integer_or("points", static_cast<std::int64_t>(points));
    if (!(t_min > 0.0) || !(t_max > t_min) || p < 2) {
      block.fail("need 0 < t_min < t_max and points >= 2");
    }
    points = static_cast<std::size_t>(p);
  }
  std::vector<double> times(points);
  const double step = std::log(t_max / t_min) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    times[i] = t_min * std::exp(step * static_cast<double>(i));
  }
  times.back() = t_max;
  return times;
}

bool run_phi(const shelab::ExperimentConfig& cfg, const fs::path& out) {
  const shelab::KernelSpec& k = cfg.kernel;
  const std::vector<double> times = profile_times(cfg);
  const shelab::PhiProfile profile = shelab::compute_phi(k, times);

  shelab::CsvTable profile_csv;
  profile_csv.columns = {"t", "phi"};
  for (std::size_t i = 0; i < profile.t.size(); ++i) {
    profile_csv.add_row({shelab::format_double(profile.t[i]),
                         shelab::format_double(profile.value[i])});
  }
  shelab::write_csv((out / "phi_profile.csv").string(), profile_csv);

  json report;
  report["closed_form"] = profile.closed_form;
  if (profile.closed_form) {
    report["growth_exponent"] = profile.beta;
    report["prefactor"] = profile.prefactor;
  }

  shelab::CsvTable scaling_csv;
  scaling_csv.columns = {"hypothesis", "fitted_exponent", "reference_exponent",
                         "tolerance", "r_squared", "pass"};

  const shelab::ScalingReport h1 = shelab::check_h1(k);
  report["small_time_growth"] = scaling_json(h1);
  append_scaling_row(scaling_csv, h1);
  bool pass = h1.pass;

  const shelab::ConfigView root = cfg.view();
  if (root.has("phi")) {
    const shelab::ConfigView block = root.child("phi");
    if (block.has("refined_growth")) {
      const shelab::ConfigView rg = block.child("refined_growth");
      const shelab::H2Report h2 =
          shelab::check_h2(k, rg.number("gamma1"), rg.number("gamma2"));
      json entry;
      entry["weighted"] = scaling_json(h2.weighted);
      entry["plain"] = scaling_json(h2.plain);
      entry["weighted_dominates"] = h2.weighted_dominates;
      entry["plain_dominates"] = h2.plain_dominates;
      entry["pass"] = h2.pass;
      report["refined_growth"] = entry;
      append_scaling_row(scaling_csv, h2.weighted);
      append_scaling_row(scaling_csv, h2.plain);
      pass = pass && h2.pass;
    }
    if (block.has("two_sided")) {
      const shelab::ConfigView ts = block.child("two_sided");
      const double eta = ts.number("eta");
      const double t_max = ts.number_or("t_max", times.back());
      const shelab::TwoSidedReport rep = shelab::check_two_sided(k, eta, t_max);
      report["two_sided"] = json{{"eta", eta},
                                 {"t_max", t_max},
                                 {"min_increment_rate", rep.min_increment_rate},
                                 {"sup_ratio", rep.sup_ratio},
                                 {"ratio_at_smallest", rep.ratio_at_smallest},
                                 {"ratio_at_largest", rep.ratio_at_largest},
                                 {"pass_lower", rep.pass_lower},
                                 {"pass_upper", rep.pass_upper},
                                 {"pass", rep.pass}};
      pass = pass && rep.pass;
    }
  }
  report["pass"] = pass;
  shelab::write_csv((out / "scaling_reports.csv").string(), scaling_csv);
  write_json_file(out / "phi_report.json", report);

  std::cout << "phi: " << profile.t.size() << " profile points on ["
            << profile.t.front() << ", " << profile.t.back() << "]\n"
            << "  small-time exponent " << h1.fitted_exponent << " (reference "
            << h1.reference_exponent << ", r^2 " << h1.r_squared << ")\n"
            << (pass ? "PASS" : "FAIL") << "\n";
  return pass;
}

// ---------------------------------------------------------------------------
// simulate: probe ensemble and optional terminal field dump
// ---------------------------------------------------------------------------

bool run_simulate(const shelab::ExperimentConfig& cfg, const shelab::GridSpec& grid,
                  std::uint64_t seed, int workers, const fs::path& out) {
  const shelab::ConfigView block = cfg.view().child("simulate");
  const std::int64_t paths_raw = block.integer("paths");
  if (paths_raw <= 0) block.child("paths").fail("need at least one path");
  const auto paths = static_cast<std::size_t>(paths_raw);
  const bool dump_terminal = block.boolean_or("dump_terminal", false);

  std::vector<shelab::ProbePoint> probes;
  if (block.has("probes")) {
    const shelab::ConfigView list = block.child("probes");
    for (std::size_t i = 0; i < list.size(); ++i) {
      probes.push_back(shelab::parse_probe(list.element(i), grid));
    }
  }
  if (probes.empty() && !dump_terminal) {
    block.fail("nothing to record: give probes or set dump_terminal");
  }

  const shelab::HeatSolver solver(cfg.model, cfg.kernel, grid, seed);
  const auto m = static_cast<std::size_t>(cfg.model.m);
  const std::size_t cells = grid.cells();

  shelab::EnsembleResult ens;
  ens.paths = paths;
  ens.components = m;
  ens.probes = probes;
  ens.values.assign(paths * probes.size() * m, 0.0);

  shelab::FieldDump dump;
  if (dump_terminal) {
    dump.dim = static_cast<std::size_t>(grid.dim);
    dump.n = grid.n;
    dump.components = m;
    dump.frames = paths;
    dump.box_length = grid.box_length;
    dump.dt = grid.dt;
    dump.data.assign(paths * m * cells, 0.0);
  }

  shelab::SolveOptions opt;
  opt.probes = probes;
  const std::size_t stride = probes.size() * m;
  shelab::parallel_for(paths, workers, [&](std::size_t path, int) {
    const shelab::PathResult pr = solver.solve_path(path, opt);
    double* slot = ens.values.data() + path * stride;
    for (std::size_t pi = 0; pi < probes.size(); ++pi) {
      for (std::size_t c = 0; c < m; ++c) {
        slot[pi * m + c] = pr.probe_values[pi][c];
      }
    }
    if (dump_terminal) {
      std::copy(pr.terminal.data.begin(), pr.terminal.data.end(),
                dump.data.begin() + static_cast<std::ptrdiff_t>(path * m * cells));
    }
  });

  json report;
  report["paths"] = paths;
  report["components"] = m;
  report["terminal_dump"] = dump_terminal;
  json probe_stats = json::array();
  std::vector<double> x(static_cast<std::size_t>(grid.dim));
  for (std::size_t pi = 0; pi < probes.size(); ++pi) {
    grid.cell_coordinates(probes[pi].cell, x.data());
    const double t = static_cast<double>(probes[pi].step) * grid.dt;
    json entry;
    entry["step"] = probes[pi].step;
    entry["cell"] = probes[pi].cell;
    entry["t"] = t;
    entry["x"] = x;
    json means = json::array(), variances = json::array();
    for (std::size_t c = 0; c < m; ++c) {
      double mean = 0.0;
      for (std::size_t p = 0; p < paths; ++p) mean += ens.at(p, pi, c);
      mean /= static_cast<double>(paths);
      double var = 0.0;
      for (std::size_t p = 0; p < paths; ++p) {
        const double d = ens.at(p, pi, c) - mean;
        var += d * d;
      }
      var /= static_cast<double>(paths > 1 ? paths - 1 : 1);
      means.push_back(mean);
      variances.push_back(var);
    }
    entry["mean"] = means;
    entry["variance"] = variances;
    entry["phi"] = t > 0.0 ? json(shelab::phi_at(cfg.kernel, t)) : json();
    probe_stats.push_back(entry);
  }
  report["probes"] = probe_stats;

  if (!probes.empty()) {
    shelab::write_probe_jsonl((out / "probes.jsonl").string(), grid, ens);
  }
  if (dump_terminal) {
    shelab::write_field_dump((out / "terminal.bin").string(), dump);
  }
  write_json_file(out / "simulate_report.json", report);

  std::cout << "simulate: " << paths << " paths, " << probes.size()
            << " probe(s)" << (dump_terminal ? ", terminal dump" : "") << "\n"
            << "PASS\n";
  return true;
}

// ---------------------------------------------------------------------------
// verify: hypothesis checks on the simulated ensemble
// ---------------------------------------------------------------------------

shelab::ProbePoint check_probe(const shelab::ConfigView& check,
                               const shelab::GridSpec& grid, double t) {
  std::vector<double> x(static_cast<std::size_t>(grid.dim), 0.0);
  if (check.has("x")) {
    x = check.number_array("x");
    if (x.size() != static_cast<std::size_t>(grid.dim)) {
      check.child("x").fail("need one coordinate per axis (" +
                            std::to_string(grid.dim) + ")");
    }
  }
  return shelab::snap_probe(grid, t, x.data());
}

json verify_moment(const shelab::ConfigView& check, const shelab::HeatSolver& solver,
                   int workers, bool force_p2) {
  const int p = force_p2 ? 2 : static_cast<int>(check.integer_or("p", 2));
  const auto paths = static_cast<std::size_t>(check.integer_or("paths", 2000));
  const double tol = check.number_or("tolerance", 0.1);
  const shelab::MomentReport rep =
      shelab::check_moment_bound(solver, p, paths, tol, workers);
  return json{{"p", rep.p},           {"paths", rep.paths},
              {"measured", rep.measured}, {"reference", rep.reference},
              {"deviation", rep.deviation}, {"tolerance", rep.tolerance},
              {"pass", rep.pass}};
}

json verify_ellipticity(const shelab::ConfigView& check, const shelab::Model& model,
                        std::uint64_t seed) {
  const auto pairs = static_cast<std::size_t>(check.integer_or("pairs", 20000));
  const double min_lower = check.number_or("min_lower", 0.0);
  const shelab::EllipticityReport rep =
      shelab::check_ellipticity(model, pairs, seed);
  bool pass = rep.positive && rep.lower > min_lower;
  json entry{{"pairs", rep.pairs},
             {"lower", rep.lower},
             {"upper", rep.upper},
             {"positive", rep.positive},
             {"min_lower", min_lower}};
  if (check.has("max_upper")) {
    const double max_upper = check.number("max_upper");
    entry["max_upper"] = max_upper;
    pass = pass && rep.upper <= max_upper;
  }
  entry["pass"] = pass;
  return entry;
}

json regularity_json(const shelab::RegularityReport& rep, double reference,
                     double tol, double min_r2, bool* pass) {
  *pass = std::abs(rep.exponent - reference) <= tol &&
          rep.fit.r_squared >= min_r2;
  return json{{"exponent", rep.exponent},
              {"slope", rep.fit.exponent},
              {"r_squared", rep.fit.r_squared},
              {"reference", reference},
              {"tolerance", tol},
              {"min_r_squared", min_r2},
              {"paths", rep.paths},
              {"separation", rep.separation},
              {"moment", rep.moment},
              {"pass", *pass}};
}

json verify_holder_time(const shelab::ConfigView& check,
                        const shelab::HeatSolver& solver, int workers) {
  const shelab::GridSpec& grid = solver.grid();
  const std::vector<std::size_t> lags = index_array(check.child("lags"));
  const auto base = static_cast<std::size_t>(
      check.integer_or("base_step", static_cast<std::int64_t>(grid.n_steps / 2)));
  const auto cell = static_cast<std::size_t>(check.integer_or("cell", 0));
  const auto paths = static_cast<std::size_t>(check.integer_or("paths", 1000));
  const double reference = check.number("reference");
  const double tol = check.number_or("tolerance", 0.05);
  const double min_r2 = check.number_or("min_r_squared", 0.9);
  const shelab::RegularityReport rep =
      shelab::estimate_time_regularity(solver, base, lags, cell, paths, workers);
  bool pass = false;
  json entry = regularity_json(rep, reference, tol, min_r2, &pass);
  entry["base_step"] = base;
  entry["cell"] = cell;
  return entry;
}

json verify_holder_space(const shelab::ConfigView& check,
                         const shelab::HeatSolver& solver, int workers) {
  const shelab::GridSpec& grid = solver.grid();
  const std::vector<std::size_t> lags = index_array(check.child("lags"));
  const auto step = static_cast<std::size_t>(
      check.integer_or("step", static_cast<std::int64_t>(grid.n_steps)));
  const auto base = static_cast<std::size_t>(check.integer_or("base_cell", 0));
  const auto paths = static_cast<std::size_t>(check.integer_or("paths", 1000));
  const double reference = check.number("reference");
  const double tol = check.number_or("tolerance", 0.05);
  const double min_r2 = check.number_or("min_r_squared", 0.9);
  const shelab::RegularityReport rep =
      shelab::estimate_space_regularity(solver, step, base, lags, paths, workers);
  bool pass = false;
  json entry = regularity_json(rep, reference, tol, min_r2, &pass);
  entry["step"] = step;
  entry["base_cell"] = base;
  return entry;
}

json verify_envelope(const shelab::ConfigView& check,
                     const shelab::ExperimentConfig& cfg,
                     const shelab::HeatSolver& solver, std::uint64_t seed,
                     int workers) {
  const shelab::GridSpec& grid = solver.grid();
  const auto m = static_cast<std::size_t>(cfg.model.m);
  if (m > 2) {
    check.fail("density estimation supports one or two components");
  }
  const double drift_sup = cfg.model.drift_sup();
  if (!std::isfinite(drift_sup)) {
    check.fail("drift must be bounded for the envelope fit");
  }
  const auto paths = static_cast<std::size_t>(check.integer_or("paths", 4000));

  std::vector<double> times;
  if (check.has("times")) {
    times = check.number_array("times");
  } else {
    times = {grid.t_final()};
  }
  std::vector<shelab::ProbePoint> probes;
  for (double t : times) {
    const shelab::ProbePoint probe = check_probe(check, grid, t);
    if (probe.step == 0) check.child("times").fail("slice time below the first step");
    probes.push_back(probe);
  }

  const shelab::EnsembleResult ens =
      shelab::run_ensemble(solver, paths, probes, workers);

  shelab::EnvelopeOptions opt;
  opt.lower_gate = check.number_or("lower_gate", opt.lower_gate);
  opt.upper_gate = check.number_or("upper_gate", opt.upper_gate);
  opt.max_boot_rel_err = check.number_or("max_boot_rel_err", opt.max_boot_rel_err);

  std::vector<std::vector<double>> samples(probes.size());
  std::vector<shelab::DensityEstimate> estimates(probes.size());
  std::vector<shelab::EnvelopeSlice> slices(probes.size());
  json slices_json = json::array();
  bool mass_ok = true;
  for (std::size_t i = 0; i < probes.size(); ++i) {
    samples[i] = ens.probe_samples(i);
    shelab::DensityOptions dopt;
    dopt.seed = shelab::derive_stream_key(seed, shelab::rng_domain::kBootstrap,
                                          1000 + i);
    dopt.workers = workers;
    dopt.resamples = static_cast<std::size_t>(check.integer_or("resamples", 200));
    estimates[i] = shelab::estimate_density(samples[i], m, dopt);
    const double horizon = static_cast<double>(probes[i].step) * grid.dt;
    slices[i] = {&estimates[i], shelab::phi_at(cfg.kernel, horizon), horizon};
    mass_ok = mass_ok && estimates[i].lattice_mass >= 0.9 &&
              estimates[i].lattice_mass <= 1.0;
    slices_json.push_back(json{{"t", horizon},
                               {"phi", slices[i].phi},
                               {"lattice_mass", estimates[i].lattice_mass},
                               {"samples", estimates[i].samples}});
  }

  const shelab::EnvelopeReport rep = shelab::check_envelope(slices, drift_sup, opt);
  const bool pass = rep.pass && mass_ok;
  return json{{"paths", paths},
              {"slices", slices_json},
              {"c1", rep.c1},
              {"c2", rep.c2},
              {"c3", rep.c3},
              {"c4", rep.c4},
              {"c5", rep.c5},
              {"variance_ratio", rep.variance_ratio},
              {"admissible", rep.admissible},
              {"excluded", rep.excluded},
              {"lower_pass", rep.lower_pass},
              {"upper_pass", rep.upper_pass},
              {"mass_ok", mass_ok},
              {"pass", pass}};
}

json verify_malliavin(const shelab::ConfigView& check,
                      const shelab::HeatSolver& solver, std::uint64_t seed) {
  const shelab::GridSpec& grid = solver.grid();
  const auto points = static_cast<std::size_t>(check.integer_or("points", 10));
  const auto path = static_cast<std::uint64_t>(check.integer_or("path", 0));
  const double eps = check.number_or("epsilon", 1e-6);
  const double tol = check.number_or("tolerance", 1e-4);
  const shelab::ProbePoint probe = check_probe(check, grid, grid.t_final());
  const shelab::FdCheckReport rep =
      shelab::check_derivative_fd(solver, path, probe.cell, points, seed, eps, tol);
  return json{{"points", rep.points},
              {"path", path},
              {"cell", probe.cell},
              {"epsilon", rep.epsilon},
              {"scale", rep.scale},
              {"max_rel_err", rep.max_rel_err},
              {"tolerance", rep.tolerance},
              {"pass", rep.pass}};
}

json verify_derivative_scaling(const shelab::ConfigView& check,
                               const shelab::HeatSolver& solver) {
  const shelab::GridSpec& grid = solver.grid();
  const auto path = static_cast<std::uint64_t>(check.integer_or("path", 0));
  const double max_ratio = check.number_or("max_ratio", 3.0);
  std::vector<double> fractions = {0.0625, 0.125, 0.25, 0.5};
  if (check.has("windows")) fractions = check.number_array("windows");
  std::vector<double> windows;
  for (double f : fractions) {
    if (!(f > 0.0) || f > 1.0) {
      check.child("windows").fail("window fractions must lie in (0, 1]");
    }
    windows.push_back(f * grid.t_final());
  }
  const shelab::ProbePoint probe = check_probe(check, grid, grid.t_final());

  shelab::SolveOptions opt;
  opt.store_trajectory = true;
  opt.store_noise = true;
  const shelab::PathResult pr = solver.solve_path(path, opt);
  const shelab::DerivativeField field =
      shelab::derivative_field(solver, pr, 0, probe.cell);
  const shelab::DerivativeScalingReport rep =
      shelab::check_derivative_scaling(solver, field, windows);

  double lo = rep.ratio.front(), hi = rep.ratio.front();
  bool finite = true;
  for (double r : rep.ratio) {
    lo = std::min(lo, r);
    hi = std::max(hi, r);
    finite = finite && std::isfinite(r) && r > 0.0;
  }
  const bool pass = finite && hi / lo <= max_ratio;
  return json{{"path", path},
              {"cell", probe.cell},
              {"windows", rep.window},
              {"mass", rep.mass},
              {"reference", rep.reference},
              {"ratio", rep.ratio},
              {"spread", hi / lo},
              {"max_ratio", max_ratio},
              {"pass", pass}};
}

json verify_drift_bound(const shelab::ConfigView& check,
                        const shelab::HeatSolver& solver, int workers) {
  const auto paths = static_cast<std::size_t>(check.integer_or("paths", 4));
  const double tol = check.number_or("tolerance", 1e-6);
  const shelab::DriftBoundReport rep =
      shelab::check_drift_bound(solver, paths, tol, workers);
  return json{{"paths", rep.paths},
              {"max_abs", rep.max_abs},
              {"bound", rep.bound},
              {"tolerance", rep.tolerance},
              {"pass", rep.pass}};
}

bool run_verify(const shelab::ExperimentConfig& cfg, const shelab::GridSpec& grid,
                std::uint64_t seed, int workers, const fs::path& out) {
  const shelab::ConfigView block = cfg.view().child("verify");
  const shelab::ConfigView list = block.child("checks");
  if (list.size() == 0) list.fail("need at least one check");

  const shelab::HeatSolver solver(cfg.model, cfg.kernel, grid, seed);
  json entries = json::array();
  bool all_pass = true;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const shelab::ConfigView check = list.element(i);
    const std::string type = check.text("type");
    json entry;
    if (type == "moment" || type == "variance") {
      entry = verify_moment(check, solver, workers, type == "variance");
    } else if (type == "ellipticity") {
      entry = verify_ellipticity(check, cfg.model, seed);
    } else if (type == "holder_time") {
      entry = verify_holder_time(check, solver, workers);
    } else if (type == "holder_space") {
      entry = verify_holder_space(check, solver, workers);
    } else if (type == "envelope") {
      entry = verify_envelope(check, cfg, solver, seed, workers);
    } else if (type == "malliavin") {
      entry = verify_malliavin(check, solver, seed);
    } else if (type == "derivative_scaling") {
      entry = verify_derivative_scaling(check, solver);
    } else if (type == "drift_bound") {
      entry = verify_drift_bound(check, solver, workers);
    } else {
      check.child("type").fail("unknown check type '" + type + "'");
    }
    entry["type"] = type;
    const bool pass = entry["pass"].get<bool>();
    all_pass = all_pass && pass;
    entries.push_back(entry);
    std::cout << "  [" << (i + 1) << "/" << list.size() << "] " << type << ": "
              << (pass ? "pass" : "FAIL") << "\n";
  }

  json report;
  report["checks"] = entries;
  report["pass"] = all_pass;
  write_json_file(out / "verify_report.json", report);
  std::cout << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic heat-equation lab"};
  std::string command, config_path, out_dir = "shelab-out";
  std::uint64_t seed_flag = 0;
  int workers_flag = 0;
  app.add_option("--command", command, "kernel | phi | simulate | verify")
      ->required()
      ->check(CLI::IsMember({"kernel", "phi", "simulate", "verify"}));
  app.add_option("--config", config_path, "experiment configuration (JSON)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed_flag,
                                  "noise seed (overrides SHELAB_SEED and the config)");
  auto* workers_opt = app.add_option(
      "--workers", workers_flag,
      "worker threads, 0 = all cores (overrides SHELAB_WORKERS)");
  workers_opt->check(CLI::NonNegativeNumber);
  app.add_option("--out", out_dir, "output directory (default shelab-out)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    const shelab::ExperimentConfig cfg = shelab::load_config(config_path);

    // Precedence: command line, then environment, then the config file.
    std::uint64_t seed = cfg.seed;
    if (const auto env = env_u64("SHELAB_SEED")) seed = *env;
    if (seed_opt->count() > 0) seed = seed_flag;
    int workers_requested = 0;
    if (const auto env = env_u64("SHELAB_WORKERS")) {
      workers_requested = static_cast<int>(*env);
    }
    if (workers_opt->count() > 0) workers_requested = workers_flag;
    const int workers = shelab::resolve_workers(workers_requested);

    const shelab::GridSpec grid = cfg.make_grid_spec();
    const fs::path out(out_dir);
    fs::create_directories(out);

    write_json_file(out / "resolved_config.json",
                    shelab::resolved_config(cfg, grid, seed));
    write_json_file(out / "run_metadata.json",
                    json{{"command", command},
                         {"config", config_path},
                         {"seed", seed},
                         {"workers", workers},
                         {"workers_requested", workers_requested},
                         {"started_utc", iso_utc_now()}});

    bool pass = false;
    if (command == "kernel") {
      pass = run_kernel(cfg, out);
    } else if (command == "phi") {
      pass = run_phi(cfg, out);
    } else if (command == "simulate") {
      pass = run_simulate(cfg, grid, seed, workers, out);
    } else {
      pass = run_verify(cfg, grid, seed, workers, out);
    }
    return pass ? 0 : 1;
  } catch (const shelab::instability_error& e) {
    std::cerr << "instability: " << e.what() << "\n";
    return 3;
  } catch (const shelab::config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
