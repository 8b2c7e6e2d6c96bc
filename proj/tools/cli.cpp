#include "cli.hpp"

#include "holopt/dynamics.hpp"
#include "holopt/hash.hpp"
#include "holopt/metrics.hpp"
#include "holopt/optimizer.hpp"
#include "holopt/pulse.hpp"
#include "holopt/systems.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#ifndef HOLOPT_VERSION
#define HOLOPT_VERSION "0.0.0"
#endif

namespace holopt::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Option plumbing

void add_hz(CLI::App* app, const std::string& name, std::optional<double>& hz,
            const std::string& help) {
  auto* a = app->add_option_function<double>(
      "--" + name, [&hz](double v) { hz = v; }, help + " (Hz)");
  auto* k = app->add_option_function<double>(
      "--" + name + "-khz", [&hz](double v) { hz = v * 1e3; }, help + " (kHz)");
  auto* m = app->add_option_function<double>(
      "--" + name + "-mhz", [&hz](double v) { hz = v * 1e6; }, help + " (MHz)");
  a->excludes(k);
  a->excludes(m);
  k->excludes(m);
}

struct Common {
  std::string system = "ensemble-rei";
  std::string gate = "not";
  std::string coeffs = "table1";
  std::string comp_coeffs;
  std::string sigma2;
  std::optional<double> gamma1, gamma2, gamma3;
  bool lossless = false;
  double rtol = 1e-9;
  double atol = 1e-12;
  double max_step_fraction = 0.01;
  unsigned workers = 0;
  std::string out_dir = ".";
  std::string name;
  bool svg = false;
};

void add_output_options(CLI::App* app, Common& c) {
  app->add_option("--out-dir", c.out_dir, "Directory for CSV, SVG and manifest files");
  app->add_option("--name", c.name, "Output file stem (default: command or target name)");
  app->add_flag("--svg", c.svg, "Also write SVG plots");
  app->add_option("--workers", c.workers, "Worker threads (0 = all cores; HOLOPT_WORKERS caps)");
}

void add_physics_options(CLI::App* app, Common& c) {
  app->add_option("--sigma2", c.sigma2, "Dephasing operator: lambda or ladder");
  add_hz(app, "gamma1", c.gamma1, "Decay rate Gamma1 / 2pi");
  add_hz(app, "gamma2", c.gamma2, "Dephasing rate Gamma2 / 2pi");
  add_hz(app, "gamma3", c.gamma3, "Ground-state relaxation rate Gamma3 / 2pi");
  app->add_flag("--lossless", c.lossless, "Set all decoherence rates to zero");
  app->add_option("--rtol", c.rtol, "Integrator relative tolerance");
  app->add_option("--atol", c.atol, "Integrator absolute tolerance");
  app->add_option("--max-step-fraction", c.max_step_fraction,
                  "Largest integrator step as a fraction of tau");
}

void add_pulse_options(CLI::App* app, Common& c) {
  app->add_option("--system", c.system, "ensemble-rei, single-rei or transmon");
  app->add_option("--gate", c.gate, "not, hadamard, sigma-y or sigma-z");
  app->add_option("--coeffs", c.coeffs,
                  "table1, table3, table4-K, baseline, alternative or a comma list");
  app->add_option("--comp-coeffs", c.comp_coeffs,
                  "Compensation-pair weights (same forms as --coeffs; default: --coeffs)");
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw UsageError("cannot parse number '" + item + "'");
    }
    if (item.find_first_not_of(" \t", used) != std::string::npos) {
      throw UsageError("cannot parse number '" + item + "'");
    }
    values.push_back(v);
  }
  return values;
}

PulseCoefficients resolve_coeffs(const std::string& spec, SystemName system, GateName gate,
                                 double tau) {
  if (spec == "table1") return table1_coefficients(system).with_tau(tau);
  if (spec == "table3") return table3_coefficients(gate).with_tau(tau);
  if (spec == "baseline") return baseline_coefficients(tau);
  if (spec == "alternative") return alternative_coefficients().with_tau(tau);
  if (spec.starts_with("table4-")) {
    const auto k = parse_list(spec.substr(7));
    if (k.size() != 1) throw UsageError("bad table4 spelling '" + spec + "'");
    return table4_coefficients(static_cast<int>(k[0])).with_tau(tau);
  }
  if (spec.find_first_of("0123456789") != std::string::npos) {
    return PulseCoefficients(parse_list(spec), tau);
  }
  throw UsageError("unknown coefficient set '" + spec +
                   "' (expected table1, table3, table4-K, baseline, alternative or a list)");
}

SystemPreset resolve_system(const Common& c, SystemName name) {
  auto p = preset(name);
  if (c.gamma1) p.profile.gamma1 = angular(*c.gamma1);
  if (c.gamma2) p.profile.gamma2 = angular(*c.gamma2);
  if (c.gamma3) p.profile.gamma3 = angular(*c.gamma3);
  if (c.lossless) p.profile.gamma1 = p.profile.gamma2 = p.profile.gamma3 = 0.0;
  if (!c.sigma2.empty()) p.profile.sigma2 = parse_sigma2(c.sigma2);
  p.validate();
  return p;
}

EvalOptions eval_options(const Common& c) {
  EvalOptions o;
  o.integrator.rel_tol = c.rtol;
  o.integrator.abs_tol = c.atol;
  o.integrator.max_step_fraction = c.max_step_fraction;
  o.integrator.validate();
  o.workers = c.workers;
  return o;
}

QubitKet parse_initial(const std::string& text) {
  const double r = 1.0 / std::sqrt(2.0);
  const Complex i{0.0, 1.0};
  if (text == "0") return {1.0, 0.0};
  if (text == "1") return {0.0, 1.0};
  if (text == "+") return {r, r};
  if (text == "-") return {r, -r};
  if (text == "+i") return {r, r * i};
  if (text == "-i") return {r, -r * i};
  const auto v = parse_list(text);
  if (v.size() != 2) {
    throw UsageError("initial state must be 0, 1, +, -, +i, -i or 'polar,azimuth' in radians");
  }
  return {std::cos(v[0] / 2.0), std::exp(i * v[1]) * std::sin(v[0] / 2.0)};
}

// ---------------------------------------------------------------------------
// Outputs and manifests

class Run {
 public:
  Run(std::string command, std::string stem, const std::string& dir)
      : command_(std::move(command)), stem_(std::move(stem)), dir_(dir),
        start_(std::chrono::steady_clock::now()) {}

  fs::path path(const std::string& suffix) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw UsageError("cannot create output directory " + dir_.string());
    auto p = dir_ / (stem_ + suffix);
    outputs_.push_back(p);
    return p;
  }

  template <class Writer>
  void write(const std::string& suffix, Writer&& writer) {
    const auto p = path(suffix);
    std::ofstream f(p, std::ios::binary);
    if (!f) throw UsageError("cannot write " + p.string());
    writer(f);
    if (!f) throw UsageError("write failed for " + p.string());
  }

  json options = json::object();
  json results = json::object();
  json config = json::object();
  std::vector<std::uint64_t> seeds;

  void finish() {
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    json hashes = json::object();
    for (const auto& p : outputs_) hashes[p.filename().string()] = sha256_file(p);
    json m{{"command", command_},   {"options", options}, {"config", config},
           {"seeds", seeds},        {"version", HOLOPT_VERSION},
           {"wall_time_s", wall},   {"outputs", hashes},  {"results", results}};
    std::error_code ec;
    fs::create_directories(dir_, ec);
    std::ofstream f(dir_ / (stem_ + ".manifest.json"));
    if (!f) throw UsageError("cannot write manifest in " + dir_.string());
    f << m.dump(2) << '\n';
  }

 private:
  std::string command_;
  std::string stem_;
  fs::path dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<fs::path> outputs_;
};

// Options the user set, in a form `--config` can replay.
json replayable_options(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->count() == 0) continue;
    const std::string name = opt->get_name();
    if (name == "--config" || name == "--help") continue;
    if (opt->get_items_expected_max() == 0) {
      j[name] = true;
      continue;
    }
    const auto& r = opt->results();
    j[name] = r.size() == 1 ? json(r[0]) : json(r);
  }
  return j;
}

// Flag family: --delta, --delta-khz and --delta-mhz are one setting.
std::string family(std::string flag) {
  if (auto eq = flag.find('='); eq != std::string::npos) flag.resize(eq);
  for (const char* suffix : {"-khz", "-mhz"}) {
    if (flag.ends_with(suffix)) flag.resize(flag.size() - 4);
  }
  return flag;
}

std::string scalar_token(const json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

// Splices options from a --config JSON file ahead of the command-line tokens;
// anything given on the command line wins.
std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::string file;
  std::vector<std::string> rest;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      file = args[++i];
    } else if (args[i].starts_with("--config=")) {
      file = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  if (file.empty()) return args;
  std::ifstream f(file);
  if (!f) throw UsageError("cannot read config file " + file);
  json doc;
  try {
    doc = json::parse(f);
  } catch (const json::exception& e) {
    throw UsageError("config file " + file + " is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw UsageError("config file must hold a JSON object");
  const json opts = doc.contains("options") ? doc["options"] : doc;
  if (rest.empty() || rest.front().starts_with("-")) {
    if (!doc.contains("command")) throw UsageError("no command given and none in config file");
    rest.insert(rest.begin(), doc["command"].get<std::string>());
  }
  std::set<std::string> given;
  for (const auto& t : rest) {
    if (t.starts_with("--")) given.insert(family(t));
  }
  std::vector<std::string> out{rest.front()};
  for (const auto& [key, value] : opts.items()) {
    if (key == "command" || given.contains(family(key))) continue;
    if (value.is_boolean()) {
      if (value.get<bool>()) out.push_back(key);
      continue;
    }
    out.push_back(key);
    if (value.is_array()) {
      for (const auto& v : value) out.push_back(scalar_token(v));
    } else {
      out.push_back(scalar_token(value));
    }
  }
  out.insert(out.end(), rest.begin() + 1, rest.end());
  return out;
}

std::string pct(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << 100.0 * v << '%';
  return s.str();
}

// Copies `csv` to `out`, prefixing every row with a case label.
void append_cases(std::ostream& out, const std::string& label, const std::string& csv,
                  bool& header_done) {
  std::istringstream in(csv);
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (first) {
      first = false;
      if (!header_done) out << "case," << line << '\n';
      header_done = true;
      continue;
    }
    out << label << ',' << line << '\n';
  }
}

const QubitKet kOne{0.0, 1.0};

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::optional<double> delta;
  std::string initial = "1";
  bool full_state = false;
  bool dump_schedule = false;
  std::string schedule_file;
};

int cmd_simulate(const Common& c, const SimulateArgs& s, Run& run, std::ostream& out) {
  const auto system = resolve_system(c, parse_system(c.system));
  const auto gate = gate_catalog(parse_gate(c.gate));
  const auto opts = eval_options(c);
  std::optional<PulseSchedule> schedule;
  if (!s.schedule_file.empty()) {
    std::ifstream f(s.schedule_file);
    if (!f) throw UsageError("cannot read schedule " + s.schedule_file);
    schedule = schedule_from_json(json::parse(f));
  } else {
    const auto coeffs = resolve_coeffs(c.coeffs, system.name, gate.name, system.tau);
    std::optional<PulseCoefficients> comp;
    if (!c.comp_coeffs.empty()) {
      comp = resolve_coeffs(c.comp_coeffs, system.name, gate.name, system.tau);
    }
    schedule = preset_schedule(system, gate, coeffs, kPrintedTolerance, comp ? &*comp : nullptr);
  }
  const auto psi = parse_initial(s.initial);
  auto cfg = opts.integrator;
  cfg.record_steps = true;
  const auto traj = evolve(DensityMatrix::pure(PureState3::from_qubit(psi)), *schedule,
                           angular(s.delta.value_or(0.0)), system.profile, cfg,
                           target_state(gate.params, psi));
  run.write(".csv", [&](std::ostream& f) { write_trajectory_csv(f, traj, *schedule, s.full_state); });
  if (s.dump_schedule) {
    run.write(".schedule.json", [&](std::ostream& f) { f << to_json(*schedule).dump(2) << '\n'; });
  }
  const auto& p = traj.populations.back();
  run.config = {{"system", to_json(system)}, {"gate", to_json(gate)},
                {"schedule", to_json(*schedule)}, {"delta_hz", s.delta.value_or(0.0)}};
  run.results = {{"final_fidelity", traj.fidelity.back()},
                 {"p0", p.p0}, {"pe", p.pe}, {"p1", p.p1}, {"steps", traj.times.size() - 1}};
  out << std::setprecision(10) << "final fidelity " << traj.fidelity.back() << "\npopulations p0="
      << p.p0 << " pe=" << p.pe << " p1=" << p.p1 << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::optional<double> lo, hi, mean_window, report_at;
  std::size_t points = 121;
  std::string initial = "1";
  std::optional<double> threshold;
};

int cmd_sweep(const Common& c, const SweepArgs& s, Run& run, std::ostream& out,
              std::ostream& err) {
  const auto system = resolve_system(c, parse_system(c.system));
  const auto gate = gate_catalog(parse_gate(c.gate));
  auto opts = eval_options(c);
  const auto coeffs = resolve_coeffs(c.coeffs, system.name, gate.name, system.tau);
  if (!c.comp_coeffs.empty()) {
    opts.compensation = resolve_coeffs(c.comp_coeffs, system.name, gate.name, system.tau);
  }
  const double lo = s.lo.value_or(-300e3), hi = s.hi.value_or(300e3);
  if (!(lo <= hi)) throw UsageError("sweep range must satisfy lo <= hi");
  if (s.points == 0) throw UsageError("--points must be positive");
  const auto psi = parse_initial(s.initial);
  const auto sweep = detuning_sweep(system, gate, coeffs, uniform_grid(lo, hi, s.points), psi, opts);
  run.write(".csv", [&](std::ostream& f) { write_sweep_csv(f, sweep); });
  if (c.svg) {
    run.write(".svg", [&](std::ostream& f) {
      write_sweep_svg(f, sweep, std::string(to_string(system.name)) + " " + sweep.gate);
    });
  }
  run.config = {{"system", to_json(system)}, {"gate", to_json(gate)},
                {"coefficients", to_json(coeffs)}, {"range_hz", {lo, hi}}, {"points", s.points}};
  const double w = s.mean_window.value_or(std::max(std::abs(lo), std::abs(hi)));
  const double mean = sweep.mean_fidelity(-w, w);
  run.results["mean_fidelity"] = mean;
  run.results["mean_window_hz"] = w;
  out << "mean fidelity over |delta| <= " << w << " Hz: " << pct(mean) << '\n';
  if (s.threshold) {
    const auto win = robustness_window(sweep, *s.threshold);
    if (win) {
      run.results["window_hz"] = {win->lo_hz, win->hi_hz};
      out << "window at F >= " << *s.threshold << ": [" << win->lo_hz << ", " << win->hi_hz
          << "] Hz\n";
    } else {
      run.results["window_hz"] = nullptr;
      out << "window at F >= " << *s.threshold << ": empty (F(0) below threshold)\n";
    }
  }
  if (s.report_at) {
    const double r = std::abs(*s.report_at);
    double worst = std::max(off_resonant_excitation(system, gate, coeffs, r, opts),
                            off_resonant_excitation(system, gate, coeffs, -r, opts));
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      if (sweep.ok(i) && std::abs(sweep.detunings_hz[i]) >= r) worst = std::max(worst, sweep.p_off[i]);
    }
    run.results["p_off_beyond_hz"] = r;
    run.results["p_off_max"] = worst;
    out << "max p_off for |delta| >= " << r << " Hz: " << pct(worst) << '\n';
  }
  std::size_t failed = 0;
  for (std::size_t i = 0; i < sweep.size(); ++i) failed += sweep.ok(i) ? 0 : 1;
  if (failed > 0) {
    err << "holopt: integrator failed at " << failed << " sweep point(s)\n";
    return kExitNumerical;
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// optimize

struct GAArgs {
  std::size_t population = 50;
  std::size_t generations = 300;
  std::uint64_t seed = 1;
  int harmonics = 4;
  bool fast_grids = false;
  std::optional<std::size_t> infidelity_points, offres_points;
  std::optional<double> crossover_rate, mutation_rate, mutation_scale, elite_fraction;
  std::vector<std::string> select{"knee", "min1", "min2"};
};

void add_ga_options(CLI::App* app, GAArgs& g) {
  app->add_option("--population", g.population, "Population size");
  app->add_option("--generations", g.generations, "Number of generations");
  app->add_option("--seed", g.seed, "RNG seed");
  app->add_option("--harmonics", g.harmonics, "Number of envelope weights K");
  app->add_flag("--fast-grids", g.fast_grids, "Coarse objective grids (5 and 4 points)");
  app->add_option("--infidelity-points", g.infidelity_points, "Objective 1 grid size");
  app->add_option("--offres-points", g.offres_points, "Objective 2 grid size per side");
  app->add_option("--crossover-rate", g.crossover_rate, "Crossover probability");
  app->add_option("--mutation-rate", g.mutation_rate, "Per-gene mutation probability");
  app->add_option("--mutation-scale", g.mutation_scale, "Gaussian mutation sigma");
  app->add_option("--elite-fraction", g.elite_fraction, "Share of population reported as top set");
}

GAConfig ga_config(const GAArgs& g, const Common& c) {
  GAConfig cfg;
  cfg.population_size = g.population;
  cfg.generations = g.generations;
  cfg.seed = g.seed;
  cfg.harmonics = g.harmonics;
  if (g.fast_grids) cfg.grids = ObjectiveGrids::fast();
  if (g.infidelity_points) cfg.grids.infidelity_points = *g.infidelity_points;
  if (g.offres_points) cfg.grids.offres_points = *g.offres_points;
  if (g.crossover_rate) cfg.crossover_rate = *g.crossover_rate;
  if (g.mutation_rate) cfg.mutation_rate = *g.mutation_rate;
  if (g.mutation_scale) cfg.mutation_scale = *g.mutation_scale;
  if (g.elite_fraction) cfg.elite_fraction = *g.elite_fraction;
  cfg.eval = eval_options(c);
  cfg.validate();
  return cfg;
}

void print_selection(std::ostream& out, const ParetoFront& front, const std::string& spec,
                     json& results) {
  const auto strategy = parse_strategy(spec);
  const auto& ind = select_solution(front, strategy);
  out << std::setprecision(6) << to_string(strategy) << ": alphas";
  for (double a : ind.alphas) out << ' ' << a;
  out << "  1-F=" << ind.objectives.infidelity << "  p_off=" << ind.objectives.offres << '\n';
  results["selected"][to_string(strategy)] = to_json(ind);
}

int cmd_optimize(const Common& c, const GAArgs& g, Run& run, std::ostream& out) {
  const auto system = resolve_system(c, parse_system(c.system));
  const auto gate = gate_catalog(parse_gate(c.gate));
  const auto cfg = ga_config(g, c);
  for (const auto& s : g.select) parse_strategy(s);
  const auto front = run_ga(system, gate, cfg);
  run.write(".csv", [&](std::ostream& f) { write_front_csv(f, front); });
  run.seeds.push_back(cfg.seed);
  run.config = {{"system", to_json(system)}, {"gate", to_json(gate)}, {"ga", to_json(cfg)}};
  run.results = to_json(front);
  out << "run " << front.run_id << ": front of " << front.front.size() << " point(s), top set of "
      << front.top.size() << '\n';
  for (const auto& s : g.select) print_selection(out, front, s, run.results);
  return kExitOk;
}

// ---------------------------------------------------------------------------
// reproduce

struct ReproduceArgs {
  std::string target;
  bool reoptimize = false;
  std::size_t bloch_points = 51;
};

std::string trajectory_csv(const SystemPreset& system, const GateSpec& gate,
                           const PulseCoefficients& coeffs, double delta_hz,
                           const EvalOptions& opts) {
  const auto schedule = preset_schedule(system, gate, coeffs);
  auto cfg = opts.integrator;
  cfg.record_steps = true;
  const auto traj = evolve(DensityMatrix::pure(PureState3::from_qubit(kOne)), schedule,
                           angular(delta_hz), system.profile, cfg, target_state(gate.params, kOne));
  std::ostringstream s;
  write_trajectory_csv(s, traj, schedule, false);
  return s.str();
}

void reproduce_trajectories(Run& run, const Common& c, SystemName name, double delta_hz,
                            std::ostream& out) {
  const auto system = resolve_system(c, name);
  const auto opts = eval_options(c);
  std::ostringstream csv;
  bool header = false;
  for (auto g : {GateName::not_gate, GateName::hadamard}) {
    const auto gate = gate_catalog(g);
    const auto coeffs = table1_coefficients(name);
    append_cases(csv, std::string(to_string(g)), trajectory_csv(system, gate, coeffs, delta_hz, opts),
                 header);
    const auto r = evaluate_point(system, gate, coeffs, delta_hz, kOne, opts);
    run.results[std::string(to_string(g))] = {{"final_fidelity", r.fidelity}};
    out << to_string(g) << ": final fidelity " << pct(r.fidelity) << '\n';
  }
  run.config = {{"system", to_json(system)}, {"delta_hz", delta_hz}, {"coefficients", "table1"}};
  run.write(".csv", [&](std::ostream& f) { f << csv.str(); });
}

void reproduce_sweeps(Run& run, const Common& c, SystemName name, double lo, double hi,
                      std::size_t points, std::optional<double> threshold, bool with_baseline,
                      std::ostream& out) {
  const auto system = resolve_system(c, name);
  const auto opts = eval_options(c);
  std::ostringstream csv;
  bool header = false;
  const auto grid = uniform_grid(lo, hi, points);
  for (auto g : {GateName::not_gate, GateName::hadamard}) {
    const auto gate = gate_catalog(g);
    std::vector<std::pair<std::string, PulseCoefficients>> sets{
        {"table1", table1_coefficients(name)}};
    if (with_baseline) sets.emplace_back("baseline", baseline_coefficients(system.tau));
    for (const auto& [label, coeffs] : sets) {
      const auto sweep = detuning_sweep(system, gate, coeffs, grid, kOne, opts);
      const std::string key = std::string(to_string(g)) + "/" + label;
      std::ostringstream s;
      write_sweep_csv(s, sweep);
      append_cases(csv, key, s.str(), header);
      if (c.svg) {
        run.write("_" + std::string(to_string(g)) + "_" + label + ".svg",
                  [&](std::ostream& f) { write_sweep_svg(f, sweep, key); });
      }
      json r;
      if (name == SystemName::ensemble_rei) {
        const auto inner = detuning_sweep(system, gate, coeffs, uniform_grid(-300e3, 300e3, 121),
                                          kOne, opts);
        r["mean_fidelity_300khz"] = inner.mean_fidelity(-300e3, 300e3);
        out << key << ": mean F over +-300 kHz " << pct(r["mean_fidelity_300khz"].get<double>());
      } else {
        out << key << ":";
      }
      if (system.offres_range) {
        double worst = 0.0;
        for (std::size_t i = 0; i < sweep.size(); ++i) {
          if (sweep.ok(i) && std::abs(sweep.detunings_hz[i]) >= system.offres_threshold_hz) {
            worst = std::max(worst, sweep.p_off[i]);
          }
        }
        r["max_p_off_beyond_threshold"] = worst;
        out << "  max p_off |delta| >= " << system.offres_threshold_hz / 1e6 << " MHz "
            << pct(worst);
      }
      if (threshold) {
        const auto win = robustness_window(sweep, *threshold);
        r["window_hz"] = win ? json{win->lo_hz, win->hi_hz} : json(nullptr);
        out << "  window(F >= " << *threshold << ") ";
        if (win) {
          out << "[" << win->lo_hz / 1e6 << ", " << win->hi_hz / 1e6 << "] MHz";
        } else {
          out << "empty";
        }
      }
      out << '\n';
      run.results[key] = r;
    }
  }
  run.config = {{"system", to_json(system)}, {"range_hz", {lo, hi}}, {"points", points}};
  run.write(".csv", [&](std::ostream& f) { f << csv.str(); });
}

void reproduce_fig5(Run& run, const Common& c, const ReproduceArgs& r, const GAArgs& g,
                    std::ostream& out) {
  const auto system = resolve_system(c, SystemName::ensemble_rei);
  const auto gate = gate_catalog(GateName::not_gate);
  const auto opts = eval_options(c);
  const BlochGrid grid{r.bloch_points, r.bloch_points};
  std::ostringstream csv;
  csv << "harmonics,source,bloch_average_fidelity\n" << std::setprecision(15);
  for (int k = 4; k <= 16; k += 2) {
    std::string source = k == 4 ? "table1" : "table4";
    PulseCoefficients coeffs = k == 4 ? table1_coefficients(SystemName::ensemble_rei)
                                      : table4_coefficients(k);
    if (r.reoptimize) {
      auto args = g;
      args.harmonics = k;
      const auto front = run_ga(system, gate, ga_config(args, c));
      run.seeds.push_back(args.seed);
      coeffs = PulseCoefficients(
          select_solution(front, parse_strategy(g.select.front())).alphas, system.tau);
      source = "reoptimized";
    }
    const double f = bloch_average_fidelity(system, gate, coeffs, 0.0, grid, opts);
    csv << k << ',' << source << ',' << f << '\n';
    run.results[std::to_string(k)] = f;
    out << "K=" << k << " (" << source << "): Bloch-average fidelity " << pct(f) << '\n';
  }
  run.config = {{"system", to_json(system)}, {"bloch_points", r.bloch_points},
                {"reoptimize", r.reoptimize}};
  run.write(".csv", [&](std::ostream& f) { f << csv.str(); });
}

void reproduce_fig11(Run& run, const Common& c, std::ostream& out) {
  const auto system = resolve_system(c, SystemName::transmon);
  const auto opts = eval_options(c);
  const auto eta = uniform_grid(-0.3, 0.3, 13);
  const auto delta = uniform_grid(-2e6, 2e6, 9);
  std::ostringstream csv;
  bool header = false;
  for (auto g : {GateName::not_gate, GateName::hadamard}) {
    const auto gate = gate_catalog(g);
    for (int idx = 1; idx <= 4; ++idx) {
      const auto s = sensitivity_scan(system, gate, table1_coefficients(SystemName::transmon), idx,
                                      eta, delta, opts);
      const std::string key = std::string(to_string(g)) + "/alpha" + std::to_string(idx);
      std::ostringstream part;
      write_surface_csv(part, s);
      append_cases(csv, key, part.str(), header);
      if (c.svg) {
        run.write("_" + std::string(to_string(g)) + "_alpha" + std::to_string(idx) + ".svg",
                  [&](std::ostream& f) { write_surface_svg(f, s, key); });
      }
      // Largest rise over the unperturbed row at the same detuning.
      const std::size_t mid = eta.size() / 2;
      double rise = 0.0;
      for (std::size_t i = 0; i < eta.size(); ++i) {
        for (std::size_t j = 0; j < delta.size(); ++j) {
          rise = std::max(rise, s.infidelity[i][j] - s.infidelity[mid][j]);
        }
      }
      run.results[key] = {{"max_infidelity_increase", rise}};
      out << key << ": max infidelity increase " << pct(rise) << '\n';
    }
  }
  run.config = {{"system", to_json(system)}, {"eta", eta}, {"delta_hz", delta}};
  run.write(".csv", [&](std::ostream& f) { f << csv.str(); });
}

void reproduce_table2(Run& run, const Common& c, std::ostream& out) {
  const auto opts = eval_options(c);
  std::ostringstream csv;
  csv << "system,gate,metric,value\n" << std::setprecision(15);
  for (auto name : all_systems()) {
    const auto system = resolve_system(c, name);
    const auto coeffs = table1_coefficients(name);
    for (auto g : all_gates()) {
      const auto gate = gate_catalog(g);
      std::string metric;
      double value = 0.0;
      if (name == SystemName::ensemble_rei) {
        metric = "mean_fidelity_300khz";
        value = detuning_sweep(system, gate, coeffs, uniform_grid(-300e3, 300e3, 121), kOne, opts)
                    .mean_fidelity(-300e3, 300e3);
      } else {
        metric = "fidelity_resonant";
        value = evaluate_point(system, gate, coeffs, 0.0, kOne, opts).fidelity;
      }
      csv << to_string(name) << ',' << to_string(g) << ',' << metric << ',' << value << '\n';
      run.results[std::string(to_string(name))][std::string(to_string(g))] = value;
      out << std::left << std::setw(13) << to_string(name) << std::setw(9) << to_string(g)
          << metric << ' ' << pct(value) << '\n';
    }
  }
  run.write(".csv", [&](std::ostream& f) { f << csv.str(); });
}

void reproduce_table3(Run& run, const Common& c, std::ostream& out) {
  const auto system = resolve_system(c, SystemName::ensemble_rei);
  const auto opts = eval_options(c);
  std::ostringstream csv;
  csv << "gate,mean_fidelity_300khz\n" << std::setprecision(15);
  for (auto g : all_gates()) {
    const auto v = detuning_sweep(system, gate_catalog(g), table3_coefficients(g),
                                  uniform_grid(-300e3, 300e3, 121), kOne, opts)
                       .mean_fidelity(-300e3, 300e3);
    csv << to_string(g) << ',' << v << '\n';
    run.results[std::string(to_string(g))] = v;
    out << to_string(g) << ": mean F over +-300 kHz " << pct(v) << '\n';
  }
  run.config = {{"system", to_json(system)}};
  run.write(".csv", [&](std::ostream& f) { f << csv.str(); });
}

void reproduce_table4(Run& run, const Common& c, std::ostream& out) {
  const auto system = resolve_system(c, SystemName::ensemble_rei);
  const auto gate = gate_catalog(GateName::not_gate);
  const auto opts = eval_options(c);
  std::ostringstream csv;
  csv << "harmonics,odd_residual,even_residual,mean_fidelity_300khz\n" << std::setprecision(15);
  for (int k = 6; k <= 16; k += 2) {
    const auto coeffs = table4_coefficients(k);
    const auto rep = validate_coefficients(coeffs, kPrintedTolerance);
    const double mean = detuning_sweep(system, gate, coeffs, uniform_grid(-300e3, 300e3, 121),
                                       kOne, opts)
                            .mean_fidelity(-300e3, 300e3);
    csv << k << ',' << rep.odd_residual << ',' << rep.even_residual << ',' << mean << '\n';
    run.results[std::to_string(k)] = {{"odd_residual", rep.odd_residual},
                                      {"even_residual", rep.even_residual},
                                      {"mean_fidelity_300khz", mean}};
    out << "K=" << k << ": residuals " << rep.odd_residual << ' ' << rep.even_residual
        << "  mean F over +-300 kHz " << pct(mean) << '\n';
  }
  run.write(".csv", [&](std::ostream& f) { f << csv.str(); });
}

void reproduce_bloch(Run& run, const Common& c, const ReproduceArgs& r, std::ostream& out) {
  const auto opts = eval_options(c);
  const auto gate = gate_catalog(GateName::not_gate);
  const BlochGrid grid{r.bloch_points, r.bloch_points};
  std::ostringstream csv;
  csv << "coefficients,decoherence,bloch_average_fidelity\n" << std::setprecision(15);
  for (bool lossy : {true, false}) {
    auto system = resolve_system(c, SystemName::ensemble_rei);
    if (!lossy) system.profile.gamma1 = system.profile.gamma2 = system.profile.gamma3 = 0.0;
    for (const auto& [label, coeffs] :
         {std::pair{std::string("table1"), table1_coefficients(SystemName::ensemble_rei)},
          std::pair{std::string("alternative"), alternative_coefficients()}}) {
      const double f = bloch_average_fidelity(system, gate, coeffs, 0.0, grid, opts);
      const std::string mode = lossy ? "on" : "off";
      csv << label << ',' << mode << ',' << f << '\n';
      run.results[label + "/" + mode] = f;
      out << label << ", decoherence " << mode << ": Bloch-average fidelity " << pct(f) << '\n';
    }
  }
  run.config = {{"bloch_points", r.bloch_points}};
  run.write(".csv", [&](std::ostream& f) { f << csv.str(); });
}

void reproduce_fig12(Run& run, const Common& c, const GAArgs& g, std::ostream& out) {
  Common cc = c;
  cc.system = "ensemble-rei";
  cc.gate = "not";
  cmd_optimize(cc, g, run, out);
}

int cmd_reproduce(const Common& c, const ReproduceArgs& r, const GAArgs& g, Run& run,
                  std::ostream& out) {
  const auto& t = r.target;
  if (t == "fig3") {
    reproduce_trajectories(run, c, SystemName::ensemble_rei, 170e3, out);
  } else if (t == "fig6") {
    reproduce_trajectories(run, c, SystemName::single_rei, 0.0, out);
  } else if (t == "fig9") {
    reproduce_trajectories(run, c, SystemName::transmon, 2e6, out);
  } else if (t == "fig4") {
    reproduce_sweeps(run, c, SystemName::ensemble_rei, -6e6, 6e6, 241, std::nullopt, true, out);
  } else if (t == "fig7") {
    reproduce_sweeps(run, c, SystemName::single_rei, -15e6, 15e6, 301, std::nullopt, false, out);
  } else if (t == "fig10") {
    reproduce_sweeps(run, c, SystemName::transmon, -20e6, 20e6, 401, 0.996, true, out);
  } else if (t == "fig5") {
    reproduce_fig5(run, c, r, g, out);
  } else if (t == "fig11") {
    reproduce_fig11(run, c, out);
  } else if (t == "fig12") {
    reproduce_fig12(run, c, g, out);
  } else if (t == "table2") {
    reproduce_table2(run, c, out);
  } else if (t == "table3") {
    reproduce_table3(run, c, out);
  } else if (t == "table4") {
    reproduce_table4(run, c, out);
  } else if (t == "bloch-average") {
    reproduce_bloch(run, c, r, out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// show

int cmd_show(const std::string& what, Run& run, std::ostream& out) {
  json doc = json::object();
  if (what == "presets" || what == "all") {
    for (auto s : all_systems()) doc["presets"][std::string(to_string(s))] = to_json(preset(s));
  }
  if (what == "gates" || what == "all") {
    for (auto g : all_gates()) doc["gates"][std::string(to_string(g))] = to_json(gate_catalog(g));
  }
  if (what == "coefficients" || what == "all") {
    auto& co = doc["coefficients"];
    for (auto s : all_systems()) co["table1"][std::string(to_string(s))] = to_json(table1_coefficients(s));
    for (auto g : all_gates()) co["table3"][std::string(to_string(g))] = to_json(table3_coefficients(g));
    for (int k = 6; k <= 16; k += 2) co["table4"][std::to_string(k)] = to_json(table4_coefficients(k));
    co["baseline"] = to_json(baseline_coefficients(preset(SystemName::ensemble_rei).tau));
    co["alternative"] = to_json(alternative_coefficients());
  }
  run.write(".json", [&](std::ostream& f) { f << doc.dump(2) << '\n'; });
  out << doc.dump(2) << '\n';
  return kExitOk;
}

}  // namespace

const std::vector<std::string>& reproduce_targets() {
  static const std::vector<std::string> t{"fig3",  "fig4",   "fig5",   "fig6",   "fig7",
                                          "fig9",  "fig10",  "fig11",  "fig12",  "table2",
                                          "table3", "table4", "bloch-average"};
  return t;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  try {
    args = expand_config(raw_args);
  } catch (const UsageError& e) {
    err << "holopt: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App app{"Holonomic single-qubit gate pulses for three-level systems", "holopt"};
  app.set_version_flag("--version", HOLOPT_VERSION);
  app.require_subcommand(1);

  Common common;
  SimulateArgs sim;
  SweepArgs sw;
  GAArgs ga;
  ReproduceArgs rep;
  std::string show_what = "all";

  auto* simulate = app.add_subcommand("simulate", "Time evolution of one gate");
  add_pulse_options(simulate, common);
  add_physics_options(simulate, common);
  add_output_options(simulate, common);
  add_hz(simulate, "delta", sim.delta, "Detuning");
  simulate->add_option("--initial", sim.initial, "0, 1, +, -, +i, -i or 'polar,azimuth'");
  simulate->add_flag("--full-state", sim.full_state, "Write all density-matrix entries");
  simulate->add_flag("--dump-schedule", sim.dump_schedule, "Write the pulse schedule as JSON");
  simulate->add_option("--schedule", sim.schedule_file, "Load the pulse schedule from JSON");

  auto* sweep = app.add_subcommand("sweep", "Final-time fidelity and excitation versus detuning");
  add_pulse_options(sweep, common);
  add_physics_options(sweep, common);
  add_output_options(sweep, common);
  add_hz(sweep, "lo", sw.lo, "Lowest detuning");
  add_hz(sweep, "hi", sw.hi, "Highest detuning");
  add_hz(sweep, "mean-window", sw.mean_window, "Half-width for the mean-fidelity summary");
  add_hz(sweep, "report-at", sw.report_at, "Report the largest p_off beyond this detuning");
  sweep->add_option("--points", sw.points, "Number of grid points");
  sweep->add_option("--initial", sw.initial, "0, 1, +, -, +i, -i or 'polar,azimuth'");
  sweep->add_option("--threshold", sw.threshold, "Report the robustness window at this fidelity");

  auto* optimize = app.add_subcommand("optimize", "Genetic search for envelope weights");
  optimize->add_option("--system", common.system, "ensemble-rei, single-rei or transmon");
  optimize->add_option("--gate", common.gate, "not, hadamard, sigma-y or sigma-z");
  add_physics_options(optimize, common);
  add_output_options(optimize, common);
  add_ga_options(optimize, ga);
  optimize->add_option("--select", ga.select, "Selection strategies: index=K, knee, min1, min2");

  auto* reproduce = app.add_subcommand("reproduce", "Canned figure and table data");
  reproduce->add_option("target,--target", rep.target, "Target name")
      ->required()
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  reproduce->add_flag("--reoptimize", rep.reoptimize, "fig5: rerun the search for each K");
  reproduce->add_option("--bloch-points", rep.bloch_points, "Bloch grid points per axis");
  reproduce->add_option("--sigma2", common.sigma2, "Dephasing operator override: lambda or ladder");
  reproduce->add_flag("--lossless", common.lossless, "Set all decoherence rates to zero");
  reproduce->add_option("--rtol", common.rtol, "Integrator relative tolerance");
  reproduce->add_option("--atol", common.atol, "Integrator absolute tolerance");
  reproduce->add_option("--max-step-fraction", common.max_step_fraction,
                        "Largest integrator step as a fraction of tau");
  add_output_options(reproduce, common);
  add_ga_options(reproduce, ga);
  reproduce->add_option("--select", ga.select, "fig5 --reoptimize / fig12 selection strategies");

  auto* show = app.add_subcommand("show", "Dump presets, gates and coefficient tables as JSON");
  show->add_option("what,--what", show_what, "presets, gates, coefficients or all")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  add_output_options(show, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << HOLOPT_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "holopt: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  const std::string command = sub->get_name();
  std::string stem = common.name;
  if (stem.empty()) stem = command == "reproduce" ? rep.target : command;

  try {
    if (command == "reproduce") {
      const auto& t = reproduce_targets();
      if (std::find(t.begin(), t.end(), rep.target) == t.end()) {
        std::string list;
        for (const auto& n : t) list += (list.empty() ? "" : ", ") + n;
        throw UsageError("unknown target '" + rep.target + "'; valid targets: " + list);
      }
    }
    if (command == "show" && show_what != "presets" && show_what != "gates" &&
        show_what != "coefficients" && show_what != "all") {
      throw UsageError("show expects presets, gates, coefficients or all");
    }
    Run run(command, stem, common.out_dir);
    run.options = replayable_options(sub);
    int code = kExitOk;
    if (command == "simulate") code = cmd_simulate(common, sim, run, out);
    if (command == "sweep") code = cmd_sweep(common, sw, run, out, err);
    if (command == "optimize") code = cmd_optimize(common, ga, run, out);
    if (command == "reproduce") code = cmd_reproduce(common, rep, ga, run, out);
    if (command == "show") code = cmd_show(show_what, run, out);
    run.finish();
    return code;
  } catch (const IntegrationError& e) {
    err << "holopt: integration failed at t=" << e.time() << " s: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const UsageError& e) {
    err << "holopt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "holopt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "holopt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const json::exception& e) {
    err << "holopt: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "holopt: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace holopt::cli
