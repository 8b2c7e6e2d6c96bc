#include "holopt/optimizer.hpp"

#include "holopt/hash.hpp"
#include "holopt/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace holopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightBound = 0.8;
const QubitKet kKetOne{0.0, 1.0};

std::vector<double> objective_grid(double lo, double hi, std::size_t n) {
  return lo == hi ? std::vector<double>{lo} : uniform_grid(lo, hi, n);
}

// Mean of `values` or nullopt if any point failed.
std::optional<double> mean_if_ok(const SweepResult& sweep, const std::vector<double>& values,
                                 bool complement) {
  double sum = 0.0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (!sweep.ok(i)) {
      std::clog << "holopt: warning: objective point at " << sweep.detunings_hz[i]
                << " Hz failed: " << sweep.errors[i] << '\n';
      return std::nullopt;
    }
    sum += complement ? std::max(0.0, 1.0 - values[i]) : values[i];
  }
  return sum / static_cast<double>(sweep.size());
}

bool better(const Individual& a, const Individual& b) {
  if (a.rank != b.rank) return a.rank < b.rank;
  return a.crowding > b.crowding;
}

// Assigns rank and crowding to every member.
void annotate(std::vector<Individual>& pop) {
  std::vector<Objectives> objs;
  objs.reserve(pop.size());
  for (const auto& ind : pop) objs.push_back(ind.objectives);
  const auto fronts = pareto_rank(objs);
  for (std::size_t r = 0; r < fronts.size(); ++r) {
    const auto cd = crowding_distance(objs, fronts[r]);
    for (std::size_t k = 0; k < fronts[r].size(); ++k) {
      pop[fronts[r][k]].rank = r;
      pop[fronts[r][k]].crowding = cd[k];
    }
  }
}

// Stable ordering by (rank, -crowding); ties keep population order.
std::vector<std::size_t> ordering(const std::vector<Individual>& pop) {
  std::vector<std::size_t> idx(pop.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return better(pop[a], pop[b]); });
  return idx;
}

GenerationStats stats_of(const std::vector<Individual>& pop, std::size_t generation) {
  GenerationStats s;
  s.generation = generation;
  for (const auto& ind : pop) {
    s.best_infidelity = std::min(s.best_infidelity, ind.objectives.infidelity);
    s.best_offres = std::min(s.best_offres, ind.objectives.offres);
    if (ind.rank == 0) ++s.front_size;
  }
  return s;
}

}  // namespace

Objectives evaluate_objectives(const PulseCoefficients& coeffs, const SystemPreset& system,
                               const GateSpec& gate, const ObjectiveOptions& options) {
  if (options.grids.infidelity_points == 0 || options.grids.offres_points == 0) {
    throw std::invalid_argument("evaluate_objectives: grid sizes must be positive");
  }
  Objectives out;
  const auto& r = system.robustness_range;
  const auto fid_grid = objective_grid(r.lo_hz, r.hi_hz, options.grids.infidelity_points);
  const auto fid = detuning_sweep(system, gate, coeffs, fid_grid, kKetOne, options.eval);
  out.infidelity = mean_if_ok(fid, fid.fidelity, true).value_or(1.0);

  if (!system.offres_range) {
    out.offres = 0.0;
    return out;
  }
  auto off_grid = objective_grid(system.offres_range->lo_hz, system.offres_range->hi_hz,
                                 options.grids.offres_points);
  const std::size_t n = off_grid.size();
  for (std::size_t i = 0; i < n; ++i) off_grid.push_back(-off_grid[i]);
  const auto off = detuning_sweep(system, gate, coeffs, off_grid, kKetOne, options.eval);
  out.offres = mean_if_ok(off, off.p_off, false).value_or(1.0);
  return out;
}

bool dominates(const Objectives& a, const Objectives& b) {
  return a.infidelity <= b.infidelity && a.offres <= b.offres &&
         (a.infidelity < b.infidelity || a.offres < b.offres);
}

std::vector<std::vector<std::size_t>> pareto_rank(const std::vector<Objectives>& population) {
  const std::size_t n = population.size();
  std::vector<std::vector<std::size_t>> dominated(n);
  std::vector<std::size_t> count(n, 0);
  std::vector<std::vector<std::size_t>> fronts;
  std::vector<std::size_t> current;
  for (std::size_t p = 0; p < n; ++p) {
    for (std::size_t q = 0; q < n; ++q) {
      if (p == q) continue;
      if (dominates(population[p], population[q])) {
        dominated[p].push_back(q);
      } else if (dominates(population[q], population[p])) {
        ++count[p];
      }
    }
    if (count[p] == 0) current.push_back(p);
  }
  while (!current.empty()) {
    std::vector<std::size_t> next;
    for (std::size_t p : current) {
      for (std::size_t q : dominated[p]) {
        if (--count[q] == 0) next.push_back(q);
      }
    }
    std::sort(next.begin(), next.end());
    fronts.push_back(std::move(current));
    current = std::move(next);
  }
  return fronts;
}

std::vector<double> crowding_distance(const std::vector<Objectives>& population,
                                      const std::vector<std::size_t>& front) {
  const std::size_t m = front.size();
  if (m == 0) throw std::invalid_argument("crowding_distance: empty front");
  std::vector<double> dist(m, 0.0);
  if (m <= 2) return std::vector<double>(m, kInf);
  for (int obj = 0; obj < 2; ++obj) {
    auto value = [&](std::size_t k) {
      const auto& o = population[front[k]];
      return obj == 0 ? o.infidelity : o.offres;
    };
    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return value(a) < value(b); });
    const double range = value(order.back()) - value(order.front());
    if (range <= 0.0) continue;
    dist[order.front()] = kInf;
    dist[order.back()] = kInf;
    for (std::size_t k = 1; k + 1 < m; ++k) {
      dist[order[k]] += (value(order[k + 1]) - value(order[k - 1])) / range;
    }
  }
  return dist;
}

void GAConfig::validate() const {
  if (population_size < 2) throw std::invalid_argument("GAConfig: population size must be >= 2");
  if (generations < 1) throw std::invalid_argument("GAConfig: generations must be >= 1");
  if (!(param_lo < param_hi)) throw std::invalid_argument("GAConfig: empty parameter range");
  if (harmonics < 4 || harmonics > kMaxHarmonics || harmonics % 2 != 0) {
    throw std::invalid_argument("GAConfig: harmonics must be even in [4, 16]");
  }
  auto unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!unit(crossover_rate)) throw std::invalid_argument("GAConfig: crossover rate outside [0, 1]");
  if (!unit(effective_mutation_rate())) {
    throw std::invalid_argument("GAConfig: mutation rate outside [0, 1]");
  }
  if (!(effective_mutation_scale() >= 0.0)) {
    throw std::invalid_argument("GAConfig: mutation scale must be >= 0");
  }
  if (!(elite_fraction > 0.0 && elite_fraction <= 1.0)) {
    throw std::invalid_argument("GAConfig: elite fraction outside (0, 1]");
  }
  if (!(blend_alpha >= 0.0)) throw std::invalid_argument("GAConfig: blend alpha must be >= 0");
  if (grids.infidelity_points == 0 || grids.offres_points == 0) {
    throw std::invalid_argument("GAConfig: grid sizes must be positive");
  }
  if (profile) profile->validate();
}

double GAConfig::effective_mutation_rate() const {
  return mutation_rate < 0.0 ? 1.0 / static_cast<double>(harmonics - 2) : mutation_rate;
}

double GAConfig::effective_mutation_scale() const {
  return mutation_scale < 0.0 ? 0.1 * (param_hi - param_lo) : mutation_scale;
}

ParetoFront run_ga(const SystemPreset& system_in, const GateSpec& gate, const GAConfig& config) {
  config.validate();
  SystemPreset system = system_in;
  if (config.profile) system.profile = *config.profile;
  system.validate();

  const std::size_t n = config.population_size;
  const std::size_t genes = static_cast<std::size_t>(config.harmonics - 2);
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  ObjectiveOptions obj_opts{config.grids, config.eval};
  obj_opts.eval.workers = 1;  // parallelism is across individuals

  auto evaluate = [&](std::vector<Individual>& batch) {
    const auto results = parallel_map(
        batch.size(),
        [&](std::size_t i) {
          const auto& ind = batch[i];
          if (std::any_of(ind.alphas.begin(), ind.alphas.end(),
                          [](double a) { return std::abs(a) > kWeightBound + 1e-12; })) {
            return Objectives{1.0, 1.0};
          }
          const PulseCoefficients c(ind.alphas, system.tau);
          return evaluate_objectives(c, system, gate, obj_opts);
        },
        config.eval.workers);
    for (std::size_t i = 0; i < batch.size(); ++i) batch[i].objectives = results[i];
  };

  auto make = [&](std::vector<double> free) {
    Individual ind;
    const auto c = repair_coefficients(free, config.harmonics, system.tau);
    ind.alphas.assign(c.alphas().begin(), c.alphas().end());
    ind.free_params = std::move(free);
    return ind;
  };

  std::vector<Individual> pop;
  pop.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> free(genes);
    for (auto& g : free) g = config.param_lo + (config.param_hi - config.param_lo) * unit(rng);
    pop.push_back(make(std::move(free)));
  }
  evaluate(pop);
  annotate(pop);

  ParetoFront result;
  result.history.push_back(stats_of(pop, 0));

  const double rate = config.effective_mutation_rate();
  const double scale = config.effective_mutation_scale();
  auto clamp = [&](double v) { return std::clamp(v, config.param_lo, config.param_hi); };
  auto tournament = [&]() -> const Individual& {
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    const auto& a = pop[pick(rng)];
    const auto& b = pop[pick(rng)];
    return better(b, a) ? b : a;
  };

  for (std::size_t gen = 1; gen <= config.generations; ++gen) {
    std::vector<Individual> offspring;
    offspring.reserve(n + 1);
    while (offspring.size() < n) {
      auto c1 = tournament().free_params;
      auto c2 = tournament().free_params;
      if (unit(rng) < config.crossover_rate) {
        for (std::size_t g = 0; g < genes; ++g) {
          const double lo = std::min(c1[g], c2[g]), hi = std::max(c1[g], c2[g]);
          const double ext = config.blend_alpha * (hi - lo);
          const double u1 = unit(rng), u2 = unit(rng);
          c1[g] = (lo - ext) + u1 * (hi - lo + 2 * ext);
          c2[g] = (lo - ext) + u2 * (hi - lo + 2 * ext);
        }
      }
      for (auto* c : {&c1, &c2}) {
        for (auto& g : *c) {
          if (unit(rng) < rate) g += scale * gauss(rng);
          g = clamp(g);
        }
      }
      offspring.push_back(make(std::move(c1)));
      if (offspring.size() < n) offspring.push_back(make(std::move(c2)));
    }
    evaluate(offspring);

    std::vector<Individual> merged = std::move(pop);
    merged.insert(merged.end(), std::make_move_iterator(offspring.begin()),
                  std::make_move_iterator(offspring.end()));
    annotate(merged);
    const auto order = ordering(merged);
    pop.clear();
    for (std::size_t k = 0; k < n; ++k) pop.push_back(merged[order[k]]);
    // Re-rank within the survivors so tournament keys refer to this population.
    annotate(pop);
    result.history.push_back(stats_of(pop, gen));
  }

  const auto order = ordering(pop);
  const auto top_count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(config.elite_fraction * static_cast<double>(n))));
  for (std::size_t k = 0; k < top_count; ++k) result.top.push_back(pop[order[k]]);

  for (const auto& ind : pop) {
    if (ind.rank != 0) continue;
    const bool dup = std::any_of(result.front.begin(), result.front.end(), [&](const Individual& o) {
      return o.free_params == ind.free_params ||
             (o.objectives.infidelity == ind.objectives.infidelity &&
              o.objectives.offres == ind.objectives.offres);
    });
    if (!dup) result.front.push_back(ind);
  }
  std::stable_sort(result.front.begin(), result.front.end(),
                   [](const Individual& a, const Individual& b) {
                     if (a.objectives.infidelity != b.objectives.infidelity) {
                       return a.objectives.infidelity < b.objectives.infidelity;
                     }
                     return a.objectives.offres < b.objectives.offres;
                   });

  result.config = config;
  result.system = system.name;
  result.gate = gate.name;
  result.tau = system.tau;
  nlohmann::json id{{"config", to_json(config)}, {"system", to_string(system.name)},
                    {"gate", to_string(gate.name)}};
  for (const auto& ind : result.front) id["front"].push_back(to_json(ind));
  result.run_id = sha256_hex(id.dump()).substr(0, 12);
  return result;
}

SelectionStrategy parse_strategy(std::string_view text) {
  SelectionStrategy s;
  if (text == "knee") {
    s.kind = SelectionStrategy::Kind::knee;
  } else if (text == "min1") {
    s.kind = SelectionStrategy::Kind::min_infidelity;
  } else if (text == "min2") {
    s.kind = SelectionStrategy::Kind::min_offres;
  } else if (text.starts_with("index=")) {
    const auto digits = text.substr(6);
    std::size_t k = 0;
    const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || digits.empty()) {
      throw std::invalid_argument("bad selection index in '" + std::string(text) + "'");
    }
    s.kind = SelectionStrategy::Kind::index;
    s.index = k;
  } else {
    throw std::invalid_argument("unknown selection strategy '" + std::string(text) +
                                "' (expected index=K, knee, min1 or min2)");
  }
  return s;
}

std::string to_string(const SelectionStrategy& s) {
  switch (s.kind) {
    case SelectionStrategy::Kind::index: return "index=" + std::to_string(s.index);
    case SelectionStrategy::Kind::knee: return "knee";
    case SelectionStrategy::Kind::min_infidelity: return "min1";
    case SelectionStrategy::Kind::min_offres: return "min2";
  }
  return "?";
}

const Individual& select_solution(const ParetoFront& pf, const SelectionStrategy& strategy) {
  const auto& f = pf.front;
  if (f.empty()) throw std::invalid_argument("select_solution: empty front");
  switch (strategy.kind) {
    case SelectionStrategy::Kind::index:
      if (strategy.index >= f.size()) {
        throw std::out_of_range("select_solution: index " + std::to_string(strategy.index) +
                                " outside front of size " + std::to_string(f.size()));
      }
      return f[strategy.index];
    case SelectionStrategy::Kind::min_infidelity:
      return f.front();
    case SelectionStrategy::Kind::min_offres:
      return *std::min_element(f.begin(), f.end(), [](const Individual& a, const Individual& b) {
        return a.objectives.offres < b.objectives.offres;
      });
    case SelectionStrategy::Kind::knee: break;
  }
  if (f.size() <= 2) return f.front();
  const auto& a = f.front().objectives;
  const auto& b = f.back().objectives;
  const double sx = b.infidelity - a.infidelity;
  const double sy = a.offres - b.offres;
  auto nx = [&](const Objectives& o) { return sx > 0 ? (o.infidelity - a.infidelity) / sx : 0.0; };
  auto ny = [&](const Objectives& o) { return sy > 0 ? (o.offres - b.offres) / sy : 0.0; };
  // Chord from (0, 1) to (1, 0) in scaled coordinates; points below it are knees.
  std::size_t best = 0;
  double best_d = -kInf;
  for (std::size_t k = 0; k < f.size(); ++k) {
    const double d = (1.0 - nx(f[k].objectives) - ny(f[k].objectives)) / std::sqrt(2.0);
    if (d > best_d) {
      best_d = d;
      best = k;
    }
  }
  return f[best];
}

void write_front_csv(std::ostream& out, const ParetoFront& pf) {
  const std::size_t genes = static_cast<std::size_t>(pf.config.harmonics - 2);
  const std::size_t k = static_cast<std::size_t>(pf.config.harmonics);
  out << "index,set";
  for (std::size_t g = 1; g <= genes; ++g) out << ",free_" << g;
  for (std::size_t a = 1; a <= k; ++a) out << ",alpha_" << a;
  out << ",infidelity,offres\n" << std::setprecision(15);
  auto rows = [&](const std::vector<Individual>& set, const char* name) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      out << i << ',' << name;
      for (double v : set[i].free_params) out << ',' << v;
      for (double v : set[i].alphas) out << ',' << v;
      out << ',' << set[i].objectives.infidelity << ',' << set[i].objectives.offres << '\n';
    }
  };
  rows(pf.front, "front");
  rows(pf.top, "top");
}

nlohmann::json to_json(const GAConfig& c) {
  nlohmann::json j{
      {"population_size", c.population_size},
      {"generations", c.generations},
      {"param_range", {c.param_lo, c.param_hi}},
      {"crossover_rate", c.crossover_rate},
      {"mutation_rate", c.effective_mutation_rate()},
      {"mutation_scale", c.effective_mutation_scale()},
      {"blend_alpha", c.blend_alpha},
      {"elite_fraction", c.elite_fraction},
      {"seed", c.seed},
      {"harmonics", c.harmonics},
      {"grids", {{"infidelity_points", c.grids.infidelity_points},
                 {"offres_points", c.grids.offres_points}}},
      {"integrator", {{"rel_tol", c.eval.integrator.rel_tol},
                      {"abs_tol", c.eval.integrator.abs_tol},
                      {"max_step_fraction", c.eval.integrator.max_step_fraction}}},
  };
  if (c.profile) {
    j["profile"] = {{"gamma1_rad_s", c.profile->gamma1},
                    {"gamma2_rad_s", c.profile->gamma2},
                    {"gamma3_rad_s", c.profile->gamma3},
                    {"sigma2", to_string(c.profile->sigma2)}};
  } else {
    j["profile"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const Individual& ind) {
  return {{"free_params", ind.free_params},
          {"alphas", ind.alphas},
          {"infidelity", ind.objectives.infidelity},
          {"offres", ind.objectives.offres},
          {"rank", ind.rank},
          {"crowding", std::isfinite(ind.crowding) ? nlohmann::json(ind.crowding)
                                                   : nlohmann::json("inf")}};
}

nlohmann::json to_json(const ParetoFront& pf) {
  nlohmann::json j{{"run_id", pf.run_id},
                   {"system", to_string(pf.system)},
                   {"gate", to_string(pf.gate)},
                   {"tau_s", pf.tau},
                   {"config", to_json(pf.config)},
                   {"front", nlohmann::json::array()},
                   {"top", nlohmann::json::array()},
                   {"history", nlohmann::json::array()}};
  for (const auto& ind : pf.front) j["front"].push_back(to_json(ind));
  for (const auto& ind : pf.top) j["top"].push_back(to_json(ind));
  for (const auto& h : pf.history) {
    j["history"].push_back({{"generation", h.generation},
                            {"best_infidelity", h.best_infidelity},
                            {"best_offres", h.best_offres},
                            {"front_size", h.front_size}});
  }
  return j;
}

}  // namespace holopt
