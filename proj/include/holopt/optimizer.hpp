// Two-objective genetic search over envelope weights.
//
// Chromosomes hold the K-2 free weights; the remaining two are filled by
// repair_coefficients, so every candidate meets the endpoint constraints
// exactly. Ranking is by Pareto front, ties broken by crowding distance.

#pragma once

#include "holopt/metrics.hpp"
#include "holopt/pulse.hpp"
#include "holopt/systems.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holopt {

/// Grid sizes for the two objectives.
struct ObjectiveGrids {
  std::size_t infidelity_points = 21;  // over the preset's robustness range
  std::size_t offres_points = 16;      // per side over the off-resonant range

  static ObjectiveGrids fast() { return {5, 4}; }
};

struct Objectives {
  double infidelity = 1.0;  // mean 1 - F
  double offres = 1.0;      // mean P0 + Pe
};

/// Options bound to a single objective evaluation.
struct ObjectiveOptions {
  ObjectiveGrids grids;
  EvalOptions eval;
};

/// Objective 1 starts from |1> over the robustness range; objective 2 averages
/// both signs of the off-resonant range and is 0 for presets without one.
/// Integrator failures give the failing objective its worst value, 1.
Objectives evaluate_objectives(const PulseCoefficients& coeffs, const SystemPreset& system,
                               const GateSpec& gate, const ObjectiveOptions& options = {});

/// a <= b in both objectives and strictly better in at least one.
bool dominates(const Objectives& a, const Objectives& b);

/// Fast non-dominated sort. Each front lists indices into `population` in
/// ascending order.
std::vector<std::vector<std::size_t>> pareto_rank(const std::vector<Objectives>& population);

/// Crowding distance for each member of `front` (indices into `population`),
/// in the same order as `front`.
std::vector<double> crowding_distance(const std::vector<Objectives>& population,
                                      const std::vector<std::size_t>& front);

struct GAConfig {
  std::size_t population_size = 50;
  std::size_t generations = 300;
  double param_lo = -0.8;
  double param_hi = 0.8;
  double crossover_rate = 0.9;
  /// Per-gene probability; negative means 1 / (K - 2).
  double mutation_rate = -1.0;
  /// Gaussian sigma; negative means 0.1 of the parameter range.
  double mutation_scale = -1.0;
  double blend_alpha = 0.5;
  double elite_fraction = 0.3;
  std::uint64_t seed = 1;
  int harmonics = 4;
  ObjectiveGrids grids;
  /// Overrides the preset's decoherence rates when set.
  std::optional<DecoherenceProfile> profile;
  EvalOptions eval;

  void validate() const;
  double effective_mutation_rate() const;
  double effective_mutation_scale() const;
};

struct Individual {
  std::vector<double> free_params;
  std::vector<double> alphas;  // repaired, length K
  Objectives objectives;
  std::size_t rank = 0;
  double crowding = 0.0;
};

struct GenerationStats {
  std::size_t generation = 0;
  double best_infidelity = 1.0;
  double best_offres = 1.0;
  std::size_t front_size = 0;
};

struct ParetoFront {
  /// Non-dominated members of the final population, ascending by objective 1,
  /// duplicates removed.
  std::vector<Individual> front;
  /// Best elite_fraction of the final population by (rank, crowding).
  std::vector<Individual> top;
  std::vector<GenerationStats> history;
  GAConfig config;
  SystemName system = SystemName::ensemble_rei;
  GateName gate = GateName::not_gate;
  double tau = 0.0;
  std::string run_id;
};

/// Evaluates all individuals of a generation concurrently; results are
/// independent of the worker count.
ParetoFront run_ga(const SystemPreset& system, const GateSpec& gate, const GAConfig& config);

struct SelectionStrategy {
  enum class Kind { index, knee, min_infidelity, min_offres };
  Kind kind = Kind::knee;
  std::size_t index = 0;
};

/// "index=K", "knee", "min1" or "min2".
SelectionStrategy parse_strategy(std::string_view text);
std::string to_string(const SelectionStrategy& strategy);

/// Knee uses the largest distance to the chord between the two extreme
/// points, with both objectives scaled to [0, 1] over the front.
const Individual& select_solution(const ParetoFront& front, const SelectionStrategy& strategy);

/// index,set,free_1..free_{K-2},alpha_1..alpha_K,infidelity,offres
void write_front_csv(std::ostream& out, const ParetoFront& front);

nlohmann::json to_json(const GAConfig& config);
nlohmann::json to_json(const Individual& individual);
nlohmann::json to_json(const ParetoFront& front);

}  // namespace holopt
