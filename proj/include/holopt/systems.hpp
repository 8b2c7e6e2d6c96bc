// Platform presets, the gate catalog and the published coefficient tables.

#pragma once

#include "holopt/dynamics.hpp"
#include "holopt/pulse.hpp"
#include "holopt/quantum.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace holopt {

enum class SystemName { ensemble_rei, single_rei, transmon };
enum class GateName { not_gate, hadamard, sigma_y, sigma_z };

/// Closed detuning interval in Hz.
struct DetuningRange {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
};

struct SystemPreset {
  SystemName name = SystemName::ensemble_rei;
  double tau = 0.0;  // seconds
  DecoherenceProfile profile;
  bool compensation = false;
  /// Window averaged by the infidelity objective.
  DetuningRange robustness_range;
  /// Window averaged by the off-resonant objective (positive side; mirrored).
  std::optional<DetuningRange> offres_range;
  /// Detuning magnitude beyond which spectators are reported, Hz.
  double offres_threshold_hz = 0.0;

  void validate() const;
};

struct GateSpec {
  GateName name = GateName::not_gate;
  GateParams params;
};

SystemPreset preset(SystemName name);
GateSpec gate_catalog(GateName name);

/// Optimized NOT-gate weights for each platform, at the platform's tau.
PulseCoefficients table1_coefficients(SystemName name);
/// Per-gate optimized weights for the ensemble platform.
PulseCoefficients table3_coefficients(GateName name);
/// Ensemble weights for K = 6, 8, ..., 16 harmonics.
PulseCoefficients table4_coefficients(int harmonics);
/// Reference weights (0, -0.25, 0, 0): a plain raised-cosine envelope.
PulseCoefficients baseline_coefficients(double tau);
/// Ensemble weights tuned for fidelity at zero detuning only.
PulseCoefficients alternative_coefficients();

/// Gate pair plus (if the preset asks for it) the compensation pair.
PulseSchedule preset_schedule(const SystemPreset& system, const GateSpec& gate,
                              const PulseCoefficients& coeffs,
                              double constraint_tolerance = kPrintedTolerance,
                              const PulseCoefficients* compensation_coeffs = nullptr);

std::string_view to_string(SystemName name);
std::string_view to_string(GateName name);
std::string_view to_string(Sigma2Variant variant);
/// Accepts the CLI spellings (ensemble-rei, single-rei, transmon; not,
/// hadamard, sigma-y, sigma-z; lambda, ladder). Throws std::invalid_argument.
SystemName parse_system(std::string_view text);
GateName parse_gate(std::string_view text);
Sigma2Variant parse_sigma2(std::string_view text);

const std::vector<SystemName>& all_systems();
const std::vector<GateName>& all_gates();

nlohmann::json to_json(const SystemPreset& preset);
nlohmann::json to_json(const GateSpec& gate);
nlohmann::json to_json(const PulseCoefficients& coeffs);

}  // namespace holopt
