#include "holopt/systems.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <stdexcept>
#include <string>

namespace holopt {

namespace {

constexpr double kEnsembleTau = 0.75e-6;
constexpr double kSingleTau = 1e-6;
constexpr double kTransmonTau = 40e-9;

}  // namespace

void SystemPreset::validate() const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("SystemPreset: tau must be > 0");
  profile.validate();
  if (robustness_range.lo_hz > robustness_range.hi_hz) {
    throw std::invalid_argument("SystemPreset: robustness range is not ordered");
  }
  if (offres_range && (offres_range->lo_hz > offres_range->hi_hz || offres_range->lo_hz < 0.0)) {
    throw std::invalid_argument("SystemPreset: off-resonant range must be ordered and non-negative");
  }
}

SystemPreset preset(SystemName name) {
  SystemPreset p;
  p.name = name;
  switch (name) {
    case SystemName::ensemble_rei:
      p.tau = kEnsembleTau;
      p.profile = {angular(0.97e3), angular(1.21e3), 0.0, Sigma2Variant::lambda_rei};
      p.compensation = true;
      p.robustness_range = {-170e3, 170e3};
      p.offres_range = DetuningRange{3.5e6, 5e6};
      p.offres_threshold_hz = 3.5e6;
      break;
    case SystemName::single_rei:
      p.tau = kSingleTau;
      p.profile = {angular(80.0), angular(60.0), 0.0, Sigma2Variant::lambda_rei};
      p.compensation = false;
      // No inhomogeneous spread: the fidelity objective sits at resonance.
      p.robustness_range = {0.0, 0.0};
      p.offres_range = DetuningRange{8.9e6, 12e6};
      p.offres_threshold_hz = 8.9e6;
      break;
    case SystemName::transmon:
      p.tau = kTransmonTau;
      p.profile = {angular(3e3), angular(3e3), 0.0, Sigma2Variant::transmon_ladder};
      p.compensation = true;
      p.robustness_range = {-9.3e6, 9.3e6};
      p.offres_range = std::nullopt;
      p.offres_threshold_hz = 0.0;
      break;
  }
  return p;
}

GateSpec gate_catalog(GateName name) {
  switch (name) {
    case GateName::not_gate: return {name, {kPi / 2, 0.0, kPi}};
    case GateName::hadamard: return {name, {kPi / 4, 0.0, kPi}};
    case GateName::sigma_y: return {name, {kPi / 2, kPi / 2, kPi}};
    case GateName::sigma_z: return {name, {0.0, 0.0, kPi}};
  }
  throw std::invalid_argument("gate_catalog: unknown gate");
}

PulseCoefficients table1_coefficients(SystemName name) {
  switch (name) {
    case SystemName::ensemble_rei: return {{-0.6955, -0.1966, 0.2318, -0.0267}, kEnsembleTau};
    case SystemName::single_rei: return {{-0.0096, -0.1317, 0.0032, -0.0586}, kSingleTau};
    case SystemName::transmon: return {{-0.8000, -0.0365, 0.2667, -0.1068}, kTransmonTau};
  }
  throw std::invalid_argument("table1_coefficients: unknown system");
}

PulseCoefficients table3_coefficients(GateName name) {
  switch (name) {
    case GateName::not_gate: return {{-0.6955, -0.1966, 0.2318, -0.0267}, kEnsembleTau};
    case GateName::hadamard: return {{-0.7338, 0.0024, 0.2449, -0.1261}, kEnsembleTau};
    case GateName::sigma_y: return {{-0.8000, -0.0753, 0.2667, -0.0873}, kEnsembleTau};
    case GateName::sigma_z: return {{0.7261, -0.0631, -0.2420, -0.0934}, kEnsembleTau};
  }
  throw std::invalid_argument("table3_coefficients: unknown gate");
}

PulseCoefficients table4_coefficients(int harmonics) {
  switch (harmonics) {
    case 6:
      return {{0.0280, 0.1902, 0.0070, -0.7983, -0.0098, 0.3854}, kEnsembleTau};
    case 8:
      return {{0.8000, -0.0133, -0.0667, -0.0843, -0.1021, -0.0092, -0.0128, -0.0102},
              kEnsembleTau};
    case 10:
      return {{0.0417, -0.0958, -0.0051, -0.1655, 0.0270, -0.2552, 0.0013, 0.8000, -0.0190,
               -0.4515},
              kEnsembleTau};
    case 12:
      return {{-0.0156, -0.0892, 0.0133, -0.1770, 0.0107, 0.7538, -0.0042, -0.4066, -0.0206,
               0.6352, 0.0124, -0.6029},
              kEnsembleTau};
    case 14:
      return {{-0.0080, -0.2069, 0.0046, -0.0650, 0.0127, -0.0687, 0.0614, -0.0907, -0.0256,
               -0.1017, 0.0226, 0.5747, -0.0398, -0.3262},
              kEnsembleTau};
    case 16:
      return {{-0.8000, -0.0000, 0.2702, 0.0000, -0.0001, 0.0000, -0.0001, -0.0000, -0.0001,
               -0.0000, -0.0002, -0.0000, -0.0002, 0.0000, -0.0002, -0.0312},
              kEnsembleTau};
    default:
      throw std::invalid_argument("table4_coefficients: harmonic count must be 6, 8, ..., 16");
  }
}

PulseCoefficients baseline_coefficients(double tau) { return {{0.0, -0.25, 0.0, 0.0}, tau}; }

PulseCoefficients alternative_coefficients() {
  return {{-0.1547, -0.5553, 0.0516, 0.1527}, kEnsembleTau};
}

PulseSchedule preset_schedule(const SystemPreset& system, const GateSpec& gate,
                              const PulseCoefficients& coeffs, double constraint_tolerance,
                              const PulseCoefficients* compensation_coeffs) {
  const auto local = coeffs.tau() == system.tau ? coeffs : coeffs.with_tau(system.tau);
  std::optional<PulseCoefficients> comp;
  if (compensation_coeffs != nullptr) comp = compensation_coeffs->with_tau(system.tau);
  return holonomic_schedule(gate.params, local, system.compensation, comp ? &*comp : nullptr,
                            constraint_tolerance);
}

std::string_view to_string(SystemName name) {
  switch (name) {
    case SystemName::ensemble_rei: return "ensemble-rei";
    case SystemName::single_rei: return "single-rei";
    case SystemName::transmon: return "transmon";
  }
  return "?";
}

std::string_view to_string(GateName name) {
  switch (name) {
    case GateName::not_gate: return "not";
    case GateName::hadamard: return "hadamard";
    case GateName::sigma_y: return "sigma-y";
    case GateName::sigma_z: return "sigma-z";
  }
  return "?";
}

std::string_view to_string(Sigma2Variant variant) {
  return variant == Sigma2Variant::transmon_ladder ? "ladder" : "lambda";
}

SystemName parse_system(std::string_view text) {
  for (auto s : all_systems()) {
    if (to_string(s) == text) return s;
  }
  throw std::invalid_argument("unknown system '" + std::string(text) +
                              "' (expected ensemble-rei, single-rei or transmon)");
}

GateName parse_gate(std::string_view text) {
  for (auto g : all_gates()) {
    if (to_string(g) == text) return g;
  }
  throw std::invalid_argument("unknown gate '" + std::string(text) +
                              "' (expected not, hadamard, sigma-y or sigma-z)");
}

Sigma2Variant parse_sigma2(std::string_view text) {
  if (text == "lambda") return Sigma2Variant::lambda_rei;
  if (text == "ladder") return Sigma2Variant::transmon_ladder;
  throw std::invalid_argument("unknown sigma2 variant '" + std::string(text) +
                              "' (expected lambda or ladder)");
}

const std::vector<SystemName>& all_systems() {
  static const std::vector<SystemName> v{SystemName::ensemble_rei, SystemName::single_rei,
                                         SystemName::transmon};
  return v;
}

const std::vector<GateName>& all_gates() {
  static const std::vector<GateName> v{GateName::not_gate, GateName::hadamard, GateName::sigma_y,
                                       GateName::sigma_z};
  return v;
}

nlohmann::json to_json(const SystemPreset& p) {
  nlohmann::json j{
      {"name", to_string(p.name)},
      {"tau_s", p.tau},
      {"gamma1_rad_s", p.profile.gamma1},
      {"gamma2_rad_s", p.profile.gamma2},
      {"gamma3_rad_s", p.profile.gamma3},
      {"sigma2", to_string(p.profile.sigma2)},
      {"compensation", p.compensation},
      {"robustness_range_hz", {p.robustness_range.lo_hz, p.robustness_range.hi_hz}},
      {"offres_threshold_hz", p.offres_threshold_hz},
  };
  if (p.offres_range) {
    j["offres_range_hz"] = {p.offres_range->lo_hz, p.offres_range->hi_hz};
  } else {
    j["offres_range_hz"] = nullptr;
  }
  return j;
}

nlohmann::json to_json(const GateSpec& g) {
  return {{"name", to_string(g.name)},
          {"theta", g.params.theta},
          {"phi", g.params.phi},
          {"beta", g.params.beta}};
}

nlohmann::json to_json(const PulseCoefficients& c) {
  return {{"alphas", std::vector<double>(c.alphas().begin(), c.alphas().end())}, {"tau", c.tau()}};
}

}  // namespace holopt
