// Figures of merit derived from many independent evolutions: detuning sweeps,
// off-resonant excitation, Bloch-sphere averages, robustness windows and
// amplitude-error sensitivity surfaces.
//
// Every grid point is an independent evolve call. Results are gathered by
// index, so output ordering never depends on the worker count.

#pragma once

#include "holopt/dynamics.hpp"
#include "holopt/pulse.hpp"
#include "holopt/systems.hpp"

#include <iosfwd>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace holopt {

/// Knobs shared by all metric evaluations.
struct EvalOptions {
  IntegratorConfig integrator{.record_steps = false};
  /// Weights printed to four decimals miss the endpoint constraints by up to ~2e-3.
  double constraint_tolerance = kPrintedTolerance;
  /// Compensation-pair weights; defaults to the gate weights.
  std::optional<PulseCoefficients> compensation;
  unsigned workers = 0;
};

struct SweepResult {
  std::vector<double> detunings_hz;
  std::vector<double> fidelity;
  std::vector<double> p0;
  std::vector<double> pe;
  std::vector<double> p1;
  std::vector<double> p_off;  // p0 + pe at the final time
  /// Per-point integrator failure message; empty string when the point succeeded.
  std::vector<std::string> errors;

  std::string system;
  std::string gate;
  std::vector<double> alphas;
  std::optional<std::uint64_t> seed;

  std::size_t size() const { return detunings_hz.size(); }
  bool ok(std::size_t i) const { return errors[i].empty(); }
  /// Mean fidelity over the successful points with |delta| inside [lo, hi].
  double mean_fidelity(double lo_hz, double hi_hz) const;
};

struct DetuningInterval {
  double lo_hz = 0.0;
  double hi_hz = 0.0;
  double width() const { return hi_hz - lo_hz; }
};

struct SensitivitySurface {
  std::vector<double> eta_grid;
  std::vector<double> delta_grid_hz;
  /// infidelity[i][j] for eta_grid[i], delta_grid_hz[j].
  std::vector<std::vector<double>> infidelity;
  int perturbed_index = 1;  // 1-based weight index
};

/// `count` evenly spaced points over [lo, hi] (both ends included).
std::vector<double> uniform_grid(double lo, double hi, std::size_t count);

/// Final-time quantities for one detuning, starting from |psi_in>.
struct PointResult {
  double fidelity = 0.0;
  Populations populations;
};
PointResult evaluate_point(const SystemPreset& system, const GateSpec& gate,
                           const PulseCoefficients& coeffs, double delta_hz,
                           const QubitKet& psi_in, const EvalOptions& options = {});

SweepResult detuning_sweep(const SystemPreset& system, const GateSpec& gate,
                           const PulseCoefficients& coeffs, const std::vector<double>& grid_hz,
                           const QubitKet& psi_in, const EvalOptions& options = {});

/// P0 + Pe at the final time, starting from |1>.
double off_resonant_excitation(const SystemPreset& system, const GateSpec& gate,
                               const PulseCoefficients& coeffs, double delta_hz,
                               const EvalOptions& options = {});

/// Largest off-resonant excitation over |delta| in [lo, hi] (both signs).
double max_off_resonant_excitation(const SystemPreset& system, const GateSpec& gate,
                                   const PulseCoefficients& coeffs, DetuningRange range,
                                   std::size_t points_per_side, const EvalOptions& options = {});

/// Initial states cos(a/2)|0> + e^{i b} sin(a/2)|1>, a uniform over [0, pi]
/// (endpoints included), b uniform over [0, 2 pi) (end excluded).
struct BlochGrid {
  std::size_t polar = 51;
  std::size_t azimuthal = 51;
};
std::vector<QubitKet> bloch_grid_states(const BlochGrid& grid);

double bloch_average_fidelity(const SystemPreset& system, const GateSpec& gate,
                              const PulseCoefficients& coeffs, double delta_hz,
                              const BlochGrid& grid = {}, const EvalOptions& options = {});

/// Maximal interval containing zero detuning on which fidelity >= threshold,
/// with linear interpolation at the crossings. Empty when F(0) < threshold.
std::optional<DetuningInterval> robustness_window(const SweepResult& sweep, double threshold);

/// Scales weight `index` (1-based) by (1 + eta) without restoring the endpoint
/// constraints and records 1 - F over the (eta, delta) grid, starting from |1>.
SensitivitySurface sensitivity_scan(const SystemPreset& system, const GateSpec& gate,
                                    const PulseCoefficients& base, int index,
                                    const std::vector<double>& eta_grid,
                                    const std::vector<double>& delta_grid_hz,
                                    const EvalOptions& options = {});

/// delta_hz,fidelity,p0,pe,p1,p_off (failed points leave numeric fields empty).
void write_sweep_csv(std::ostream& out, const SweepResult& sweep);
/// Long form: eta,delta_hz,infidelity.
void write_surface_csv(std::ostream& out, const SensitivitySurface& surface);
/// Standalone SVG line plot of fidelity and p_off against detuning.
void write_sweep_svg(std::ostream& out, const SweepResult& sweep, const std::string& title);
/// Standalone SVG heat map of the infidelity surface.
void write_surface_svg(std::ostream& out, const SensitivitySurface& surface,
                       const std::string& title);

}  // namespace holopt
