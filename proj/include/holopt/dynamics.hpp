// Lindblad master-equation evolution of the Lambda system under a pulse schedule.

#pragma once

#include "holopt/integrator.hpp"
#include "holopt/pulse.hpp"
#include "holopt/quantum.hpp"

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace holopt {

/// Which dephasing operator sigma_2 the level structure calls for.
enum class Sigma2Variant {
  lambda_rei,       // |e><e| - |0><0| - |1><1|
  transmon_ladder,  // 2|e><e| - |0><0| - |1><1|
};

/// Channel rates in rad/s. sigma_1 = |0><e| + |1><e| is a single channel.
struct DecoherenceProfile {
  double gamma1 = 0.0;
  double gamma2 = 0.0;
  double gamma3 = 0.0;  // |0><1| channel; zero in every shipped preset
  Sigma2Variant sigma2 = Sigma2Variant::lambda_rei;

  void validate() const;
  bool lossless() const { return gamma1 == 0.0 && gamma2 == 0.0 && gamma3 == 0.0; }
};

struct IntegratorConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  /// Upper bound on the step, as a fraction of the segment duration.
  double max_step_fraction = 0.01;
  std::size_t max_steps_per_segment = 1'000'000;
  /// Record every accepted step; when false only segment boundaries are kept.
  bool record_steps = true;

  void validate() const;
};

struct Populations {
  double p0 = 0.0;
  double pe = 0.0;
  double p1 = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<Populations> populations;
  std::vector<double> fidelity;  // empty unless a target was supplied

  const DensityMatrix& final_state() const { return states.back(); }
};

/// The three jump operators sigma_1..sigma_3 in the shared basis.
std::array<Complex3x3, 3> jump_operators(Sigma2Variant variant);

/// -i[H, rho] + sum_i Gamma_i (sigma_i rho sigma_i^+ - {sigma_i^+ sigma_i, rho}/2).
/// Throws std::invalid_argument when H is not Hermitian.
Complex3x3 lindblad_rhs(const Complex3x3& rho, const Complex3x3& h,
                        const DecoherenceProfile& profile);

/// Propagates an arbitrary operator (not necessarily a state) through the
/// schedule; the Lindblad map is linear, so this also yields channel columns.
/// `delta` is the detuning in rad/s.
Complex3x3 propagate(const Complex3x3& rho0, const PulseSchedule& schedule, double delta,
                     const DecoherenceProfile& profile, const IntegratorConfig& cfg = {});

/// Evolves `rho0` across the schedule. Samples always include every segment
/// boundary. When `target` is given the fidelity series is filled too.
Trajectory evolve(const DensityMatrix& rho0, const PulseSchedule& schedule, double delta,
                  const DecoherenceProfile& profile, const IntegratorConfig& cfg = {},
                  const std::optional<PureState3>& target = std::nullopt);

/// Re <target| rho |target>, clamped to [0, 1].
double state_fidelity(const DensityMatrix& rho, const PureState3& target);

/// gate_unitary(gate) |psi_in>, embedded with zero |e> amplitude.
PureState3 target_state(const GateParams& gate, const QubitKet& psi_in);

/// CSV with columns time_s,rabi0_hz,rabi1_hz,p0,pe,p1,fidelity (Rabi magnitudes
/// divided by 2 pi) and, with `full_state`, all nine density-matrix entries.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const PulseSchedule& schedule, bool full_state);

}  // namespace holopt
