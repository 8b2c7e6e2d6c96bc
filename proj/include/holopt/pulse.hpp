// Harmonic pulse envelopes and the segment schedules built from them.
//
// A segment of duration tau carries the envelope
//
//   W(s) = 0.5 pi / tau + sum_n a_n (n pi / tau) cos(n pi s / tau),   0 <= s <= tau
//
// in segment-local time s. The cosine terms integrate to zero over [0, tau],
// so every segment has area pi/2 whatever the weights are.

#pragma once

#include "holopt/quantum.hpp"

#include <nlohmann/json_fwd.hpp>

#include <limits>
#include <span>
#include <utility>
#include <vector>

namespace holopt {

/// Endpoint-nulling tolerance on the odd/even weight sums.
inline constexpr double kConstraintTolerance = 1e-3;
/// Tolerance for weights printed to four decimals in published tables.
inline constexpr double kPrintedTolerance = 2.5e-3;
/// Disables the constraint check (amplitude-error studies).
inline constexpr double kNoConstraintCheck = std::numeric_limits<double>::infinity();
inline constexpr int kMaxHarmonics = 16;

/// Harmonic weights a_1..a_K and the segment duration tau (seconds).
class PulseCoefficients {
 public:
  /// K must be even, 2 <= K <= 16; tau finite and > 0.
  PulseCoefficients(std::vector<double> alphas, double tau);

  std::span<const double> alphas() const { return alphas_; }
  /// 1-based weight a_n.
  double alpha(int n) const { return alphas_.at(static_cast<std::size_t>(n - 1)); }
  int harmonics() const { return static_cast<int>(alphas_.size()); }
  double tau() const { return tau_; }

  PulseCoefficients with_tau(double tau) const { return {alphas_, tau}; }
  /// Copy with a_n multiplied by `factor`; other weights unchanged.
  PulseCoefficients scaled(int n, double factor) const;

  friend bool operator==(const PulseCoefficients&, const PulseCoefficients&) = default;

 private:
  std::vector<double> alphas_;
  double tau_;
};

struct ConstraintReport {
  double odd_residual = 0.0;   // sum_k (2k-1) a_{2k-1}
  double even_residual = 0.0;  // sum_k (2k) a_{2k} + 0.5
  bool passed = false;
};

ConstraintReport validate_coefficients(const PulseCoefficients& coeffs,
                                       double tolerance = kConstraintTolerance);

/// Fills the last odd and last even weight so both endpoint constraints hold
/// exactly. `free_params` lists the other K-2 weights in index order.
PulseCoefficients repair_coefficients(std::span<const double> free_params, int harmonics,
                                      double tau);

/// The K-2 weights repair_coefficients treats as free, in index order.
std::vector<double> free_parameters(const PulseCoefficients& coeffs);

/// Envelope in rad/s at segment-local time `t_local` in [0, tau].
double envelope(const PulseCoefficients& coeffs, double t_local);

struct Segment {
  double start = 0.0;
  double duration = 0.0;
  double mixing_theta = 0.0;
  double phi0 = 0.0;
  double phi1 = 0.0;
  PulseCoefficients coefficients;

  double end() const { return start + duration; }
};

/// Contiguous pulse segments. Two segments for a bare gate, four when the
/// compensation pair follows it; a lone compensation pair is also accepted.
class PulseSchedule {
 public:
  explicit PulseSchedule(std::vector<Segment> segments);

  const std::vector<Segment>& segments() const { return segments_; }
  double start() const { return segments_.front().start; }
  double end() const { return segments_.back().end(); }
  double total_duration() const { return total_duration_; }

  /// Index of the segment active at time `t`; a boundary belongs to the later segment.
  std::size_t segment_index(double t) const;

  /// Appends `tail`, which must start where this schedule ends.
  PulseSchedule then(const PulseSchedule& tail) const;

 private:
  std::vector<Segment> segments_;
  double total_duration_ = 0.0;
};

/// Two segments over [0, tau] and [tau, 2 tau] realizing `gate`.
PulseSchedule gate_schedule(const GateParams& gate, const PulseCoefficients& coeffs,
                            double constraint_tolerance = kConstraintTolerance);

/// Compensation pair over [2 tau, 4 tau] cycling the gate's dark state.
PulseSchedule compensation_schedule(const GateParams& gate, const PulseCoefficients& coeffs,
                                    double constraint_tolerance = kConstraintTolerance);

/// Gate pair, optionally followed by the compensation pair. The compensation
/// weights default to the gate weights.
PulseSchedule holonomic_schedule(const GateParams& gate, const PulseCoefficients& coeffs,
                                 bool compensate,
                                 const PulseCoefficients* compensation_coeffs = nullptr,
                                 double constraint_tolerance = kConstraintTolerance);

/// (W0, W1) in rad/s at time `t` of the schedule.
std::pair<Complex, Complex> rabi_pair(const PulseSchedule& schedule, double t);

nlohmann::json to_json(const PulseSchedule& schedule);
PulseSchedule schedule_from_json(const nlohmann::json& doc);

}  // namespace holopt
