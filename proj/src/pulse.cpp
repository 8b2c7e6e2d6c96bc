#include "holopt/pulse.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace holopt {

namespace {

// Boundary slack when locating segments, relative to the schedule length.
constexpr double kTimeSlack = 1e-12;

void check_constraints(const PulseCoefficients& coeffs, double tolerance, const char* who) {
  if (std::isinf(tolerance)) return;
  const auto report = validate_coefficients(coeffs, tolerance);
  if (!report.passed) {
    throw std::invalid_argument(std::string(who) + ": coefficients violate endpoint constraints (odd " +
                                std::to_string(report.odd_residual) + ", even " +
                                std::to_string(report.even_residual) + ")");
  }
}

Segment make_segment(double start, const PulseCoefficients& coeffs, double theta, double phi0,
                     double phi1) {
  return Segment{start, coeffs.tau(), theta, phi0, phi1, coeffs};
}

}  // namespace

PulseCoefficients::PulseCoefficients(std::vector<double> alphas, double tau)
    : alphas_(std::move(alphas)), tau_(tau) {
  const auto k = alphas_.size();
  if (k < 2 || k > static_cast<std::size_t>(kMaxHarmonics) || k % 2 != 0) {
    throw std::invalid_argument("PulseCoefficients: harmonic count must be even in [2, 16], got " +
                                std::to_string(k));
  }
  if (!std::isfinite(tau_) || tau_ <= 0.0) {
    throw std::invalid_argument("PulseCoefficients: tau must be finite and positive");
  }
  for (double a : alphas_) {
    if (!std::isfinite(a)) throw std::invalid_argument("PulseCoefficients: non-finite weight");
  }
}

PulseCoefficients PulseCoefficients::scaled(int n, double factor) const {
  if (n < 1 || n > harmonics()) throw std::out_of_range("PulseCoefficients::scaled: bad index");
  auto copy = alphas_;
  copy[static_cast<std::size_t>(n - 1)] *= factor;
  return {std::move(copy), tau_};
}

ConstraintReport validate_coefficients(const PulseCoefficients& coeffs, double tolerance) {
  ConstraintReport r;
  r.even_residual = 0.5;
  for (int n = 1; n <= coeffs.harmonics(); ++n) {
    const double term = n * coeffs.alpha(n);
    (n % 2 == 1 ? r.odd_residual : r.even_residual) += term;
  }
  r.passed = std::abs(r.odd_residual) <= tolerance && std::abs(r.even_residual) <= tolerance;
  return r;
}

PulseCoefficients repair_coefficients(std::span<const double> free_params, int harmonics,
                                      double tau) {
  if (harmonics < 4 || harmonics % 2 != 0 || harmonics > kMaxHarmonics) {
    throw std::invalid_argument("repair_coefficients: need an even harmonic count in [4, 16]");
  }
  if (free_params.size() != static_cast<std::size_t>(harmonics - 2)) {
    throw std::invalid_argument("repair_coefficients: expected " + std::to_string(harmonics - 2) +
                                " free weights, got " + std::to_string(free_params.size()));
  }
  const int last_odd = harmonics - 1;
  const int last_even = harmonics;
  std::vector<double> alphas(static_cast<std::size_t>(harmonics), 0.0);
  double odd_sum = 0.0;
  double even_sum = 0.0;
  std::size_t next = 0;
  for (int n = 1; n <= harmonics; ++n) {
    if (n == last_odd || n == last_even) continue;
    const double a = free_params[next++];
    alphas[static_cast<std::size_t>(n - 1)] = a;
    (n % 2 == 1 ? odd_sum : even_sum) += n * a;
  }
  alphas[static_cast<std::size_t>(last_odd - 1)] = -odd_sum / last_odd;
  alphas[static_cast<std::size_t>(last_even - 1)] = (-0.5 - even_sum) / last_even;
  return {std::move(alphas), tau};
}

std::vector<double> free_parameters(const PulseCoefficients& coeffs) {
  const int k = coeffs.harmonics();
  std::vector<double> out;
  for (int n = 1; n <= k; ++n) {
    if (n == k - 1 || n == k) continue;
    out.push_back(coeffs.alpha(n));
  }
  return out;
}

double envelope(const PulseCoefficients& coeffs, double t_local) {
  const double tau = coeffs.tau();
  if (!(t_local >= -kTimeSlack * tau && t_local <= tau * (1.0 + kTimeSlack))) {
    throw std::out_of_range("envelope: local time outside [0, tau]");
  }
  const double x = kPi * t_local / tau;
  double sum = 0.5;
  for (int n = 1; n <= coeffs.harmonics(); ++n) {
    sum += coeffs.alpha(n) * n * std::cos(n * x);
  }
  return kPi * sum / tau;
}

PulseSchedule::PulseSchedule(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.size() != 2 && segments_.size() != 4) {
    throw std::invalid_argument("PulseSchedule: expected 2 or 4 segments");
  }
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const auto& s = segments_[i];
    if (s.duration != s.coefficients.tau()) {
      throw std::invalid_argument("PulseSchedule: segment duration differs from its tau");
    }
    if (i > 0) {
      const double gap = s.start - segments_[i - 1].end();
      if (std::abs(gap) > kTimeSlack * s.duration) {
        throw std::invalid_argument("PulseSchedule: segments are not contiguous");
      }
    }
    total_duration_ += s.duration;
  }
}

std::size_t PulseSchedule::segment_index(double t) const {
  const double slack = kTimeSlack * total_duration_;
  if (t < start() - slack || t > end() + slack) {
    throw std::out_of_range("PulseSchedule: time outside the schedule");
  }
  for (std::size_t i = segments_.size(); i-- > 0;) {
    if (t >= segments_[i].start - slack) return i;
  }
  return 0;
}

PulseSchedule PulseSchedule::then(const PulseSchedule& tail) const {
  auto joined = segments_;
  joined.insert(joined.end(), tail.segments_.begin(), tail.segments_.end());
  return PulseSchedule(std::move(joined));
}

PulseSchedule gate_schedule(const GateParams& gate, const PulseCoefficients& coeffs,
                            double constraint_tolerance) {
  gate.validate();
  check_constraints(coeffs, constraint_tolerance, "gate_schedule");
  const double tau = coeffs.tau();
  return PulseSchedule({
      make_segment(0.0, coeffs, gate.theta, -gate.phi, 0.0),
      make_segment(tau, coeffs, gate.theta, -gate.phi + gate.beta + kPi, gate.beta + kPi),
  });
}

PulseSchedule compensation_schedule(const GateParams& gate, const PulseCoefficients& coeffs,
                                    double constraint_tolerance) {
  gate.validate();
  check_constraints(coeffs, constraint_tolerance, "compensation_schedule");
  const double tau = coeffs.tau();
  const double theta = kPi - gate.theta;
  return PulseSchedule({
      make_segment(2.0 * tau, coeffs, theta, -(kPi + gate.phi), 0.0),
      make_segment(3.0 * tau, coeffs, theta, -gate.phi, kPi),
  });
}

PulseSchedule holonomic_schedule(const GateParams& gate, const PulseCoefficients& coeffs,
                                 bool compensate, const PulseCoefficients* compensation_coeffs,
                                 double constraint_tolerance) {
  auto schedule = gate_schedule(gate, coeffs, constraint_tolerance);
  if (!compensate) return schedule;
  const auto& comp = compensation_coeffs != nullptr ? *compensation_coeffs : coeffs;
  if (comp.tau() != coeffs.tau()) {
    throw std::invalid_argument("holonomic_schedule: compensation tau must equal gate tau");
  }
  return schedule.then(compensation_schedule(gate, comp, constraint_tolerance));
}

std::pair<Complex, Complex> rabi_pair(const PulseSchedule& schedule, double t) {
  const auto& seg = schedule.segments()[schedule.segment_index(t)];
  const double local = std::clamp(t - seg.start, 0.0, seg.duration);
  const double w = envelope(seg.coefficients, local);
  const Complex i{0.0, 1.0};
  return {2.0 * std::sin(seg.mixing_theta / 2.0) * w * std::exp(i * seg.phi0),
          -2.0 * std::cos(seg.mixing_theta / 2.0) * w * std::exp(i * seg.phi1)};
}

nlohmann::json to_json(const PulseSchedule& schedule) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : schedule.segments()) {
    segs.push_back({{"start", s.start},
                    {"duration", s.duration},
                    {"theta", s.mixing_theta},
                    {"phi0", s.phi0},
                    {"phi1", s.phi1},
                    {"alphas", std::vector<double>(s.coefficients.alphas().begin(),
                                                   s.coefficients.alphas().end())},
                    {"tau", s.coefficients.tau()}});
  }
  return {{"segments", segs}, {"total_duration", schedule.total_duration()}};
}

PulseSchedule schedule_from_json(const nlohmann::json& doc) {
  std::vector<Segment> segments;
  for (const auto& s : doc.at("segments")) {
    PulseCoefficients coeffs(s.at("alphas").get<std::vector<double>>(), s.at("tau").get<double>());
    segments.push_back(Segment{s.at("start").get<double>(), s.at("duration").get<double>(),
                               s.at("theta").get<double>(), s.at("phi0").get<double>(),
                               s.at("phi1").get<double>(), std::move(coeffs)});
  }
  return PulseSchedule(std::move(segments));
}

}  // namespace holopt
