#include "holopt/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace holopt {

namespace {

struct Channel {
  double rate;  // already multiplied by the time unit
  Complex3x3 jump;
  Complex3x3 jump_adj;
  Complex3x3 half_number;  // sigma^+ sigma / 2
};

/// Lindblad generator for one segment in units of the segment duration.
class SegmentGenerator {
 public:
  SegmentGenerator(const Segment& seg, double delta, const DecoherenceProfile& profile)
      : seg_(seg), unit_(seg.duration), delta_(delta) {
    const Complex i{0.0, 1.0};
    drive0_ = 2.0 * std::sin(seg.mixing_theta / 2.0) * std::exp(i * seg.phi0);
    drive1_ = -2.0 * std::cos(seg.mixing_theta / 2.0) * std::exp(i * seg.phi1);
    const auto ops = jump_operators(profile.sigma2);
    const double rates[3] = {profile.gamma1, profile.gamma2, profile.gamma3};
    for (int k = 0; k < 3; ++k) {
      if (rates[k] == 0.0) continue;
      const Complex3x3 adj = ops[k].adjoint();
      channels_.push_back({rates[k] * unit_, ops[k], adj, 0.5 * (adj * ops[k])});
    }
  }

  /// d rho / ds with s = local time / duration in [0, 1].
  Complex3x3 operator()(double s, const Complex3x3& rho) const {
    const double w = envelope(seg_.coefficients, std::clamp(s, 0.0, 1.0) * unit_) * unit_;
    const Complex3x3 h = hamiltonian(drive0_ * w, drive1_ * w, delta_ * unit_);
    const Complex3x3 hr = h * rho;
    // -i[H, rho] = -i (H rho - (H rho)^+) for Hermitian H and rho
    Complex3x3 out = Complex(0.0, -1.0) * (hr - rho * h);
    for (const auto& c : channels_) {
      out += c.rate * (c.jump * rho * c.jump_adj - c.half_number * rho - rho * c.half_number);
    }
    return out;
  }

 private:
  const Segment& seg_;
  double unit_;
  double delta_;
  Complex drive0_;
  Complex drive1_;
  std::vector<Channel> channels_;
};

StepControl step_control(const IntegratorConfig& cfg) {
  return StepControl{cfg.rel_tol, cfg.abs_tol, cfg.max_step_fraction, cfg.max_steps_per_segment};
}

/// Runs every segment in turn, restarting the stepper at each boundary.
template <class Observer>
Complex3x3 run_schedule(const Complex3x3& rho0, const PulseSchedule& schedule, double delta,
                        const DecoherenceProfile& profile, const IntegratorConfig& cfg,
                        Observer&& observer) {
  profile.validate();
  cfg.validate();
  if (!std::isfinite(delta)) throw std::invalid_argument("evolve: detuning must be finite");
  Complex3x3 rho = rho0;
  const auto ctl = step_control(cfg);
  for (const auto& seg : schedule.segments()) {
    const SegmentGenerator gen(seg, delta, profile);
    const double start = seg.start;
    const double unit = seg.duration;
    auto local_observer = [&](double s, const Complex3x3& y) {
      observer(start + s * unit, y, s >= 1.0);
    };
    try {
      integrate_dopri5(gen, 0.0, 1.0, rho, ctl, local_observer);
    } catch (const IntegrationError& e) {
      // Report the failure time in seconds rather than segment units.
      throw IntegrationError("integrator failed in segment starting at " + std::to_string(start),
                             start + e.time() * unit);
    }
  }
  return rho;
}

Populations populations_of(const DensityMatrix& rho) {
  return {rho.population(kLevel0), rho.population(kLevelE), rho.population(kLevel1)};
}

}  // namespace

void DecoherenceProfile::validate() const {
  for (double g : {gamma1, gamma2, gamma3}) {
    if (!std::isfinite(g) || g < 0.0) {
      throw std::invalid_argument("DecoherenceProfile: rates must be finite and non-negative");
    }
  }
}

void IntegratorConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) {
    throw std::invalid_argument("IntegratorConfig: tolerances must be positive");
  }
  if (!(max_step_fraction > 0.0) || max_step_fraction > 1.0) {
    throw std::invalid_argument("IntegratorConfig: max_step_fraction must be in (0, 1]");
  }
}

std::array<Complex3x3, 3> jump_operators(Sigma2Variant variant) {
  Complex3x3 s1 = Complex3x3::Zero();
  s1(kLevel0, kLevelE) = 1.0;
  s1(kLevel1, kLevelE) = 1.0;
  Complex3x3 s2 = Complex3x3::Zero();
  s2(kLevelE, kLevelE) = variant == Sigma2Variant::transmon_ladder ? 2.0 : 1.0;
  s2(kLevel0, kLevel0) = -1.0;
  s2(kLevel1, kLevel1) = -1.0;
  Complex3x3 s3 = Complex3x3::Zero();
  s3(kLevel0, kLevel1) = 1.0;
  return {s1, s2, s3};
}

Complex3x3 lindblad_rhs(const Complex3x3& rho, const Complex3x3& h,
                        const DecoherenceProfile& profile) {
  profile.validate();
  if (hermiticity_error(h) > 1e-12 * std::max(1.0, h.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("lindblad_rhs: Hamiltonian is not Hermitian");
  }
  Complex3x3 out = Complex(0.0, -1.0) * (h * rho - rho * h);
  const auto ops = jump_operators(profile.sigma2);
  const double rates[3] = {profile.gamma1, profile.gamma2, profile.gamma3};
  for (int k = 0; k < 3; ++k) {
    if (rates[k] == 0.0) continue;
    const Complex3x3& s = ops[k];
    const Complex3x3 n = s.adjoint() * s;
    out += 0.5 * rates[k] * (2.0 * s * rho * s.adjoint() - n * rho - rho * n);
  }
  return out;
}

Complex3x3 propagate(const Complex3x3& rho0, const PulseSchedule& schedule, double delta,
                     const DecoherenceProfile& profile, const IntegratorConfig& cfg) {
  return run_schedule(rho0, schedule, delta, profile, cfg, [](double, const Complex3x3&, bool) {});
}

Trajectory evolve(const DensityMatrix& rho0, const PulseSchedule& schedule, double delta,
                  const DecoherenceProfile& profile, const IntegratorConfig& cfg,
                  const std::optional<PureState3>& target) {
  Trajectory traj;
  auto record = [&](double t, const Complex3x3& m) {
    // Tiny anti-Hermitian drift from round-off is removed before validation.
    if (hermiticity_error(m) > DensityMatrix::kHermitianTol) {
      throw IntegrationError("state lost Hermiticity", t);
    }
    std::optional<DensityMatrix> checked;
    try {
      checked.emplace(0.5 * (m + m.adjoint()));
    } catch (const std::invalid_argument& e) {
      throw IntegrationError(std::string("state left the physical set: ") + e.what(), t);
    }
    DensityMatrix rho = std::move(*checked);
    traj.times.push_back(t);
    traj.populations.push_back(populations_of(rho));
    if (target) traj.fidelity.push_back(state_fidelity(rho, *target));
    traj.states.push_back(std::move(rho));
  };
  record(schedule.start(), rho0.matrix());
  run_schedule(rho0.matrix(), schedule, delta, profile, cfg,
               [&](double t, const Complex3x3& y, bool boundary) {
                 if (cfg.record_steps || boundary) record(t, y);
               });
  return traj;
}

double state_fidelity(const DensityMatrix& rho, const PureState3& target) {
  const Ket3& v = target.amplitudes();
  const double f = (v.adjoint() * rho.matrix() * v)(0, 0).real();
  return std::clamp(f, 0.0, 1.0);
}

PureState3 target_state(const GateParams& gate, const QubitKet& psi_in) {
  const double n = psi_in.norm();
  if (std::abs(n - 1.0) > 1e-12) throw std::invalid_argument("target_state: input not unit-norm");
  return PureState3::from_qubit(gate_unitary(gate).apply(psi_in));
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory,
                          const PulseSchedule& schedule, bool full_state) {
  out << "time_s,rabi0_hz,rabi1_hz,p0,pe,p1,fidelity";
  if (full_state) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) out << ",re_rho" << r << c << ",im_rho" << r << c;
    }
  }
  out << '\n' << std::setprecision(15);
  for (std::size_t i = 0; i < trajectory.times.size(); ++i) {
    const auto& p = trajectory.populations[i];
    const auto [w0, w1] = rabi_pair(schedule, trajectory.times[i]);
    out << trajectory.times[i] << ',' << hertz(std::abs(w0)) << ',' << hertz(std::abs(w1)) << ','
        << p.p0 << ',' << p.pe << ',' << p.p1 << ',';
    if (!trajectory.fidelity.empty()) out << trajectory.fidelity[i];
    if (full_state) {
      const auto& m = trajectory.states[i].matrix();
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) out << ',' << m(r, c).real() << ',' << m(r, c).imag();
      }
    }
    out << '\n';
  }
}

}  // namespace holopt
