#include "holopt/metrics.hpp"

#include "holopt/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace holopt {

namespace {

PulseSchedule schedule_for(const SystemPreset& system, const GateSpec& gate,
                           const PulseCoefficients& coeffs, const EvalOptions& options) {
  return preset_schedule(system, gate, coeffs, options.constraint_tolerance,
                         options.compensation ? &*options.compensation : nullptr);
}

PointResult evaluate_on(const PulseSchedule& schedule, const SystemPreset& system,
                        const GateSpec& gate, double delta_hz, const QubitKet& psi_in,
                        const EvalOptions& options) {
  const auto target = target_state(gate.params, psi_in);
  const auto rho0 = DensityMatrix::pure(PureState3::from_qubit(psi_in));
  const auto traj = evolve(rho0, schedule, angular(delta_hz), system.profile, options.integrator);
  const auto& rho = traj.final_state();
  return {state_fidelity(rho, target), traj.populations.back()};
}

const QubitKet kKetOne{0.0, 1.0};

double lerp_crossing(double x0, double f0, double x1, double f1, double threshold) {
  if (f1 == f0) return x0;
  return x0 + (threshold - f0) * (x1 - x0) / (f1 - f0);
}

}  // namespace

double SweepResult::mean_fidelity(double lo_hz, double hi_hz) const {
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i) {
    if (!ok(i) || detunings_hz[i] < lo_hz || detunings_hz[i] > hi_hz) continue;
    sum += fidelity[i];
    ++n;
  }
  return n == 0 ? std::numeric_limits<double>::quiet_NaN() : sum / static_cast<double>(n);
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t count) {
  if (count == 0) throw std::invalid_argument("uniform_grid: count must be positive");
  if (count == 1) return {0.5 * (lo + hi)};
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    // Symmetric formula keeps lo + hi = 0 grids exactly symmetric.
    const double n = static_cast<double>(count - 1);
    const double u = static_cast<double>(i) / n;
    const double v = static_cast<double>(count - 1 - i) / n;
    g[i] = lo * v + hi * u;
  }
  return g;
}

PointResult evaluate_point(const SystemPreset& system, const GateSpec& gate,
                           const PulseCoefficients& coeffs, double delta_hz,
                           const QubitKet& psi_in, const EvalOptions& options) {
  system.validate();
  return evaluate_on(schedule_for(system, gate, coeffs, options), system, gate, delta_hz, psi_in,
                     options);
}

SweepResult detuning_sweep(const SystemPreset& system, const GateSpec& gate,
                           const PulseCoefficients& coeffs, const std::vector<double>& grid_hz,
                           const QubitKet& psi_in, const EvalOptions& options) {
  if (grid_hz.empty()) throw std::invalid_argument("detuning_sweep: empty grid");
  system.validate();
  const auto schedule = schedule_for(system, gate, coeffs, options);

  struct Cell {
    PointResult r;
    std::string error;
  };
  const auto cells = parallel_map(
      grid_hz.size(),
      [&](std::size_t i) {
        Cell c;
        try {
          c.r = evaluate_on(schedule, system, gate, grid_hz[i], psi_in, options);
        } catch (const IntegrationError& e) {
          c.error = e.what();
        }
        return c;
      },
      options.workers);

  SweepResult out;
  out.system = std::string(to_string(system.name));
  out.gate = std::string(to_string(gate.name));
  out.alphas.assign(coeffs.alphas().begin(), coeffs.alphas().end());
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < grid_hz.size(); ++i) {
    const auto& c = cells[i];
    const bool good = c.error.empty();
    out.detunings_hz.push_back(grid_hz[i]);
    out.fidelity.push_back(good ? c.r.fidelity : nan);
    out.p0.push_back(good ? c.r.populations.p0 : nan);
    out.pe.push_back(good ? c.r.populations.pe : nan);
    out.p1.push_back(good ? c.r.populations.p1 : nan);
    out.p_off.push_back(good ? std::clamp(c.r.populations.p0 + c.r.populations.pe, 0.0, 1.0) : nan);
    out.errors.push_back(c.error);
  }
  return out;
}

double off_resonant_excitation(const SystemPreset& system, const GateSpec& gate,
                               const PulseCoefficients& coeffs, double delta_hz,
                               const EvalOptions& options) {
  const auto r = evaluate_point(system, gate, coeffs, delta_hz, kKetOne, options);
  return std::clamp(r.populations.p0 + r.populations.pe, 0.0, 1.0);
}

double max_off_resonant_excitation(const SystemPreset& system, const GateSpec& gate,
                                   const PulseCoefficients& coeffs, DetuningRange range,
                                   std::size_t points_per_side, const EvalOptions& options) {
  auto grid = uniform_grid(range.lo_hz, range.hi_hz, points_per_side);
  const std::size_t n = grid.size();
  for (std::size_t i = 0; i < n; ++i) grid.push_back(-grid[i]);
  const auto sweep = detuning_sweep(system, gate, coeffs, grid, kKetOne, options);
  double worst = 0.0;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (!sweep.ok(i)) throw IntegrationError(sweep.errors[i], 0.0);
    worst = std::max(worst, sweep.p_off[i]);
  }
  return worst;
}

std::vector<QubitKet> bloch_grid_states(const BlochGrid& grid) {
  if (grid.polar < 2 || grid.azimuthal < 1) {
    throw std::invalid_argument("bloch_grid_states: need at least 2 polar and 1 azimuthal point");
  }
  std::vector<QubitKet> states;
  states.reserve(grid.polar * grid.azimuthal);
  const Complex i{0.0, 1.0};
  for (std::size_t a = 0; a < grid.polar; ++a) {
    const double polar = kPi * static_cast<double>(a) / static_cast<double>(grid.polar - 1);
    for (std::size_t b = 0; b < grid.azimuthal; ++b) {
      const double az = kTwoPi * static_cast<double>(b) / static_cast<double>(grid.azimuthal);
      states.emplace_back(std::cos(polar / 2.0), std::exp(i * az) * std::sin(polar / 2.0));
    }
  }
  return states;
}

double bloch_average_fidelity(const SystemPreset& system, const GateSpec& gate,
                              const PulseCoefficients& coeffs, double delta_hz,
                              const BlochGrid& grid, const EvalOptions& options) {
  system.validate();
  const auto schedule = schedule_for(system, gate, coeffs, options);
  const auto states = bloch_grid_states(grid);
  const auto fids = parallel_map(
      states.size(),
      [&](std::size_t k) {
        return evaluate_on(schedule, system, gate, delta_hz, states[k], options).fidelity;
      },
      options.workers);
  double sum = 0.0;
  for (double f : fids) sum += f;
  return sum / static_cast<double>(fids.size());
}

std::optional<DetuningInterval> robustness_window(const SweepResult& sweep, double threshold) {
  const auto& x = sweep.detunings_hz;
  const auto& f = sweep.fidelity;
  if (x.empty()) throw std::invalid_argument("robustness_window: empty sweep");
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (!(x[i] > x[i - 1])) throw std::invalid_argument("robustness_window: grid not increasing");
  }
  if (x.front() > 0.0 || x.back() < 0.0) {
    throw std::invalid_argument("robustness_window: grid does not contain zero detuning");
  }
  auto good = [&](std::size_t i) { return sweep.ok(i) && f[i] >= threshold; };

  // Bracket zero: [left, right] with x[left] <= 0 <= x[right].
  std::size_t right = 0;
  while (x[right] < 0.0) ++right;
  std::size_t left = x[right] == 0.0 ? right : right - 1;
  if (left == right) {
    if (!good(left)) return std::nullopt;
  } else {
    if (!sweep.ok(left) || !sweep.ok(right)) return std::nullopt;
    const double f0 = f[left] + (0.0 - x[left]) * (f[right] - f[left]) / (x[right] - x[left]);
    if (f0 < threshold) return std::nullopt;
    if (!good(left) && !good(right)) return DetuningInterval{0.0, 0.0};
    if (!good(left)) {
      return DetuningInterval{lerp_crossing(x[left], f[left], x[right], f[right], threshold),
                              x[right]};
    }
  }
  DetuningInterval w;
  // Walk outward while the fidelity stays above threshold.
  std::size_t lo = left;
  while (lo > 0 && good(lo - 1)) --lo;
  w.lo_hz = (lo > 0 && sweep.ok(lo - 1))
                ? lerp_crossing(x[lo - 1], f[lo - 1], x[lo], f[lo], threshold)
                : x[lo];
  if (!good(right)) {
    w.hi_hz = lerp_crossing(x[left], f[left], x[right], f[right], threshold);
    return w;
  }
  std::size_t hi = right;
  while (hi + 1 < x.size() && good(hi + 1)) ++hi;
  w.hi_hz = (hi + 1 < x.size() && sweep.ok(hi + 1))
                ? lerp_crossing(x[hi], f[hi], x[hi + 1], f[hi + 1], threshold)
                : x[hi];
  return w;
}

SensitivitySurface sensitivity_scan(const SystemPreset& system, const GateSpec& gate,
                                    const PulseCoefficients& base, int index,
                                    const std::vector<double>& eta_grid,
                                    const std::vector<double>& delta_grid_hz,
                                    const EvalOptions& options) {
  if (index < 1 || index > base.harmonics()) {
    throw std::invalid_argument("sensitivity_scan: weight index out of range");
  }
  if (eta_grid.empty() || delta_grid_hz.empty()) {
    throw std::invalid_argument("sensitivity_scan: empty grid");
  }
  system.validate();
  // Amplitude errors break the endpoint constraints on purpose.
  EvalOptions opts = options;
  opts.constraint_tolerance = kNoConstraintCheck;
  std::vector<PulseSchedule> schedules;
  for (double eta : eta_grid) {
    schedules.push_back(schedule_for(system, gate, base.scaled(index, 1.0 + eta), opts));
  }
  const std::size_t nd = delta_grid_hz.size();
  const auto values = parallel_map(
      eta_grid.size() * nd,
      [&](std::size_t k) {
        const auto r = evaluate_on(schedules[k / nd], system, gate, delta_grid_hz[k % nd], kKetOne,
                                   opts);
        return std::max(0.0, 1.0 - r.fidelity);
      },
      opts.workers);
  SensitivitySurface s;
  s.eta_grid = eta_grid;
  s.delta_grid_hz = delta_grid_hz;
  s.perturbed_index = index;
  s.infidelity.assign(eta_grid.size(), std::vector<double>(nd));
  for (std::size_t k = 0; k < values.size(); ++k) s.infidelity[k / nd][k % nd] = values[k];
  return s;
}

void write_sweep_csv(std::ostream& out, const SweepResult& sweep) {
  out << "delta_hz,fidelity,p0,pe,p1,p_off\n" << std::setprecision(15);
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    out << sweep.detunings_hz[i];
    if (sweep.ok(i)) {
      out << ',' << sweep.fidelity[i] << ',' << sweep.p0[i] << ',' << sweep.pe[i] << ','
          << sweep.p1[i] << ',' << sweep.p_off[i] << '\n';
    } else {
      out << ",,,,,\n";
    }
  }
}

void write_surface_csv(std::ostream& out, const SensitivitySurface& surface) {
  out << "eta,delta_hz,infidelity\n" << std::setprecision(15);
  for (std::size_t i = 0; i < surface.eta_grid.size(); ++i) {
    for (std::size_t j = 0; j < surface.delta_grid_hz.size(); ++j) {
      out << surface.eta_grid[i] << ',' << surface.delta_grid_hz[j] << ','
          << surface.infidelity[i][j] << '\n';
    }
  }
}

namespace {

constexpr double kW = 640, kH = 400, kMargin = 50;

std::string polyline(const std::vector<double>& x, const std::vector<double>& y, double x0,
                     double x1, double y0, double y1, const char* colour) {
  std::ostringstream s;
  s << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(y[i])) continue;
    const double px = kMargin + (x[i] - x0) / (x1 - x0) * (kW - 2 * kMargin);
    const double py = kH - kMargin - (y[i] - y0) / (y1 - y0) * (kH - 2 * kMargin);
    s << px << ',' << py << ' ';
  }
  s << "\"/>\n";
  return s.str();
}

}  // namespace

void write_sweep_svg(std::ostream& out, const SweepResult& sweep, const std::string& title) {
  const double x0 = sweep.detunings_hz.front();
  const double x1 = sweep.detunings_hz.size() > 1 ? sweep.detunings_hz.back() : x0 + 1.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kMargin << "\" y=\"25\" font-size=\"14\">" << title << "</text>\n"
      << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kW - 2 * kMargin
      << "\" height=\"" << kH - 2 * kMargin << "\" fill=\"none\" stroke=\"black\"/>\n";
  out << polyline(sweep.detunings_hz, sweep.fidelity, x0, x1, 0.0, 1.0, "red");
  out << polyline(sweep.detunings_hz, sweep.p_off, x0, x1, 0.0, 1.0, "blue");
  out << "<text x=\"" << kMargin << "\" y=\"" << kH - 15 << "\" font-size=\"12\">delta "
      << x0 / 1e6 << " .. " << x1 / 1e6
      << " MHz; red: fidelity, blue: p_off (0..1)</text>\n</svg>\n";
}

void write_surface_svg(std::ostream& out, const SensitivitySurface& surface,
                       const std::string& title) {
  double vmin = std::numeric_limits<double>::infinity(), vmax = -vmin;
  for (const auto& row : surface.infidelity) {
    for (double v : row) {
      vmin = std::min(vmin, v);
      vmax = std::max(vmax, v);
    }
  }
  const double span = vmax > vmin ? vmax - vmin : 1.0;
  const auto ne = surface.eta_grid.size(), nd = surface.delta_grid_hz.size();
  const double cw = (kW - 2 * kMargin) / static_cast<double>(nd);
  const double ch = (kH - 2 * kMargin) / static_cast<double>(ne);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kMargin << "\" y=\"25\" font-size=\"14\">" << title << "</text>\n";
  for (std::size_t i = 0; i < ne; ++i) {
    for (std::size_t j = 0; j < nd; ++j) {
      const double u = (surface.infidelity[i][j] - vmin) / span;
      const int r = static_cast<int>(255 * u), b = static_cast<int>(255 * (1 - u));
      out << "<rect x=\"" << kMargin + j * cw << "\" y=\"" << kH - kMargin - (i + 1) * ch
          << "\" width=\"" << cw + 0.5 << "\" height=\"" << ch + 0.5 << "\" fill=\"rgb(" << r
          << ",0," << b << ")\"/>\n";
    }
  }
  out << "<text x=\"" << kMargin << "\" y=\"" << kH - 15 << "\" font-size=\"12\">x: delta, y: eta;"
      << " infidelity " << vmin << " (blue) .. " << vmax << " (red)</text>\n</svg>\n";
}

}  // namespace holopt
