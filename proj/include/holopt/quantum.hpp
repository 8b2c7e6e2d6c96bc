// Complex linear algebra for the three-level Lambda system.
//
// Basis order is fixed everywhere as (|0>, |e>, |1>).

#pragma once

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <utility>

namespace holopt {

using Complex = std::complex<double>;
using Complex3x3 = Eigen::Matrix3cd;
using Ket3 = Eigen::Vector3cd;
using QubitKet = Eigen::Vector2cd;
using Complex2x2 = Eigen::Matrix2cd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Index of each level in the shared basis.
enum Level : int { kLevel0 = 0, kLevelE = 1, kLevel1 = 2 };

/// Hz -> rad/s. User-facing frequencies are converted exactly once.
constexpr double angular(double hz) { return kTwoPi * hz; }
constexpr double hertz(double rad_per_s) { return rad_per_s / kTwoPi; }

/// Unit-norm state of the three-level system.
class PureState3 {
 public:
  /// Throws std::invalid_argument unless the squared norm is 1 within 1e-12.
  explicit PureState3(const Ket3& amplitudes);

  /// Normalizes `amplitudes`; throws on a zero or non-finite vector.
  static PureState3 normalized(const Ket3& amplitudes);
  static PureState3 basis(Level level);
  /// Embeds a qubit state a|0> + b|1> with zero |e> amplitude.
  static PureState3 from_qubit(const QubitKet& qubit);

  const Ket3& amplitudes() const { return amps_; }
  Complex operator[](int i) const { return amps_(i); }
  QubitKet qubit_part() const { return {amps_(kLevel0), amps_(kLevel1)}; }

 private:
  Ket3 amps_;
};

/// Hermitian, unit-trace, positive semidefinite 3x3 state.
class DensityMatrix {
 public:
  static constexpr double kHermitianTol = 1e-10;
  static constexpr double kTraceTol = 1e-8;
  static constexpr double kEigenTol = 1e-8;

  /// Validates the invariants above; throws std::invalid_argument otherwise.
  explicit DensityMatrix(const Complex3x3& m);

  static DensityMatrix pure(const PureState3& psi);

  const Complex3x3& matrix() const { return m_; }
  double population(Level level) const { return m_(level, level).real(); }
  double trace() const { return m_.trace().real(); }
  double min_eigenvalue() const;

 private:
  Complex3x3 m_;
};

/// Target holonomic rotation: polar angle theta and azimuth phi of the
/// rotation axis, rotation angle beta.
struct GateParams {
  double theta = 0.0;
  double phi = 0.0;
  double beta = 0.0;

  /// Throws std::invalid_argument when any angle is not finite.
  void validate() const;
};

/// 2x2 unitary on the qubit subspace {|0>, |1>}.
class QubitUnitary {
 public:
  explicit QubitUnitary(const Complex2x2& m);
  const Complex2x2& matrix() const { return m_; }
  QubitKet apply(const QubitKet& psi) const { return m_ * psi; }

 private:
  Complex2x2 m_;
};

/// e^{i beta/2} exp(-i (beta/2) n.sigma), n = (sin t cos p, sin t sin p, cos t).
QubitUnitary gate_unitary(const GateParams& params);

struct BrightDark {
  PureState3 bright;
  PureState3 dark;
};

/// Bright and dark superpositions of the qubit levels for mixing angle
/// `theta` and drive phases (phi0, phi1).
BrightDark bright_dark_states(double theta, double phi0, double phi1);

/// (1/2) [[0, W0, 0], [W0*, 2 delta, W1*], [0, W1, 0]]; all arguments in rad/s.
Complex3x3 hamiltonian(Complex omega0, Complex omega1, double delta);

/// Largest entry-wise modulus of m - m^dagger.
double hermiticity_error(const Complex3x3& m);

/// True when `a` equals `b` times a single unit-modulus phase within `tol`.
bool equal_up_to_phase(const Complex2x2& a, const Complex2x2& b, double tol);

}  // namespace holopt
