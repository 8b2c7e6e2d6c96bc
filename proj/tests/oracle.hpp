// Reference propagator for tests: fixed-step classical RK4 on the master
// equation, with the Hamiltonian, envelope and dissipators written out from
// scratch so it shares no physics code with the library.

#pragma once

#include <Eigen/Dense>

#include <vector>

namespace oracle {

struct Segment {
  double theta;
  double phi0;
  double phi1;
  std::vector<double> alphas;
  double tau;
};

/// Gate pair and, when `compensate`, the dark-state pair.
std::vector<Segment> segments(double theta, double phi, double beta,
                              const std::vector<double>& alphas, double tau, bool compensate);

struct Model {
  double delta = 0.0;   // rad/s
  double gamma1 = 0.0;  // rad/s
  double gamma2 = 0.0;  // rad/s
  double excited_weight = 1.0;  // |e><e| coefficient in the dephasing operator
};

/// Evolves rho0 through all segments with `steps` RK4 steps per segment.
Eigen::Matrix3cd evolve(const Eigen::Matrix3cd& rho0, const std::vector<Segment>& segs,
                        const Model& model, int steps);

}  // namespace oracle
