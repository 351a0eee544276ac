#pragma once

#include <vector>

#include "atomchip/chip_model.hpp"

namespace atomchip {

enum class AnsatzKind { Polynomial9, ChirpedSine, Linear };

// Default chirp control parameters (good for ~150 ms chip transport).
inline constexpr double default_chirp_a = -1.37;
inline constexpr double default_chirp_b = 0.780;

// Center-of-mass trajectory ansatz from z_i to z_f over [0, t_f]. Polynomial9
// and ChirpedSine satisfy the ten STA boundary conditions (value fixed,
// derivatives 1-4 vanishing at both ends).
struct TrajectoryAnsatz {
  AnsatzKind kind = AnsatzKind::ChirpedSine;
  double z_i = 0.0;     // m
  double z_f = 0.0;     // m
  double t_f = 0.0;     // s
  double chirp_a = 0.0; // only for ChirpedSine
  double chirp_b = 0.0;

  void validate() const;
};

// Value and first four time derivatives of the ansatz, closed form.
struct TrajectoryPoint {
  double z, v, a, j, s; // z_a, dz/dt, d2z/dt2, d3z/dt3, d4z/dt4
};

TrajectoryPoint evaluate_trajectory(const TrajectoryAnsatz& ansatz, double t);

// Control schedule on a uniform time grid, SI units throughout.
struct RampSchedule {
  std::vector<double> times;   // s, uniform
  std::vector<double> z_a;     // m, target atom trajectory
  std::vector<double> z_t;     // m, trap minimum trajectory
  std::vector<double> omega_z; // rad/s
  std::vector<double> bias;    // T
  // Derived from the trap tables along z_t(t); used by the anharmonic /
  // rotating models and the scaling engine.
  std::vector<double> omega_x; // rad/s
  std::vector<double> omega_y; // rad/s
  std::vector<double> L3;      // m
  std::vector<double> theta;   // rad
  double chi_max = 0.0;

  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  double tf() const { return times.empty() ? 0.0 : times.back(); }
  size_t size() const { return times.size(); }
};

// Cubic Hermite evaluation of a uniformly sampled series (slopes from central
// differences); clamps outside the grid.
double sample_series(const std::vector<double>& times,
                     const std::vector<double>& values, double t);

// chi(t) = |(z_a - z_t) / L3(z_t)| and its maximum.
std::pair<std::vector<double>, double> chi_profile(const RampSchedule& schedule,
                                                   const PadeFit& L3_fit);

// Solve the trap-position quadratic (from the (1,2) rational omega_z^2 map
// and Newton's equation for the target trajectory) at every grid time, pick the
// continuity-selected root, and fill omega_z / bias from the fits. The
// omega2 fit must have orders (1, 2). Throws NegativeDiscriminant / RootJump.
RampSchedule reverse_engineer(const TrajectoryAnsatz& ansatz,
                              const PadeFit& omega2_fit,
                              const PadeFit& bias_fit, int n_steps);

// Same, plus the derived omega_x/omega_y/L3/theta series and chi_max.
RampSchedule design_ramp(const TrajectoryAnsatz& ansatz,
                         const TrapTables& tables, int n_steps);

// Grid search over (a, b) minimizing chi_max; deterministic tie-break
// lexicographic on (a, b).
std::pair<double, double> optimize_chirp(const TrajectoryAnsatz& base,
                                         const TrapTables& tables,
                                         int n_steps, double a_lo, double a_hi,
                                         double b_lo, double b_hi, int n_grid);

} // namespace atomchip
