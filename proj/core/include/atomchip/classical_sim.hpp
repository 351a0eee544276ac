#pragma once

#include <optional>
#include <vector>

#include "atomchip/sta_design.hpp"

namespace atomchip {

enum class TrapModel { Harmonic, Anharmonic };

struct ClassicalState {
  double t = 0.0; // s
  double z = 0.0; // m
  double v = 0.0; // m/s
};

struct TransportMetrics {
  double max_offset = 0.0;          // m, max |z - z_t| during transport
  double residual_amplitude = 0.0;  // m, half peak-to-peak around z_f in hold
  double anharmonicity_pct = 0.0;   // max 100 |(z - z_t)/L3| during transport
  double ramp_tf = 0.0;             // s
};

struct ClassicalResult {
  std::vector<ClassicalState> trajectory; // transport + hold
  TransportMetrics metrics;
};

// Integrate z'' + omega_z^2(t) (z - z_t)(1 + (z - z_t)/L3) = 0 over the
// schedule plus a hold window with the trap frozen at its final parameters.
// L3 -> infinity for the Harmonic model. Fixed-step RK4 on the schedule grid.
ClassicalResult integrate(const RampSchedule& schedule, TrapModel model,
                          double hold_time,
                          std::optional<ClassicalState> initial = {});

// Metrics as a function of ramp time for one ansatz family.
std::vector<TransportMetrics> ramp_time_scan(const TrajectoryAnsatz& family,
                                             const TrapTables& tables,
                                             const std::vector<double>& tf_values,
                                             TrapModel model, double hold_time,
                                             int workers = 1);

// First-order perturbative response (bias offset delta_bias in T) or a
// replayed-with-rescaled-duration schedule (delta_tf in s). Returns the
// post-transport oscillation amplitude.
double perturbation_response(const RampSchedule& schedule,
                             const TrapTables& tables, TrapModel model,
                             double delta_bias, double delta_tf,
                             double hold_time);

// Energy drift per final-trap period for a frozen trap at the schedule grid
// step; used as the StepTooLarge guard.
double frozen_trap_energy_drift(const RampSchedule& schedule);

} // namespace atomchip
