#pragma once

#include <functional>
#include <string>
#include <vector>

#include "atomchip/chip_model.hpp"
#include "atomchip/vec3.hpp"

namespace atomchip {

struct ScalingState {
  Vec3 lambda{1.0, 1.0, 1.0};
  Vec3 lambda_dot{0.0, 0.0, 0.0};
  double t = 0.0;
};

// Piecewise trap-frequency schedule: a list of segments, each with its own
// duration, integration step and omega(t) (local time). Free flight is
// omega = 0 with a coarser step.
struct FrequencySegment {
  double duration = 0.0; // s
  double dt = 5e-6;      // s
  std::function<Vec3(double)> omega; // rad/s, local time in [0, duration]
  std::string label;
};

struct TrapFrequencySchedule {
  std::vector<FrequencySegment> segments;
  double total_duration() const;
};

// Thomas-Fermi radii of the initial condensate: R_alpha =
// a_osc (15 N a_s / a_osc)^{1/5} wbar / omega_alpha.
Vec3 initial_tf_radii(const AtomSpecies& species, const Vec3& omega0);

struct ScalingSeries {
  std::vector<double> times;
  std::vector<Vec3> lambda;
  std::vector<Vec3> lambda_dot;
};

// Integrate lambda''_a + omega_a^2(t) lambda_a = omega_a^2(0) /
// (lambda_a lambda_x lambda_y lambda_z) with lambda(0) = 1, lambda'(0) = 0.
// omega0 is the trap at t = 0 (the right-hand-side reference trap).
// output_dt controls the recording cadence.
ScalingSeries integrate_scaling(const TrapFrequencySchedule& schedule,
                                const Vec3& omega0, double output_dt = 1e-4,
                                ScalingState initial = {});

struct CloudObservables {
  Vec3 R_TF;            // m
  Vec3 widths;          // m, R_TF / sqrt(7)
  Vec3 expansion_rates; // m/s
  double temperature = 0.0; // K
  Vec3 temperature_1d;      // K
};

// widths(t) = R0 * lambda(t) / sqrt(7) for every recorded sample.
std::vector<Vec3> width_series(const ScalingSeries& series, const Vec3& R0);

struct ExpansionTemperature {
  double T_3d = 0.0; // K
  Vec3 T_1d;         // K per axis
};

// (3/2) k_B T = (m/2) sum_a (dDelta_a/dt)^2 with Delta = R_TF / sqrt(7);
// rates are the asymptotic width growth rates (m/s).
ExpansionTemperature expansion_temperature(const AtomSpecies& species,
                                           const Vec3& width_rates);

// Linear-fit width growth rates over the trailing window of a width series.
Vec3 fit_expansion_rates(const std::vector<double>& times,
                         const std::vector<Vec3>& widths,
                         double window = 20e-3);

} // namespace atomchip
