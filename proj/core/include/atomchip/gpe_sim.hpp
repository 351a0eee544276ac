#pragma once

#include <array>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "atomchip/chip_model.hpp"
#include "atomchip/classical_sim.hpp"
#include "atomchip/vec3.hpp"

namespace atomchip {

// Cartesian grid centered at the origin, x-fastest storage order.
struct GridSpec {
  std::array<size_t, 3> n{64, 64, 64}; // points per axis (powers of two)
  Vec3 extent;                         // full span per axis [m]

  void validate() const;
  size_t total() const { return n[0] * n[1] * n[2]; }
  double spacing(int axis) const { return extent[axis] / n[axis]; }
  double coord(int axis, size_t i) const {
    return -0.5 * extent[axis] + (i + 0.5) * spacing(axis);
  }
  double cell_volume() const { return spacing(0) * spacing(1) * spacing(2); }
  size_t index(size_t ix, size_t iy, size_t iz) const {
    return ix + n[0] * (iy + n[1] * iz);
  }
};

struct WaveFunction {
  GridSpec grid;
  std::vector<std::complex<double>> amp; // x-fastest
  Vec3 center; // lab-frame position of the grid origin

  double norm() const; // sqrt(integral |psi|^2 dV)
  void normalize();
};

// Co-moving frame along Z built from a classical trajectory: hbar K_a = m
// Zdot_a, phi_a = (m / 2 hbar) integral Zdot_a^2 dt'.
struct FrameTransform {
  std::vector<double> times;
  std::vector<double> Z_a;   // m
  std::vector<double> Zdot;  // m/s
  std::vector<double> Zddot; // m/s^2
  std::vector<double> K_a;   // 1/m
  std::vector<double> phi_a; // rad
};

FrameTransform frame_from_classical(const std::vector<ClassicalState>& trajectory,
                                    const AtomSpecies& species);

enum class PotentialModel { HarmonicFixed, AnharmonicFixed, AnharmonicRotating };

// Trap parameters at one instant; position along the lab Z axis.
struct TrapSnapshot {
  double omega_x = 0.0, omega_y = 0.0, omega_z = 0.0; // rad/s
  double z_t = 0.0;                                   // m
  double L3 = 0.0;                                    // m (<= 0: no cubic term)
  double theta = 0.0;                                 // rad
};

// Snapshot from a ramp schedule (frozen at the final row past t_f).
TrapSnapshot trap_snapshot(const RampSchedule& schedule, double t);

struct GroundStateOptions {
  double dt_start = 5e-5; // s (imaginary)
  double dt_min = 1e-6;
  double tol = 1e-10;     // relative chemical-potential change per step
  long max_iter = 500000;
  int workers = 1;
};

struct GroundState {
  WaveFunction psi;
  double mu = 0.0;     // J
  double energy = 0.0; // J
  long iterations = 0;
};

// Imaginary-time propagation, coarse-to-fine steps, energy monotone per
// stage (an energy increase halves the step and restarts from the last
// accepted state). coupling gN = 4 pi hbar^2 a_s N / m unless overridden.
GroundState ground_state(const GridSpec& grid, const AtomSpecies& species,
                         const TrapSnapshot& trap, PotentialModel model,
                         const GroundStateOptions& opts = {},
                         std::optional<double> coupling_override = {});

struct PropagationOptions {
  double dt = 1e-6;       // s
  double observe_dt = 5e-4;
  int workers = 1;
  bool check_overflow = true;
};

struct GpeObservables {
  std::vector<double> times;
  std::vector<double> com_z;        // m, lab-frame <Z>
  std::vector<double> residual_z;   // m, in-frame <Z'>
  std::vector<Vec3> cap_widths;     // m, (DX, DY, DZ) second moments
  std::vector<double> cov_xy;       // m^2, DXY covariance
  std::vector<Vec3> rot_widths;     // m, (dx, dy, dz) at theta(t)
  std::vector<double> norm;
  std::vector<double> energy;       // J, co-moving frame
};

struct GpeResult {
  WaveFunction psi;
  GpeObservables observables;
};

// Strang-split real-time propagation of the co-moving-frame equation over
// [t0, t1]. trap(t) supplies the lab-frame trap; frame supplies Z_a(t)
// (empty frame = lab frame, no inertial term).
GpeResult propagate(WaveFunction psi, const AtomSpecies& species,
                    const std::function<TrapSnapshot(double)>& trap,
                    PotentialModel model, const FrameTransform& frame,
                    double t0, double t1, const PropagationOptions& opts = {},
                    std::optional<double> coupling_override = {});

// Second moments and the rotated-frame widths (dx, dy, dz) at tilt theta.
struct Moments {
  Vec3 mean;       // m
  Vec3 width;      // m, (DX, DY, DZ)
  double cov_xy = 0.0; // m^2
};

Moments moments(const WaveFunction& psi);
Vec3 rotated_widths(const Moments& m, double theta);
Vec3 rotated_widths(const WaveFunction& psi, double theta);

// Undo the frame transform at time t: apply exp(+i [K_a Z' + phi_a]) and
// shift the grid center by Z_a.
WaveFunction lab_frame(const WaveFunction& psi, const FrameTransform& frame,
                       double t);

// Little-endian snapshot: 3 x u32 dims, 3 x f64 extents, f64 time, then
// interleaved (re, im) f64 in x-fastest order.
void write_snapshot(const std::string& path, const WaveFunction& psi, double t);
WaveFunction read_snapshot(const std::string& path, double* t = nullptr);

} // namespace atomchip
