#pragma once

#include <vector>

#include "atomchip/pade.hpp"
#include "atomchip/vec3.hpp"

namespace atomchip {

// Straight thin wire segment carrying a DC current. Current flows from
// `start` to `end`.
struct WireSegment {
  Vec3 start; // m
  Vec3 end;   // m
  double current = 0.0; // A
};

// Wire polyline plus a homogeneous bias field. The chip plane is Z = 0 and
// atoms live at Z > 0.
struct ChipConfig {
  std::vector<WireSegment> segments;
  Vec3 bias_direction{0.0, 1.0, 0.0}; // unit vector
  double bias_magnitude = 0.0;        // T

  void validate() const; // throws ValidationError
};

struct AtomSpecies {
  double mass = 0.0;        // kg
  double g_F = 0.0;
  double m_F = 0.0;
  double mu_B = 0.0;        // J/T
  double a_s = 0.0;         // m
  double atom_number = 0.0;

  // m_F g_F mu_B, the magnetic moment entering the potential.
  double moment() const { return m_F * g_F * mu_B; }
  void validate() const;
};

AtomSpecies rb87_f2m2(double atom_number = 1e5);

// Harmonic + cubic description of the trap at one bias value.
struct TrapCharacterization {
  double z_t = 0.0;   // m, distance of the minimum to the chip plane
  double nu_x = 0.0;  // Hz, eigenfrequencies in the rotated frame
  double nu_y = 0.0;
  double nu_z = 0.0;
  double L3 = 0.0;    // m, cubic length along the z eigen-axis
  double theta = 0.0; // rad, tilt of the (x, y) eigenvectors in the (X, Y) plane
  double bias = 0.0;  // T

  Vec3 minimum;       // m, full 3D location of the minimum
};

// Total magnetic field: finite-segment Biot-Savart sum plus bias.
// Throws PointOnWire if the point is closer than 1e-9 m to a segment axis.
Vec3 field_at(const ChipConfig& config, const Vec3& point);

// Trapping potential m_F g_F mu_B |B|.
double potential_at(const ChipConfig& config, const AtomSpecies& species,
                    const Vec3& point);

// Locate the minimum below the central wire and characterize it (Hessian
// eigenfrequencies, tilt angle, cubic length). Throws NoTrapFound.
TrapCharacterization characterize_trap(const ChipConfig& config,
                                       const AtomSpecies& species);

// Sampled curves over a bias sweep plus Pade parameterizations of every trap
// quantity versus z_t.
struct TrapTables {
  std::vector<TrapCharacterization> rows; // sorted by z_t ascending
  PadeFit omega_z2;    // rad^2/s^2 vs z_t [m]; orders (1,2), as the ramp inversion requires
  PadeFit omega_x2;    // rad^2/s^2 vs z_t
  PadeFit omega_y2;    // rad^2/s^2 vs z_t
  PadeFit bias_of_zt;  // T vs z_t
  PadeFit zt_of_bias;  // m vs bias [T]
  PadeFit L3_of_zt;    // m vs z_t
  PadeFit theta_of_zt; // rad vs z_t
};

// Sweep the bias over [bias_lo, bias_hi] (T) with n_samples points.
// Throws InsufficientSamples for n_samples < 20 and propagates NoTrapFound.
TrapTables trap_tables(const ChipConfig& config_template,
                       const AtomSpecies& species, double bias_lo,
                       double bias_hi, int n_samples, int workers = 1);

// Shipped Z geometry: 4 mm central wire along X, two 16 mm leads along Y.
ChipConfig quantus_z_chip(double wire_current, double bias_tesla);

} // namespace atomchip
