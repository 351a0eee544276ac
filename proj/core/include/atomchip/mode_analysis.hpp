#pragma once

#include <array>
#include <string>
#include <vector>

#include "atomchip/vec3.hpp"

namespace atomchip {

// Low-lying collective modes of an elongated Thomas-Fermi condensate in a
// cylindrical trap: omega_perp = (omega_y + omega_z)/2, eta = omega_x /
// omega_perp, delta = sqrt(9 eta^4 - 16 eta^2 + 16).
enum class Mode { D_perp, D_x, Q1, Q2, Sc_xy, M };

inline constexpr std::array<Mode, 6> all_modes = {
    Mode::D_perp, Mode::D_x, Mode::Q1, Mode::Q2, Mode::Sc_xy, Mode::M};

const char* mode_label(Mode m);

struct ModeTable {
  double eta = 0.0;
  double omega_perp = 0.0; // rad/s
  std::array<double, 6> omega{}; // rad/s, indexed by Mode

  double operator[](Mode m) const { return omega[static_cast<size_t>(m)]; }
};

ModeTable mode_frequencies(double eta, double omega_perp);
ModeTable mode_frequencies(const Vec3& omega_trap); // (x, y, z) in rad/s

// One refined spectral peak of a windowed FFT, with the matched mode label
// (empty when unmatched).
struct SpectralPeak {
  double frequency = 0.0;     // Hz, quadratic-interpolated
  double log_magnitude = 0.0; // log10 of window-normalized magnitude
  std::string mode;
};

struct Spectrum {
  std::vector<double> frequencies;    // Hz, zero-padded FFT grid
  std::vector<double> log_magnitude;  // log10 magnitude
  std::vector<SpectralPeak> peaks;    // descending magnitude
  double bin_width = 0.0;             // Hz, refined (zero-padded) bin
  double parseval_residual = 0.0;     // relative energy mismatch
};

// Hann-windowed, 4x zero-padded magnitude spectrum of a uniformly sampled
// series, mean removed. prominence is the linear-magnitude fraction of the
// tallest peak below which local maxima are ignored.
Spectrum analyze_series(const std::vector<double>& times,
                        const std::vector<double>& values,
                        double prominence = 1e-3, size_t max_peaks = 8);

// Label peaks in-place: a peak within +-3 refined bins of a predicted mode
// frequency gets that mode's label (closest mode wins).
void match_modes(Spectrum& spectrum, const ModeTable& modes);

} // namespace atomchip
