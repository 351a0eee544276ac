#include "atomchip/mode_analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <fftw3.h>

#include "atomchip/errors.hpp"

namespace atomchip {

const char* mode_label(Mode m) {
  switch (m) {
    case Mode::D_perp: return "D_perp";
    case Mode::D_x: return "D_x";
    case Mode::Q1: return "Q1";
    case Mode::Q2: return "Q2";
    case Mode::Sc_xy: return "Sc_xy";
    case Mode::M: return "M";
  }
  return "?";
}

ModeTable mode_frequencies(double eta, double omega_perp) {
  if (!(eta > 0.0) || !(omega_perp > 0.0))
    throw NonPositiveFrequency("mode_frequencies: eta and omega_perp must be positive");
  const double e2 = eta * eta;
  const double delta2 = 9.0 * e2 * e2 - 16.0 * e2 + 16.0;
  if (!(delta2 > 0.0))
    throw Error("mode_frequencies: delta^2 not positive (unexpected)");
  const double delta = std::sqrt(delta2);
  ModeTable t;
  t.eta = eta;
  t.omega_perp = omega_perp;
  auto set = [&](Mode m, double ratio) {
    t.omega[static_cast<size_t>(m)] = ratio * omega_perp;
  };
  set(Mode::D_perp, 1.0);
  set(Mode::D_x, eta);
  set(Mode::Q1, std::sqrt(2.0 + 1.5 * e2 + 0.5 * delta));
  set(Mode::Q2, std::sqrt(2.0));
  set(Mode::Sc_xy, std::sqrt(1.0 + e2));
  set(Mode::M, std::sqrt(2.0 + 1.5 * e2 - 0.5 * delta));
  return t;
}

ModeTable mode_frequencies(const Vec3& omega_trap) {
  const double wperp = 0.5 * (omega_trap[1] + omega_trap[2]);
  return mode_frequencies(omega_trap[0] / wperp, wperp);
}

Spectrum analyze_series(const std::vector<double>& times,
                        const std::vector<double>& values, double prominence,
                        size_t max_peaks) {
  const size_t n = times.size();
  if (n != values.size())
    throw UsageError("analyze_series: mismatched series lengths");
  if (n < 16) throw SeriesTooShort("analyze_series: need at least 16 samples");
  const double dt = times[1] - times[0];
  for (size_t i = 2; i < n; ++i)
    if (std::abs(times[i] - times[i - 1] - dt) > 1e-9 * dt + 1e-15)
      throw UsageError("analyze_series: sampling not uniform");

  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  std::vector<double> w(n);
  double energy = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * M_PI * i / (n - 1));
    w[i] = (values[i] - mean) * hann;
    energy += w[i] * w[i];
  }

  const size_t nfft = 4 * n; // 4x zero padding
  std::vector<double> in(nfft, 0.0);
  std::copy(w.begin(), w.end(), in.begin());
  std::vector<std::complex<double>> out(nfft / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(
      static_cast<int>(nfft), in.data(),
      reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  fftw_execute(plan);
  fftw_destroy_plan(plan);

  Spectrum s;
  s.bin_width = 1.0 / (nfft * dt);
  const size_t nbins = out.size();
  s.frequencies.resize(nbins);
  s.log_magnitude.resize(nbins);
  std::vector<double> mag(nbins);
  // Hann coherent gain over the original window length.
  const double gain = 0.5 * n;
  double spec_energy = 0.0;
  for (size_t k = 0; k < nbins; ++k) {
    const double m2 = std::norm(out[k]);
    // r2c one-sided energy: double all interior bins.
    const double mult = (k == 0 || (nfft % 2 == 0 && k == nbins - 1)) ? 1.0 : 2.0;
    spec_energy += mult * m2 / nfft;
    s.frequencies[k] = k * s.bin_width;
    mag[k] = std::abs(out[k]) / gain;
    s.log_magnitude[k] = std::log10(std::max(mag[k], 1e-300));
  }
  s.parseval_residual =
      energy > 0.0 ? std::abs(spec_energy - energy) / energy : 0.0;

  const double peak_mag = *std::max_element(mag.begin(), mag.end());
  if (!(peak_mag > 0.0))
    throw NoOscillation("analyze_series: flat series after detrending");
  const double floor_mag = prominence * peak_mag;
  // Hann main lobe spans +-2 raw bins = +-8 refined bins at 4x padding;
  // demanding a maximum over that span rejects sidelobe ripples.
  const size_t lobe = 8;
  for (size_t k = 1; k + 1 < nbins; ++k) {
    if (mag[k] < floor_mag) continue;
    if (!(mag[k] > mag[k - 1] && mag[k] >= mag[k + 1])) continue;
    bool dominant = true;
    for (size_t j = (k > lobe ? k - lobe : 0); j <= std::min(k + lobe, nbins - 1); ++j)
      if (mag[j] > mag[k]) { dominant = false; break; }
    if (!dominant) continue;
    // Quadratic interpolation on log magnitude.
    const double a = s.log_magnitude[k - 1], b = s.log_magnitude[k],
                 c = s.log_magnitude[k + 1];
    const double denom = a - 2.0 * b + c;
    const double shift = (std::abs(denom) > 1e-300) ? 0.5 * (a - c) / denom : 0.0;
    SpectralPeak p;
    p.frequency = (k + std::clamp(shift, -0.5, 0.5)) * s.bin_width;
    p.log_magnitude = b - 0.25 * (a - c) * std::clamp(shift, -0.5, 0.5);
    s.peaks.push_back(p);
  }
  if (s.peaks.empty())
    throw NoOscillation("analyze_series: no spectral peak above the floor");
  std::sort(s.peaks.begin(), s.peaks.end(),
            [](const auto& u, const auto& v) {
              return u.log_magnitude > v.log_magnitude;
            });
  if (s.peaks.size() > max_peaks) s.peaks.resize(max_peaks);
  return s;
}

void match_modes(Spectrum& spectrum, const ModeTable& modes) {
  const double tol = 3.0 * spectrum.bin_width;
  for (auto& p : spectrum.peaks) {
    double best = tol;
    p.mode.clear();
    for (Mode m : all_modes) {
      const double f = modes[m] / (2.0 * M_PI);
      const double d = std::abs(p.frequency - f);
      if (d <= best) {
        best = d;
        p.mode = mode_label(m);
      }
    }
  }
}

} // namespace atomchip
