#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atomchip/gpe_sim.hpp"
#include "atomchip/scaling_sim.hpp"
#include "atomchip/sta_design.hpp"

namespace atomchip {

// Delta-kick collimation pulse: a brief shallow trap acting as a matter-wave
// lens.
struct LensSpec {
  Vec3 frequencies_hz{1.7, 7.2, 7.2};
  double duration = 4.84e-3;  // s
  double wire_current = 0.1;  // A, informational (ideal harmonic lens)
  double bias = 0.12e-4;      // T, informational
};

enum class SequenceEngine { Scaling, GPE };

// Grid/stepping knobs for the GPE engine only.
struct GpeEngineOptions {
  GridSpec grid;
  double dt = 2.5e-6;
  double observe_dt = 5e-4;
  int workers = 1;
  std::optional<double> coupling_override;
};

// transport -> hold -> free1 -> lens -> free2, contiguous segments.
struct SequencePlan {
  const RampSchedule* transport = nullptr;
  double hold = 31.4e-3;  // s
  double free1 = 100e-3;  // s
  LensSpec lens;
  double free2 = 200e-3;  // s
  SequenceEngine engine = SequenceEngine::Scaling;
  // Counterfactual: force the weak axis to its hold-trap equilibrium size
  // (zero rate) at release, as if it had followed the decompression
  // adiabatically. Scaling engine only.
  bool adiabatic_x = false;
  std::optional<GpeEngineOptions> gpe;

  void validate() const;
};

struct SequenceReport {
  std::vector<double> times;  // s, from transport start
  std::vector<Vec3> widths;   // m, standard deviations per axis
  Vec3 rates;                 // m/s, trailing-window linear fit on free2
  Vec3 rate_residual;         // m, RMS fit residual per axis
  double T_3d = 0.0;          // K
  Vec3 T_1d;                  // K
  std::vector<std::pair<std::string, double>> timeline; // label, start time
};

SequenceReport run_sequence(const SequencePlan& plan, const AtomSpecies& species);

struct DkcScanResult {
  std::vector<double> hold_values;  // s
  std::vector<double> lens_values;  // s
  std::vector<double> T_map;        // K, row-major [hold][lens]
  SequencePlan best;
  double best_T = 0.0;
};

// Grid scan of (hold, lens duration); cells run concurrently, argmin with
// ties broken toward the shorter total sequence. Scaling engine only.
DkcScanResult optimize_hold_and_lens(const SequencePlan& plan_template,
                                     const AtomSpecies& species,
                                     const std::vector<double>& hold_values,
                                     const std::vector<double>& lens_values,
                                     int workers = 1);

// Candidate hold times shortly after weak-axis size maxima of an in-trap
// hold series. Throws NoOscillation for flat input.
std::vector<double> release_timing_hint(const std::vector<double>& times,
                                        const std::vector<double>& weak_widths);

} // namespace atomchip
