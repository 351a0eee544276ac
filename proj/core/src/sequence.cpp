#include "atomchip/sequence.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <thread>

#include "atomchip/classical_sim.hpp"
#include "atomchip/constants.hpp"
#include "atomchip/errors.hpp"

namespace atomchip {

void SequencePlan::validate() const {
  if (!transport || transport->size() < 2)
    throw ValidationError("SequencePlan: transport schedule missing or too short");
  if (hold < 0.0 || free1 < 0.0 || free2 < 0.0 || lens.duration < 0.0)
    throw ValidationError("SequencePlan: durations must be nonnegative");
  for (int a = 0; a < 3; ++a)
    if (!(lens.frequencies_hz[a] > 0.0))
      throw ValidationError("SequencePlan: lens frequencies must be positive");
  if (adiabatic_x && engine != SequenceEngine::Scaling)
    throw UsageError("SequencePlan: adiabatic_x is a scaling-engine counterfactual");
  if (engine == SequenceEngine::GPE && !gpe)
    throw UsageError("SequencePlan: GPE engine requires GpeEngineOptions");
}

namespace {

// Equilibrium scale factors of the hold trap relative to the transport-start
// trap: omega_f_a^2 lam_a^2 Pi = omega_0_a^2 with Pi = lam_x lam_y lam_z,
// giving Pi = (prod omega_0/omega_f)^{2/5} in closed form.
Vec3 equilibrium_lambda(const Vec3& omega0, const Vec3& omega_f) {
  double prod = 1.0;
  for (int a = 0; a < 3; ++a) prod *= omega0[a] / omega_f[a];
  const double Pi = std::pow(prod, 0.4);
  Vec3 lam;
  for (int a = 0; a < 3; ++a)
    lam[a] = omega0[a] / (omega_f[a] * std::sqrt(Pi));
  return lam;
}

struct ScalingContext {
  Vec3 omega0;
  Vec3 omega_hold;
  Vec3 R0;
  FrequencySegment transport_seg;
};

ScalingContext scaling_context(const SequencePlan& plan,
                               const AtomSpecies& species) {
  const RampSchedule& s = *plan.transport;
  ScalingContext c;
  c.omega0 = {s.omega_x.front(), s.omega_y.front(), s.omega_z.front()};
  c.omega_hold = {s.omega_x.back(), s.omega_y.back(), s.omega_z.back()};
  c.R0 = initial_tf_radii(species, c.omega0);
  c.transport_seg = {s.tf(), 5e-6,
                     [&s](double t) {
                       return Vec3{sample_series(s.times, s.omega_x, t),
                                   sample_series(s.times, s.omega_y, t),
                                   sample_series(s.times, s.omega_z, t)};
                     },
                     "transport"};
  return c;
}

FrequencySegment const_seg(double duration, const Vec3& omega, double dt,
                           std::string label) {
  return {duration, dt, [omega](double) { return omega; }, std::move(label)};
}

FrequencySegment free_seg(double duration, std::string label) {
  return {duration, 5e-5, nullptr, std::move(label)};
}

SequenceReport run_scaling(const SequencePlan& plan,
                           const AtomSpecies& species) {
  const auto ctx = scaling_context(plan, species);
  const Vec3 omega_lens{2.0 * M_PI * plan.lens.frequencies_hz[0],
                        2.0 * M_PI * plan.lens.frequencies_hz[1],
                        2.0 * M_PI * plan.lens.frequencies_hz[2]};

  SequenceReport rep;
  const double t_transport = plan.transport->tf();
  double t0 = 0.0;
  auto mark = [&](const std::string& label, double t) {
    rep.timeline.emplace_back(label, t);
  };

  ScalingState state; // lambda = 1, rest
  auto run_segment = [&](const FrequencySegment& seg) {
    TrapFrequencySchedule one;
    one.segments.push_back(seg);
    auto series = integrate_scaling(one, ctx.omega0, 5e-4, state);
    const auto w = width_series(series, ctx.R0);
    // drop the duplicated first sample on continuation segments
    const size_t start = rep.times.empty() ? 0 : 1;
    for (size_t i = start; i < series.times.size(); ++i) {
      rep.times.push_back(series.times[i]);
      rep.widths.push_back(w[i]);
    }
    state.lambda = series.lambda.back();
    state.lambda_dot = series.lambda_dot.back();
    state.t = series.times.back();
  };

  mark("transport", t0);
  run_segment(ctx.transport_seg);
  t0 = t_transport;
  if (plan.hold > 0.0) {
    mark("hold", t0);
    run_segment(const_seg(plan.hold, ctx.omega_hold, 5e-6, "hold"));
    t0 += plan.hold;
  }

  if (plan.adiabatic_x) {
    const Vec3 eq = equilibrium_lambda(ctx.omega0, ctx.omega_hold);
    state.lambda[0] = eq[0];
    state.lambda_dot[0] = 0.0;
  }

  if (plan.free1 > 0.0) {
    if (plan.free1 < 10e-3)
      std::cerr << "run_sequence: lens applied after only "
                << plan.free1 * 1e3 << " ms of expansion\n";
    mark("free1", t0);
    run_segment(free_seg(plan.free1, "free1"));
    t0 += plan.free1;
  }
  if (plan.lens.duration > 0.0) {
    mark("lens", t0);
    run_segment(const_seg(plan.lens.duration, omega_lens, 5e-6, "lens"));
    t0 += plan.lens.duration;
  }
  mark("free2", t0);
  run_segment(free_seg(plan.free2, "free2"));

  return rep;
}

SequenceReport run_gpe(const SequencePlan& plan, const AtomSpecies& species) {
  const auto& eng = *plan.gpe;
  const RampSchedule& sched = *plan.transport;

  // Classical anharmonic trajectory through transport + hold supplies the
  // co-moving frame; the frame then stays at its release state.
  auto cls = integrate(sched, TrapModel::Anharmonic, plan.hold);
  auto frame = frame_from_classical(cls.trajectory, species);

  GroundStateOptions gso;
  gso.workers = eng.workers;
  auto gs = ground_state(eng.grid, species, trap_snapshot(sched, 0.0),
                         PotentialModel::HarmonicFixed, gso,
                         eng.coupling_override);

  SequenceReport rep;
  double t0 = 0.0;
  WaveFunction psi = std::move(gs.psi);
  auto mark = [&](const std::string& label, double t) {
    rep.timeline.emplace_back(label, t);
  };
  auto append = [&](const GpeObservables& obs) {
    const size_t start = rep.times.empty() ? 0 : 1;
    for (size_t i = start; i < obs.times.size(); ++i) {
      rep.times.push_back(obs.times[i]);
      rep.widths.push_back(obs.cap_widths[i]);
    }
  };
  PropagationOptions po;
  po.dt = eng.dt;
  po.observe_dt = eng.observe_dt;
  po.workers = eng.workers;

  auto run_span = [&](const std::function<TrapSnapshot(double)>& trap,
                      double t1) {
    auto res = propagate(std::move(psi), species, trap,
                         PotentialModel::HarmonicFixed, frame, t0, t1, po,
                         eng.coupling_override);
    append(res.observables);
    psi = std::move(res.psi);
    t0 = t1;
  };

  mark("transport", 0.0);
  if (plan.hold > 0.0) mark("hold", sched.tf());
  run_span([&](double t) { return trap_snapshot(sched, t); },
           sched.tf() + plan.hold);

  const double z_release = sample_series(frame.times, frame.Z_a, t0);
  TrapSnapshot off{};
  TrapSnapshot lens{};
  lens.omega_x = 2.0 * M_PI * plan.lens.frequencies_hz[0];
  lens.omega_y = 2.0 * M_PI * plan.lens.frequencies_hz[1];
  lens.omega_z = 2.0 * M_PI * plan.lens.frequencies_hz[2];
  lens.z_t = z_release;

  if (plan.free1 > 0.0) {
    mark("free1", t0);
    run_span([&](double) { return off; }, t0 + plan.free1);
  }
  if (plan.lens.duration > 0.0) {
    mark("lens", t0);
    run_span([&](double) { return lens; }, t0 + plan.lens.duration);
  }
  mark("free2", t0);
  run_span([&](double) { return off; }, t0 + plan.free2);
  return rep;
}

} // namespace

SequenceReport run_sequence(const SequencePlan& plan,
                            const AtomSpecies& species) {
  plan.validate();
  SequenceReport rep = (plan.engine == SequenceEngine::Scaling)
                           ? run_scaling(plan, species)
                           : run_gpe(plan, species);

  // Asymptotic rates: linear fit over the trailing 20 ms of free2.
  const double window = std::min(20e-3, 0.5 * plan.free2);
  rep.rates = fit_expansion_rates(rep.times, rep.widths, window);
  const auto T = expansion_temperature(species, rep.rates);
  rep.T_3d = T.T_3d;
  rep.T_1d = T.T_1d;

  // Fit residual over the same window.
  const double t_lo = rep.times.back() - window;
  size_t i0 = 0;
  while (i0 + 2 < rep.times.size() && rep.times[i0] < t_lo) ++i0;
  for (int a = 0; a < 3; ++a) {
    double sw = 0.0, st = 0.0;
    size_t n = 0;
    for (size_t i = i0; i < rep.times.size(); ++i, ++n) {
      sw += rep.widths[i][a];
      st += rep.times[i];
    }
    const double wbar = sw / n, tbar = st / n;
    double ss = 0.0;
    for (size_t i = i0; i < rep.times.size(); ++i) {
      const double fit = wbar + rep.rates[a] * (rep.times[i] - tbar);
      ss += std::pow(rep.widths[i][a] - fit, 2);
    }
    rep.rate_residual[a] = std::sqrt(ss / n);
  }
  return rep;
}

DkcScanResult optimize_hold_and_lens(const SequencePlan& plan_template,
                                     const AtomSpecies& species,
                                     const std::vector<double>& hold_values,
                                     const std::vector<double>& lens_values,
                                     int workers) {
  if (hold_values.empty() || lens_values.empty())
    throw UsageError("optimize_hold_and_lens: empty scan ranges");
  plan_template.validate();
  if (plan_template.engine != SequenceEngine::Scaling)
    throw UsageError("optimize_hold_and_lens: scans use the scaling engine");

  DkcScanResult out;
  out.hold_values = hold_values;
  out.lens_values = lens_values;
  out.T_map.assign(hold_values.size() * lens_values.size(), 0.0);

  auto cell = [&](size_t ih, size_t il) {
    SequencePlan p = plan_template;
    p.hold = hold_values[ih];
    p.lens.duration = lens_values[il];
    out.T_map[ih * lens_values.size() + il] = run_sequence(p, species).T_3d;
  };
  const size_t total = hold_values.size() * lens_values.size();
  auto run_range = [&](size_t lo, size_t hi) {
    for (size_t k = lo; k < hi; ++k)
      cell(k / lens_values.size(), k % lens_values.size());
  };
  const size_t w = std::clamp<size_t>(workers, 1, total);
  if (w == 1) {
    run_range(0, total);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (total + w - 1) / w;
    for (size_t k = 0; k < w; ++k)
      pool.emplace_back(run_range, k * chunk, std::min(total, (k + 1) * chunk));
    for (auto& t : pool) t.join();
  }

  size_t best = 0;
  for (size_t k = 1; k < total; ++k) {
    const double tk = out.T_map[k], tb = out.T_map[best];
    const double dk = hold_values[k / lens_values.size()] +
                      lens_values[k % lens_values.size()];
    const double db = hold_values[best / lens_values.size()] +
                      lens_values[best % lens_values.size()];
    if (tk < tb || (tk == tb && dk < db)) best = k;
  }
  out.best = plan_template;
  out.best.hold = hold_values[best / lens_values.size()];
  out.best.lens.duration = lens_values[best % lens_values.size()];
  out.best_T = out.T_map[best];
  return out;
}

std::vector<double> release_timing_hint(const std::vector<double>& times,
                                        const std::vector<double>& weak_widths) {
  if (times.size() != weak_widths.size() || times.size() < 5)
    throw UsageError("release_timing_hint: series too short");
  const auto [lo, hi] =
      std::minmax_element(weak_widths.begin(), weak_widths.end());
  const double span = *hi - *lo;
  if (!(span > 1e-3 * *hi))
    throw NoOscillation("release_timing_hint: no size oscillation in series");

  std::vector<double> hints;
  for (size_t i = 1; i + 1 < times.size(); ++i) {
    if (!(weak_widths[i] > weak_widths[i - 1] &&
          weak_widths[i] >= weak_widths[i + 1]))
      continue;
    if (weak_widths[i] - *lo < 0.5 * span) continue; // minor ripples
    // quadratic refinement of the peak time
    const double a = weak_widths[i - 1], b = weak_widths[i],
                 c = weak_widths[i + 1];
    const double den = a - 2.0 * b + c;
    const double shift = (std::abs(den) > 0.0) ? 0.5 * (a - c) / den : 0.0;
    const double dt = times[i] - times[i - 1];
    hints.push_back(times[i] + std::clamp(shift, -0.5, 0.5) * dt + 1e-3);
  }
  if (hints.empty())
    throw NoOscillation("release_timing_hint: no size maxima found");
  return hints;
}

} // namespace atomchip
