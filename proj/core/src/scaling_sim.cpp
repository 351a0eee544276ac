#include "atomchip/scaling_sim.hpp"

#include <cmath>
#include <iostream>

#include "atomchip/constants.hpp"
#include "atomchip/errors.hpp"

namespace atomchip {

double TrapFrequencySchedule::total_duration() const {
  double t = 0.0;
  for (const auto& seg : segments) t += seg.duration;
  return t;
}

Vec3 initial_tf_radii(const AtomSpecies& species, const Vec3& omega0) {
  for (int a = 0; a < 3; ++a)
    if (!(omega0[a] > 0.0))
      throw NonPositiveFrequency("initial_tf_radii: omega must be positive");
  const double wbar = std::cbrt(omega0[0] * omega0[1] * omega0[2]);
  const double a_osc = std::sqrt(constants::hbar / (species.mass * wbar));
  const double par = species.atom_number * species.a_s / a_osc;
  if (par < 100.0)
    std::cerr << "initial_tf_radii: N a_s / a_osc = " << par
              << " < 100, Thomas-Fermi limit questionable\n";
  const double r_bar = a_osc * std::pow(15.0 * par, 0.2);
  Vec3 r;
  for (int a = 0; a < 3; ++a) r[a] = r_bar * wbar / omega0[a];
  return r;
}

namespace {

struct State6 {
  Vec3 l, ld;
};

State6 deriv(const State6& s, const Vec3& w2_now, const Vec3& w2_0) {
  const double vol = s.l[0] * s.l[1] * s.l[2];
  State6 d;
  d.l = s.ld;
  for (int a = 0; a < 3; ++a)
    d.ld[a] = -w2_now[a] * s.l[a] + w2_0[a] / (s.l[a] * vol);
  return d;
}

} // namespace

ScalingSeries integrate_scaling(const TrapFrequencySchedule& schedule,
                                const Vec3& omega0, double output_dt,
                                ScalingState initial) {
  Vec3 w2_0;
  for (int a = 0; a < 3; ++a) w2_0[a] = omega0[a] * omega0[a];

  State6 s{initial.lambda, initial.lambda_dot};
  double t = initial.t;

  ScalingSeries out;
  out.times.push_back(t);
  out.lambda.push_back(s.l);
  out.lambda_dot.push_back(s.ld);
  double next_record = t + output_dt;

  auto check = [&](const State6& st) {
    for (int a = 0; a < 3; ++a)
      if (!(st.l[a] > 1e-6))
        throw CollapseDetected("integrate_scaling: lambda below 1e-6 at t = " +
                               std::to_string(t));
  };

  for (const auto& seg : schedule.segments) {
    if (seg.duration <= 0.0) continue;
    if (!(seg.dt > 0.0))
      throw UsageError("integrate_scaling: segment dt must be positive");
    const long n = std::lround(std::ceil(seg.duration / seg.dt - 1e-9));
    const double dt = seg.duration / static_cast<double>(n);
    const double t_seg0 = t;
    for (long i = 0; i < n; ++i) {
      const double tl = i * dt; // local segment time
      auto w2_at = [&](double tloc) {
        Vec3 w = seg.omega ? seg.omega(tloc) : Vec3{0, 0, 0};
        Vec3 w2;
        for (int a = 0; a < 3; ++a) w2[a] = w[a] * w[a];
        return w2;
      };
      const State6 k1 = deriv(s, w2_at(tl), w2_0);
      State6 s2{s.l + k1.l * (0.5 * dt), s.ld + k1.ld * (0.5 * dt)};
      const Vec3 w2_mid = w2_at(tl + 0.5 * dt);
      const State6 k2 = deriv(s2, w2_mid, w2_0);
      State6 s3{s.l + k2.l * (0.5 * dt), s.ld + k2.ld * (0.5 * dt)};
      const State6 k3 = deriv(s3, w2_mid, w2_0);
      State6 s4{s.l + k3.l * dt, s.ld + k3.ld * dt};
      const State6 k4 = deriv(s4, w2_at(tl + dt), w2_0);
      s.l = s.l + (k1.l + k2.l * 2.0 + k3.l * 2.0 + k4.l) * (dt / 6.0);
      s.ld = s.ld + (k1.ld + k2.ld * 2.0 + k3.ld * 2.0 + k4.ld) * (dt / 6.0);
      t = t_seg0 + (i + 1) * dt;
      check(s);
      if (t >= next_record - 1e-12) {
        out.times.push_back(t);
        out.lambda.push_back(s.l);
        out.lambda_dot.push_back(s.ld);
        next_record += output_dt;
      }
    }
    if (out.times.back() != t) {
      out.times.push_back(t);
      out.lambda.push_back(s.l);
      out.lambda_dot.push_back(s.ld);
    }
  }
  return out;
}

std::vector<Vec3> width_series(const ScalingSeries& series, const Vec3& R0) {
  const double inv = 1.0 / std::sqrt(7.0);
  std::vector<Vec3> w(series.lambda.size());
  for (size_t i = 0; i < w.size(); ++i)
    for (int a = 0; a < 3; ++a) w[i][a] = R0[a] * series.lambda[i][a] * inv;
  return w;
}

ExpansionTemperature expansion_temperature(const AtomSpecies& species,
                                           const Vec3& width_rates) {
  ExpansionTemperature out;
  double sum = 0.0;
  for (int a = 0; a < 3; ++a) {
    const double e = species.mass * width_rates[a] * width_rates[a];
    out.T_1d[a] = e / constants::k_B;
    sum += e;
  }
  out.T_3d = sum / (3.0 * constants::k_B);
  return out;
}

Vec3 fit_expansion_rates(const std::vector<double>& times,
                         const std::vector<Vec3>& widths, double window) {
  if (times.size() != widths.size() || times.size() < 2)
    throw UsageError("fit_expansion_rates: mismatched or short series");
  const double t_lo = times.back() - window;
  size_t i0 = 0;
  while (i0 + 2 < times.size() && times[i0] < t_lo) ++i0;
  const size_t n = times.size() - i0;
  if (n < 2) throw InsufficientSamples("fit_expansion_rates: window too small");
  Vec3 rates;
  for (int a = 0; a < 3; ++a) {
    double st = 0, sw = 0, stt = 0, stw = 0;
    for (size_t i = i0; i < times.size(); ++i) {
      st += times[i];
      sw += widths[i][a];
      stt += times[i] * times[i];
      stw += times[i] * widths[i][a];
    }
    const double den = n * stt - st * st;
    rates[a] = (n * stw - st * sw) / den;
  }
  return rates;
}

} // namespace atomchip
