#include "atomchip/classical_sim.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "atomchip/errors.hpp"

namespace atomchip {

namespace {

struct TrapAt {
  double omega2;
  double z_t;
  double inv_L3; // 0 for the harmonic model
};

// Trap parameters at time t: interpolated during transport, frozen at the
// final grid values during hold.
TrapAt trap_at(const RampSchedule& s, TrapModel model, double t) {
  TrapAt out;
  if (t >= s.tf()) {
    const double w = s.omega_z.back();
    out.omega2 = w * w;
    out.z_t = s.z_t.back();
    out.inv_L3 =
        (model == TrapModel::Anharmonic && !s.L3.empty()) ? 1.0 / s.L3.back() : 0.0;
  } else {
    const double w = sample_series(s.times, s.omega_z, t);
    out.omega2 = w * w;
    out.z_t = sample_series(s.times, s.z_t, t);
    out.inv_L3 = (model == TrapModel::Anharmonic && !s.L3.empty())
                     ? 1.0 / sample_series(s.times, s.L3, t)
                     : 0.0;
  }
  return out;
}

double accel(const TrapAt& trap, double z) {
  const double d = z - trap.z_t;
  return -trap.omega2 * d * (1.0 + d * trap.inv_L3);
}

template <typename Accel>
void rk4_step(double t, double dt, double& z, double& v, Accel&& acc) {
  const double k1v = acc(t, z);
  const double k1z = v;
  const double k2v = acc(t + 0.5 * dt, z + 0.5 * dt * k1z);
  const double k2z = v + 0.5 * dt * k1v;
  const double k3v = acc(t + 0.5 * dt, z + 0.5 * dt * k2z);
  const double k3z = v + 0.5 * dt * k2v;
  const double k4v = acc(t + dt, z + dt * k3z);
  const double k4z = v + dt * k3v;
  z += dt / 6.0 * (k1z + 2 * k2z + 2 * k3z + k4z);
  v += dt / 6.0 * (k1v + 2 * k2v + 2 * k3v + k4v);
}

} // namespace

double frozen_trap_energy_drift(const RampSchedule& schedule) {
  const double w = schedule.omega_z.back();
  const double zt = schedule.z_t.back();
  const double dt = schedule.dt();
  const double period = 2.0 * M_PI / w;
  const int n = std::max(4, static_cast<int>(std::ceil(period / dt)));
  double z = zt + 1e-6, v = 0.0;
  auto acc = [&](double, double zz) { return -w * w * (zz - zt); };
  const double e0 = 0.5 * v * v + 0.5 * w * w * (z - zt) * (z - zt);
  for (int i = 0; i < n; ++i) rk4_step(i * dt, dt, z, v, acc);
  const double e1 = 0.5 * v * v + 0.5 * w * w * (z - zt) * (z - zt);
  return std::abs(e1 - e0) / e0;
}

ClassicalResult integrate(const RampSchedule& schedule, TrapModel model,
                          double hold_time,
                          std::optional<ClassicalState> initial) {
  if (schedule.size() < 2) throw UsageError("integrate: schedule too short");
  if (hold_time < 0.0) throw UsageError("integrate: hold_time must be >= 0");
  if (frozen_trap_energy_drift(schedule) > 1e-9)
    throw StepTooLarge("integrate: energy drift above 1e-9 per period at the schedule step");

  const double dt = schedule.dt();
  const double tf = schedule.tf();
  const double z_f = schedule.z_t.back();
  const int n_transport = static_cast<int>(schedule.size()) - 1;
  const int n_hold = static_cast<int>(std::ceil(hold_time / dt));

  double z = initial ? initial->z : schedule.z_t.front();
  double v = initial ? initial->v : 0.0;
  auto acc = [&](double t, double zz) { return accel(trap_at(schedule, model, t), zz); };

  ClassicalResult out;
  out.trajectory.reserve(n_transport + n_hold + 1);
  out.metrics.ramp_tf = tf;

  double max_off = 0.0, max_anh = 0.0;
  double hold_min = z_f, hold_max = z_f;
  for (int i = 0; i <= n_transport + n_hold; ++i) {
    const double t = i * dt;
    out.trajectory.push_back({t, z, v});
    if (t <= tf) {
      const TrapAt trap = trap_at(schedule, model, t);
      const double off = std::abs(z - trap.z_t);
      max_off = std::max(max_off, off);
      if (!schedule.L3.empty()) {
        const double L3 = (t >= tf) ? schedule.L3.back()
                                    : sample_series(schedule.times, schedule.L3, t);
        max_anh = std::max(max_anh, 100.0 * off / L3);
      }
    }
    if (t >= tf) {
      hold_min = std::min(hold_min, z);
      hold_max = std::max(hold_max, z);
    }
    if (i < n_transport + n_hold) rk4_step(t, dt, z, v, acc);
  }
  out.metrics.max_offset = max_off;
  out.metrics.anharmonicity_pct = max_anh;
  out.metrics.residual_amplitude = 0.5 * (hold_max - hold_min);
  return out;
}

std::vector<TransportMetrics> ramp_time_scan(const TrajectoryAnsatz& family,
                                             const TrapTables& tables,
                                             const std::vector<double>& tf_values,
                                             TrapModel model, double hold_time,
                                             int workers) {
  for (double tf : tf_values)
    if (tf < 10e-3)
      throw UsageError("ramp_time_scan: ramp times below 10 ms are not supported");
  std::vector<TransportMetrics> out(tf_values.size());
  auto run = [&](size_t lo, size_t hi) {
    for (size_t i = lo; i < hi; ++i) {
      TrajectoryAnsatz an = family;
      an.t_f = tf_values[i];
      const int n_steps = std::max(1000, static_cast<int>(an.t_f / 10e-6)) + 1;
      const RampSchedule sched = design_ramp(an, tables, n_steps);
      out[i] = integrate(sched, model, hold_time).metrics;
    }
  };
  const size_t n = tf_values.size();
  size_t w = std::clamp<size_t>(workers, 1, n);
  if (w == 1) {
    run(0, n);
  } else {
    std::vector<std::thread> pool;
    const size_t chunk = (n + w - 1) / w;
    for (size_t k = 0; k < w; ++k)
      pool.emplace_back(run, k * chunk, std::min(n, (k + 1) * chunk));
    for (auto& t : pool) t.join();
  }
  return out;
}

double perturbation_response(const RampSchedule& schedule,
                             const TrapTables& tables, TrapModel model,
                             double delta_bias, double delta_tf,
                             double hold_time) {
  if (std::abs(delta_bias) > 50e-3 * 1e-4)
    throw UsageError("perturbation_response: |delta_bias| must be <= 50 mG");
  if (std::abs(delta_tf) > 5e-3)
    throw UsageError("perturbation_response: |delta_tf| must be <= 5 ms");

  const double dt = schedule.dt();
  const double span = std::abs(schedule.z_t.back() - schedule.z_t.front());

  if (delta_tf != 0.0) {
    // Mis-clocked waveform generator: replay the schedule rescaled in time.
    const double tf = schedule.tf();
    const double scale = (tf + delta_tf) / tf;
    RampSchedule rescaled = schedule;
    for (auto& t : rescaled.times) t *= scale;
    const auto res = integrate(rescaled, model, hold_time);
    const double z_f = schedule.z_t.back();
    double worst = 0.0;
    for (const auto& st : res.trajectory)
      if (st.t >= rescaled.tf()) worst = std::max(worst, std::abs(st.z - z_f));
    return worst;
  }

  // Bias offset: first-order perturbation sources along the unperturbed
  // trajectory.
  const auto base = integrate(schedule, model, 0.0);
  const size_t n = schedule.size();
  std::vector<double> d_zt(n), d_w2(n);
  for (size_t i = 0; i < n; ++i) {
    // Differenced through the same fitted map so that delta_bias = 0 gives
    // identically zero sources.
    const double zt0 = tables.zt_of_bias(schedule.bias[i]);
    const double zt1 = tables.zt_of_bias(schedule.bias[i] + delta_bias);
    d_zt[i] = zt1 - zt0;
    d_w2[i] = tables.omega_z2(zt1) - tables.omega_z2(zt0);
  }

  std::vector<double> za0(n);
  for (size_t i = 0; i < n; ++i) za0[i] = base.trajectory[i].z;

  auto source_at = [&](double t) {
    const double tq = std::min(t, schedule.tf());
    struct Src { double w2, dzt, drive; } s{};
    s.w2 = std::pow(sample_series(schedule.times, schedule.omega_z, tq), 2);
    s.dzt = sample_series(schedule.times, d_zt, tq);
    const double dw2 = sample_series(schedule.times, d_w2, tq);
    const double off = sample_series(schedule.times, za0, tq) -
                       sample_series(schedule.times, schedule.z_t, tq);
    double anh = 0.0;
    if (model == TrapModel::Anharmonic && !schedule.L3.empty())
      anh = s.w2 / sample_series(schedule.times, schedule.L3, tq) * off * off;
    s.drive = dw2 * off + anh;
    return s;
  };

  const int n_transport = static_cast<int>(n) - 1;
  const int n_hold = static_cast<int>(std::ceil(hold_time / dt));
  double eps = 0.0, deps = 0.0;
  double worst = 0.0;
  for (int i = 0; i <= n_transport + n_hold; ++i) {
    const double t = i * dt;
    if (std::abs(eps) > 0.1 * span)
      throw PerturbationTooLarge("perturbation_response: first-order treatment invalid");
    if (t >= schedule.tf()) worst = std::max(worst, std::abs(eps));
    if (i == n_transport + n_hold) break;
    auto acc = [&](double tt, double e) {
      const auto s = source_at(tt);
      return -s.w2 * (e - s.dzt) - s.drive;
    };
    rk4_step(t, dt, eps, deps, acc);
  }
  return worst;
}

} // namespace atomchip
