#include "atomchip/sta_design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "atomchip/errors.hpp"

namespace atomchip {

void TrajectoryAnsatz::validate() const {
  if (!(t_f > 0.0)) throw ValidationError("TrajectoryAnsatz: t_f must be positive");
  if (z_f == z_i) throw ValidationError("TrajectoryAnsatz: z_f must differ from z_i");
}

namespace {

TrajectoryPoint eval_poly9(const TrajectoryAnsatz& an, double t) {
  const double tf = an.t_f, D = an.z_f - an.z_i;
  const double u = t / tf;
  // s(u) = 126 u^5 - 420 u^6 + 540 u^7 - 315 u^8 + 70 u^9 and derivatives in u.
  const double c[5] = {126, -420, 540, -315, 70};
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  for (int k = 0; k < 5; ++k) {
    const double n = 5 + k;
    const double up = std::pow(u, n - 4);
    s4 += c[k] * n * (n - 1) * (n - 2) * (n - 3) * up;
    s3 += c[k] * n * (n - 1) * (n - 2) * up * u;
    s2 += c[k] * n * (n - 1) * up * u * u;
    s1 += c[k] * n * up * u * u * u;
    s0 += c[k] * up * u * u * u * u;
  }
  return {an.z_i + D * s0, D * s1 / tf, D * s2 / (tf * tf),
          D * s3 / (tf * tf * tf), D * s4 / (tf * tf * tf * tf)};
}

TrajectoryPoint eval_chirped(const TrajectoryAnsatz& an, double t) {
  const double tf = an.t_f, D = an.z_f - an.z_i;
  const double a = an.chirp_a, b = an.chirp_b;
  const double u = t / tf;
  // v(t) = 2 pi (u + a u^2 + b u^3) / (1 + a + b); cubic in t, so v'''' = 0.
  const double c = 2.0 * M_PI / (1.0 + a + b);
  const double v = c * (u + a * u * u + b * u * u * u);
  const double v1 = c * (1.0 + 2.0 * a * u + 3.0 * b * u * u) / tf;
  const double v2 = c * (2.0 * a + 6.0 * b * u) / (tf * tf);
  const double v3 = c * 6.0 * b / (tf * tf * tf);
  // f(v) = D/(12 pi) [6v - 8 sin v + sin 2v]
  const double A = D / (12.0 * M_PI);
  const double f0 = A * (6.0 * v - 8.0 * std::sin(v) + std::sin(2.0 * v));
  const double f1 = A * (6.0 - 8.0 * std::cos(v) + 2.0 * std::cos(2.0 * v));
  const double f2 = A * (8.0 * std::sin(v) - 4.0 * std::sin(2.0 * v));
  const double f3 = A * (8.0 * std::cos(v) - 8.0 * std::cos(2.0 * v));
  const double f4 = A * (-8.0 * std::sin(v) + 16.0 * std::sin(2.0 * v));
  // Chain rule up to fourth order (v'''' = 0).
  TrajectoryPoint p;
  p.z = an.z_i + f0;
  p.v = f1 * v1;
  p.a = f2 * v1 * v1 + f1 * v2;
  p.j = f3 * v1 * v1 * v1 + 3.0 * f2 * v1 * v2 + f1 * v3;
  p.s = f4 * v1 * v1 * v1 * v1 + 6.0 * f3 * v1 * v1 * v2 +
        3.0 * f2 * v2 * v2 + 4.0 * f2 * v1 * v3;
  return p;
}

} // namespace

TrajectoryPoint evaluate_trajectory(const TrajectoryAnsatz& ansatz, double t) {
  if (t < 0.0 || t > ansatz.t_f)
    throw OutOfDomain("evaluate_trajectory: t outside [0, t_f]");
  switch (ansatz.kind) {
    case AnsatzKind::Polynomial9:
      return eval_poly9(ansatz, t);
    case AnsatzKind::ChirpedSine:
      return eval_chirped(ansatz, t);
    case AnsatzKind::Linear: {
      const double D = ansatz.z_f - ansatz.z_i;
      return {ansatz.z_i + D * t / ansatz.t_f, D / ansatz.t_f, 0.0, 0.0, 0.0};
    }
  }
  throw Error("evaluate_trajectory: unknown ansatz kind");
}

double sample_series(const std::vector<double>& times,
                     const std::vector<double>& values, double t) {
  const size_t n = times.size();
  if (n == 0) throw Error("sample_series: empty series");
  if (n == 1 || t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const double dt = times[1] - times[0];
  const size_t i = std::min(n - 2, static_cast<size_t>((t - times[0]) / dt));
  const double u = (t - times[i]) / dt;
  const double y0 = values[i], y1 = values[i + 1];
  const double m0 = (i > 0 ? 0.5 * (values[i + 1] - values[i - 1]) : y1 - y0);
  const double m1 =
      (i + 2 < n ? 0.5 * (values[i + 2] - values[i]) : y1 - y0);
  const double u2 = u * u, u3 = u2 * u;
  return (2 * u3 - 3 * u2 + 1) * y0 + (u3 - 2 * u2 + u) * m0 +
         (-2 * u3 + 3 * u2) * y1 + (u3 - u2) * m1;
}

std::pair<std::vector<double>, double> chi_profile(const RampSchedule& schedule,
                                                   const PadeFit& L3_fit) {
  std::vector<double> chi(schedule.size());
  double chi_max = 0.0;
  for (size_t i = 0; i < schedule.size(); ++i) {
    chi[i] = std::abs((schedule.z_a[i] - schedule.z_t[i]) /
                      L3_fit(schedule.z_t[i]));
    chi_max = std::max(chi_max, chi[i]);
  }
  return {std::move(chi), chi_max};
}

RampSchedule reverse_engineer(const TrajectoryAnsatz& ansatz,
                              const PadeFit& omega2_fit,
                              const PadeFit& bias_fit, int n_steps) {
  ansatz.validate();
  if (ansatz.kind == AnsatzKind::Linear)
    throw UsageError("reverse_engineer: the linear ramp is not an STA ansatz");
  if (omega2_fit.numerator_coeffs.size() != 2 ||
      omega2_fit.denominator_coeffs.size() != 2)
    throw UsageError("reverse_engineer: omega2 fit must have orders (1, 2)");
  if (n_steps < 2) throw UsageError("reverse_engineer: need at least 2 steps");

  const double alpha = omega2_fit.numerator_coeffs[0];
  const double beta = omega2_fit.numerator_coeffs[1];
  const double gamma = omega2_fit.denominator_coeffs[0];
  const double zeta = omega2_fit.denominator_coeffs[1];

  RampSchedule s;
  const int n = n_steps;
  s.times.resize(n);
  s.z_a.resize(n);
  s.z_t.resize(n);
  s.omega_z.resize(n);
  s.bias.resize(n);
  const double dt = ansatz.t_f / (n - 1);

  double z_prev = ansatz.z_i;
  const double jump_window =
      10.0 * std::abs(ansatz.z_f - ansatz.z_i) / (n - 1);
  for (int i = 0; i < n; ++i) {
    const double t = i * dt;
    const auto pt = evaluate_trajectory(ansatz, std::min(t, ansatz.t_f));
    const double A = zeta * pt.a - beta;
    const double B = beta * pt.z + gamma * pt.a - alpha;
    const double C = pt.a + alpha * pt.z;
    double zt;
    if (std::abs(A) < 1e-12 * std::abs(beta)) {
      zt = -C / B;
    } else {
      const double disc = B * B - 4.0 * A * C;
      if (disc < 0.0)
        throw NegativeDiscriminant(
            "reverse_engineer: negative discriminant at t = " +
            std::to_string(t));
      const double sq = std::sqrt(disc);
      const double r1 = (-B + sq) / (2.0 * A);
      const double r2 = (-B - sq) / (2.0 * A);
      zt = (std::abs(r1 - z_prev) <= std::abs(r2 - z_prev)) ? r1 : r2;
    }
    if (i > 0 && std::abs(zt - z_prev) > std::max(jump_window, 1e-9))
      throw RootJump("reverse_engineer: trap-position root jump at t = " +
                     std::to_string(t));
    z_prev = zt;
    s.times[i] = t;
    s.z_a[i] = pt.z;
    s.z_t[i] = zt;
    const double w2 = omega2_fit(zt);
    if (!(w2 > 0.0))
      throw Error("reverse_engineer: non-positive omega_z^2 on schedule");
    s.omega_z[i] = std::sqrt(w2);
    s.bias[i] = bias_fit(zt);
  }
  return s;
}

RampSchedule design_ramp(const TrajectoryAnsatz& ansatz,
                         const TrapTables& tables, int n_steps) {
  RampSchedule s;
  if (ansatz.kind == AnsatzKind::Linear) {
    ansatz.validate();
    const int n = n_steps;
    s.times.resize(n);
    s.z_a.resize(n);
    s.z_t.resize(n);
    s.omega_z.resize(n);
    s.bias.resize(n);
    const double dt = ansatz.t_f / (n - 1);
    for (int i = 0; i < n; ++i) {
      const double t = i * dt;
      const double zt =
          ansatz.z_i + (ansatz.z_f - ansatz.z_i) * t / ansatz.t_f;
      s.times[i] = t;
      s.z_a[i] = zt; // the trap trajectory; the cloud will not follow it
      s.z_t[i] = zt;
      s.omega_z[i] = std::sqrt(tables.omega_z2(zt));
      s.bias[i] = tables.bias_of_zt(zt);
    }
  } else {
    s = reverse_engineer(ansatz, tables.omega_z2, tables.bias_of_zt, n_steps);
  }
  const size_t n = s.size();
  s.omega_x.resize(n);
  s.omega_y.resize(n);
  s.L3.resize(n);
  s.theta.resize(n);
  for (size_t i = 0; i < n; ++i) {
    s.omega_x[i] = std::sqrt(tables.omega_x2(s.z_t[i]));
    s.omega_y[i] = std::sqrt(tables.omega_y2(s.z_t[i]));
    s.L3[i] = tables.L3_of_zt(s.z_t[i]);
    s.theta[i] = tables.theta_of_zt(s.z_t[i]);
  }
  s.chi_max = chi_profile(s, tables.L3_of_zt).second;
  return s;
}

std::pair<double, double> optimize_chirp(const TrajectoryAnsatz& base,
                                         const TrapTables& tables,
                                         int n_steps, double a_lo, double a_hi,
                                         double b_lo, double b_hi, int n_grid) {
  double best_chi = std::numeric_limits<double>::infinity();
  double best_a = a_lo, best_b = b_lo;
  for (int i = 0; i < n_grid; ++i)
    for (int j = 0; j < n_grid; ++j) {
      TrajectoryAnsatz an = base;
      an.kind = AnsatzKind::ChirpedSine;
      an.chirp_a = a_lo + (a_hi - a_lo) * i / double(n_grid - 1);
      an.chirp_b = b_lo + (b_hi - b_lo) * j / double(n_grid - 1);
      if (std::abs(1.0 + an.chirp_a + an.chirp_b) < 1e-6) continue;
      double chi;
      try {
        chi = design_ramp(an, tables, n_steps).chi_max;
      } catch (const Error&) {
        continue;
      }
      if (chi < best_chi ||
          (chi == best_chi &&
           std::pair{an.chirp_a, an.chirp_b} < std::pair{best_a, best_b})) {
        best_chi = chi;
        best_a = an.chirp_a;
        best_b = an.chirp_b;
      }
    }
  if (!std::isfinite(best_chi))
    throw Error("optimize_chirp: no admissible (a, b) in the scanned grid");
  return {best_a, best_b};
}

} // namespace atomchip
