#include "qlockin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qlockin/rng.hpp"

namespace qlockin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

using cd = std::complex<double>;

struct Mat2 {
  cd a, b, c, d;  // [[a, b], [c, d]]
  Mat2 operator*(const Mat2& o) const {
    return {a * o.a + b * o.c, a * o.b + b * o.d, c * o.a + d * o.c,
            c * o.b + d * o.d};
  }
};

SpinState apply(const Mat2& u, const SpinState& s) {
  return {u.a * s.up + u.b * s.down, u.c * s.up + u.d * s.down};
}

// exp(-i theta/2 (nx sx + ny sy + nz sz)) for a unit axis n.
Mat2 axis_rotation(double theta, double nx, double ny, double nz) {
  const double c = std::cos(0.5 * theta);
  const double s = std::sin(0.5 * theta);
  return {cd(c, -s * nz), cd(-s * ny, -s * nx), cd(s * ny, -s * nx),
          cd(c, s * nz)};
}

// exp(-i dt (m_z sz + w cos(chi) sx + w sin(chi) sy)/2), exact.
Mat2 segment_unitary(double m_z, double w, double chi, double dt) {
  const double mag = std::hypot(m_z, w);
  if (mag == 0.0) return {1.0, 0.0, 0.0, 1.0};
  const double theta = mag * dt;
  return axis_rotation(theta, w * std::cos(chi) / mag, w * std::sin(chi) / mag,
                       m_z / mag);
}

Mat2 inplane_rotation(double theta, double chi) {
  return axis_rotation(theta, std::cos(chi), std::sin(chi), 0.0);
}

// Readout axis for a given rf phase, referenced to the frame set by the
// programmed ideal pi train: the net train operator is either a z rotation
// (even count) or an in-plane pi rotation (odd count); folding it into the
// final pulse phase makes the fringe read 1/2 + (A/2) cos(phi + phi_rf)
// with full contrast at zero field for every train.
double readout_axis(const PulseSequence& seq, double phi_rf) {
  Mat2 g{1.0, 0.0, 0.0, 1.0};
  for (const auto& p : seq.pulses) {
    g = inplane_rotation(p.rotation_angle, p.axis_phase) * g;
  }
  if (seq.n_pi() % 2 == 0) {
    const double beta = std::arg(g.d / g.a);
    return std::numbers::pi + beta - phi_rf;
  }
  const double two_mu = std::arg(g.c / g.b);
  return two_mu + phi_rf;
}

void propagate_free(SpinState& state, const ShiftSignal& m, double t0,
                    double t1, double dt_max) {
  if (t1 - t0 <= 0.0) return;
  const int steps = std::max(
      1, static_cast<int>(std::ceil((t1 - t0) / std::max(dt_max, 1e-300))));
  const double h = (t1 - t0) / steps;
  for (int j = 0; j < steps; ++j) {
    const double tm = t0 + (j + 0.5) * h;
    const double m_z = kTwoPi * m.value_hz(tm);
    state = apply(segment_unitary(m_z, 0.0, 0.0, h), state);
  }
}

}  // namespace

double SpinState::norm() const { return std::sqrt(std::norm(up) + std::norm(down)); }

SpinState evolve_segment(const SpinState& state, const HamiltonianSegment& seg) {
  if (!(seg.dt > 0.0)) throw std::invalid_argument("segment dt must be > 0");
  if (!std::isfinite(seg.m_z) || !std::isfinite(seg.w_y)) {
    throw std::invalid_argument("segment coefficients must be finite");
  }
  if (std::abs(state.norm() - 1.0) > 1e-6) {
    throw std::domain_error("input state is not normalized");
  }
  return apply(segment_unitary(seg.m_z, seg.w_y, 0.5 * std::numbers::pi, seg.dt),
               state);
}

double default_dt_max(double max_frequency_hz, double tau_arm) {
  double dt = tau_arm > 0.0 ? tau_arm / 50.0 : 1e-3;
  if (max_frequency_hz > 0.0) {
    dt = std::min(dt, 1.0 / (100.0 * max_frequency_hz));
  }
  return dt;
}

double run_experiment(const PulseSequence& seq, const ShiftSignal& m,
                      double phi_rf, const ExperimentOptions& opts) {
  const double f_max = std::max(m.max_frequency_hz, 0.0);
  double dt_max = opts.dt_max;
  if (dt_max <= 0.0) {
    dt_max = default_dt_max(f_max, seq.tau_arm > 0.0 ? seq.tau_arm
                                                     : seq.total_duration);
  } else if (f_max > 0.0 && dt_max > 1.0 / (100.0 * f_max) * (1.0 + 1e-9)) {
    throw std::invalid_argument(
        "dt_max too coarse: M(t) would vary by more than ~1% per step");
  }

  double pulse_len = 0.0;
  if (opts.pulse_model == PulseModel::finite) {
    if (!(opts.rabi_rad_per_s > 0.0)) {
      throw std::invalid_argument("finite pulse model requires rabi_rad_per_s > 0");
    }
    pulse_len = std::numbers::pi / opts.rabi_rad_per_s;
    for (std::size_t i = 0; i < seq.n_pi(); ++i) {
      const double t = seq.pulses[i].time;
      const double prev = i == 0 ? 0.0 : seq.pulses[i - 1].time + 0.5 * pulse_len;
      if (t - 0.5 * pulse_len < prev || t + 0.5 * pulse_len > seq.total_duration) {
        throw std::invalid_argument("finite-duration pulses overlap");
      }
    }
  }

  SpinState state;  // |up>
  state = apply(inplane_rotation(0.5 * std::numbers::pi, 0.0), state);

  double cursor = 0.0;
  for (const auto& p : seq.pulses) {
    if (opts.pulse_model == PulseModel::ideal) {
      propagate_free(state, m, cursor, p.time, dt_max);
      state = apply(
          inplane_rotation(p.rotation_angle * opts.pulse_area_scale, p.axis_phase),
          state);
      cursor = p.time;
    } else {
      const double a = p.time - 0.5 * pulse_len;
      const double b = p.time + 0.5 * pulse_len;
      propagate_free(state, m, cursor, a, dt_max);
      // Drive and shift act together during the pulse.
      const int steps =
          std::max(1, static_cast<int>(std::ceil(pulse_len / dt_max)));
      const double h = pulse_len / steps;
      const double w = opts.rabi_rad_per_s * opts.pulse_area_scale;
      for (int j = 0; j < steps; ++j) {
        const double tm = a + (j + 0.5) * h;
        state = apply(segment_unitary(kTwoPi * m.value_hz(tm), w, p.axis_phase, h),
                      state);
      }
      cursor = b;
    }
  }
  propagate_free(state, m, cursor, seq.total_duration, dt_max);

  state = apply(inplane_rotation(0.5 * std::numbers::pi, readout_axis(seq, phi_rf)),
                state);
  return std::norm(state.up);
}

double run_experiment(const PulseSequence& seq, const SignalModel& signal,
                      const NoiseRealization& noise, double kappa_hz_per_tesla,
                      double phi_rf, const ExperimentOptions& opts) {
  const auto m = shift_sum(
      shift_from_signal(signal, 0.0, seq.total_duration),
      shift_from_noise(noise, kappa_hz_per_tesla, seq.total_duration));
  return run_experiment(seq, m, phi_rf, opts);
}

long sample_shots(double p_up, long shots, std::uint64_t seed) {
  if (!(p_up >= 0.0 && p_up <= 1.0)) {
    throw std::invalid_argument("p_up must lie in [0, 1]");
  }
  if (shots < 0) throw std::invalid_argument("shots must be >= 0");
  auto rng = make_rng(seed);
  std::binomial_distribution<long> bin(shots, p_up);
  return bin(rng);
}

}  // namespace qlockin
