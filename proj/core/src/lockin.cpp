#include "qlockin/lockin.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace qlockin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// 8-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNodes[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
    -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
    0.7966664774136267,  0.9602898564975363};
constexpr double kGlWeights[8] = {
    0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
    0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
    0.2223810344533745, 0.1012285362903763};

double integrate_panel(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double s = 0.0;
  for (int i = 0; i < 8; ++i) s += kGlWeights[i] * f(c + h * kGlNodes[i]);
  return s * h;
}

// Composite Gauss-Legendre over [a, b]; panel width bounded by the fastest
// oscillation so the 8-point rule stays at machine accuracy.
double integrate_smooth(const std::function<double(double)>& f, double a,
                        double b, double max_freq) {
  const double len = b - a;
  if (len <= 0.0) return 0.0;
  int panels = 1;
  if (max_freq > 0.0) {
    panels = std::max(1, static_cast<int>(std::ceil(len * max_freq * 4.0)));
  }
  panels = std::min(panels, 1 << 20);
  const double h = len / panels;
  double s = 0.0;
  for (int i = 0; i < panels; ++i) {
    s += integrate_panel(f, a + i * h, a + (i + 1) * h);
  }
  return s;
}

}  // namespace

double ClassicalIQ::magnitude() const { return std::hypot(i, q); }
double ClassicalIQ::phase() const { return std::atan2(q, i); }

ShiftSignal shift_from_signal(const SignalModel& s, double t0, double t1) {
  ShiftSignal out;
  out.value_hz = [s](double t) { return eval_signal(s, t); };
  out.breakpoints = signal_breakpoints(s, t0, t1);
  out.max_abs_hz = std::abs(s.amplitude_hz);
  out.max_frequency_hz = s.frequency_hz;
  return out;
}

ShiftSignal shift_from_noise(const NoiseRealization& r, double kappa,
                             double horizon) {
  ShiftSignal out;
  out.value_hz = [r, kappa](double t) { return kappa * eval_field(r, t); };
  out.max_abs_hz = kappa * max_abs_field(r, horizon);
  double fmax = 0.0;
  for (const auto& t : r.tones) fmax = std::max(fmax, t.frequency_hz);
  out.max_frequency_hz = fmax;
  return out;
}

ShiftSignal shift_sum(const ShiftSignal& a, const ShiftSignal& b) {
  ShiftSignal out;
  auto fa = a.value_hz, fb = b.value_hz;
  out.value_hz = [fa, fb](double t) { return fa(t) + fb(t); };
  out.breakpoints = a.breakpoints;
  out.breakpoints.insert(out.breakpoints.end(), b.breakpoints.begin(),
                         b.breakpoints.end());
  std::sort(out.breakpoints.begin(), out.breakpoints.end());
  out.max_abs_hz = a.max_abs_hz + b.max_abs_hz;
  out.max_frequency_hz = std::max(a.max_frequency_hz, b.max_frequency_hz);
  return out;
}

ShiftSignal shift_from_samples(std::vector<double> times,
                               std::vector<double> values_hz) {
  if (times.size() != values_hz.size() || times.size() < 2) {
    throw std::invalid_argument("need matching time/value series of length >= 2");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw std::invalid_argument("sample times must be sorted");
  }
  ShiftSignal out;
  double vmax = 0.0;
  for (double v : values_hz) vmax = std::max(vmax, std::abs(v));
  out.max_abs_hz = vmax;
  out.breakpoints = times;
  // Nyquist-ish bound for the interpolant.
  double dt_min = times.back() - times.front();
  for (std::size_t i = 1; i < times.size(); ++i) {
    dt_min = std::min(dt_min, times[i] - times[i - 1]);
  }
  out.max_frequency_hz = dt_min > 0.0 ? 0.5 / dt_min : 0.0;
  out.value_hz = [t = std::move(times), v = std::move(values_hz)](double x) {
    auto it = std::upper_bound(t.begin(), t.end(), x);
    if (it == t.begin()) return v.front();
    if (it == t.end()) return v.back();
    const std::size_t i = static_cast<std::size_t>(it - t.begin());
    const double w = (x - t[i - 1]) / (t[i] - t[i - 1]);
    return v[i - 1] + w * (v[i] - v[i - 1]);
  };
  return out;
}

Quadratures quadratures(const ShiftSignal& m, const PulseSequence& seq) {
  // Merge toggling flips with the input's own discontinuities.
  std::vector<double> cuts = toggling_breakpoints(seq);
  for (double b : m.breakpoints) {
    if (b > 0.0 && b < seq.total_duration) cuts.push_back(b);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double integral = 0.0;  // Int M(t) y(t) dt, Hz*s
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1];
    if (b - a <= 0.0) continue;
    const double sign = toggling_value(seq, 0.5 * (a + b));
    integral += sign * integrate_smooth(m.value_hz, a, b, m.max_frequency_hz);
  }

  Quadratures q;
  q.phi_lockin = kTwoPi * integral;
  q.z_component = 0.0;  // sin term vanishes for ideal pi trains
  const double f_m = seq.modulation_frequency();
  q.weak_coupling_violated = f_m > 0.0 && !weak_coupling_ok(m.max_abs_hz, f_m);
  return q;
}

ClassicalIQ classical_lockin(const std::vector<double>& samples, double dt,
                             double f_m) {
  if (samples.size() < 2) throw std::invalid_argument("need at least 2 samples");
  if (!(dt > 0.0) || !(f_m > 0.0)) {
    throw std::invalid_argument("dt and f_m must be > 0");
  }
  if (dt > 1.0 / (20.0 * f_m)) {
    throw std::invalid_argument("undersampled: need >= 20 samples per 1/f_m period");
  }
  const std::size_t n = samples.size();
  const double duration = dt * static_cast<double>(n - 1);
  double si = 0.0, sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = dt * static_cast<double>(k);
    const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
    si += w * samples[k] * std::cos(kTwoPi * f_m * t);
    sq += w * samples[k] * std::sin(kTwoPi * f_m * t);
  }
  ClassicalIQ out;
  out.i = si * dt / duration;
  out.q = sq * dt / duration;
  return out;
}

double filter_weight(std::size_t n, double tau_arm, double omega) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  if (!(tau_arm > 0.0)) throw std::invalid_argument("tau_arm must be > 0");
  if (omega < 0.0) throw std::invalid_argument("omega must be >= 0");

  const double x = omega * tau_arm;
  if (x < 1e-8) {
    // W -> -N w tau^2 near dc.
    return -static_cast<double>(n) * omega * tau_arm * tau_arm;
  }
  const double m_near = std::round(x / std::numbers::pi);
  const double dist = std::abs(x - m_near * std::numbers::pi);
  if (dist < 1e-7) {
    const auto m = static_cast<long long>(m_near);
    if (m % 2 == 0) return 0.0;  // sin^2(x/2) vanishes
    // sin(Nx)/sin(x) -> N (-1)^{m(N-1)} at x = m pi.
    const double ratio = static_cast<double>(n) *
                         ((m * static_cast<long long>(n - 1)) % 2 == 0 ? 1.0 : -1.0);
    return -4.0 / omega * ratio;
  }
  const double s = std::sin(0.5 * x);
  return -4.0 / omega * s * s * std::sin(static_cast<double>(n) * x) / std::sin(x);
}

std::complex<double> tone_response(const PulseSequence& seq, double omega) {
  const auto cuts = toggling_breakpoints(seq);
  std::complex<double> total = 0.0;
  double sign = 1.0;
  if (std::abs(omega) * seq.total_duration < 1e-9) {
    // Series expansion: Int e^{iwt} ~ (b-a) + i w (b^2-a^2)/2.
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      const double a = cuts[k], b = cuts[k + 1];
      total += sign * std::complex<double>(b - a, 0.5 * omega * (b * b - a * a));
      sign = -sign;
    }
    return total;
  }
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
    const double a = cuts[k], b = cuts[k + 1];
    const std::complex<double> ea(std::cos(omega * a), std::sin(omega * a));
    const std::complex<double> eb(std::cos(omega * b), std::sin(omega * b));
    total += sign * (eb - ea);
    sign = -sign;
  }
  return total / std::complex<double>(0.0, omega);
}

double slow_drift_contrast_factor(std::size_t n_pi, double tau_arm,
                                  double slow_drift_hz2) {
  if (slow_drift_hz2 <= 0.0) return 1.0;
  // phi = 2 pi * slope * (N+1) tau^2 / 2 per unit slope; Gaussian average
  // over slope gives exp(-phi_rms^2 / 2).
  const double phi_rms = 2.0 * std::numbers::pi * std::numbers::pi *
                         slow_drift_hz2 * static_cast<double>(n_pi + 1) *
                         tau_arm * tau_arm;
  return std::exp(-0.5 * phi_rms * phi_rms);
}

double predicted_contrast(std::size_t n_pi, double tau_arm,
                          const ToneSpectrum& spectrum) {
  if (n_pi < 1) throw std::invalid_argument("n_pi must be >= 1");
  if (!(tau_arm > 0.0)) throw std::invalid_argument("tau_arm must be > 0");
  const auto seq = make_cpmg(n_pi, tau_arm);
  double a = 1.0;
  for (const auto& tone : spectrum.tones) {
    const double omega = kTwoPi * tone.frequency_hz;
    const double kernel = std::abs(tone_response(seq, omega));
    const double arg =
        kTwoPi * spectrum.kappa_hz_per_tesla * tone.amplitude_tesla * kernel;
    a *= std::cyl_bessel_j(0.0, std::abs(arg));
  }
  return a * slow_drift_contrast_factor(n_pi, tau_arm, spectrum.slow_drift_hz2);
}

bool weak_coupling_ok(double max_abs_m_hz, double f_m_hz) {
  if (!(f_m_hz > 0.0)) throw std::invalid_argument("f_m must be > 0");
  return std::abs(max_abs_m_hz) / f_m_hz < 0.1;
}

}  // namespace qlockin
