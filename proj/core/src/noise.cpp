#include "qlockin/noise.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

#include "json.hpp"
#include "qlockin/rng.hpp"

namespace qlockin {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_spectrum(const ToneSpectrum& s) {
  if (!(s.kappa_hz_per_tesla > 0.0)) {
    throw std::invalid_argument("kappa must be > 0");
  }
  if (s.slow_drift_hz2 < 0.0) {
    throw std::invalid_argument("slow_drift_hz2 must be >= 0");
  }
  std::set<double> seen;
  for (const auto& t : s.tones) {
    if (!(t.frequency_hz > 0.0)) throw std::invalid_argument("tone frequency must be > 0");
    if (t.amplitude_tesla < 0.0) throw std::invalid_argument("tone amplitude must be >= 0");
    if (!seen.insert(t.frequency_hz).second) {
      throw std::invalid_argument("tone frequencies must be distinct");
    }
  }
}
}  // namespace

NoiseRealization sample_realization(const ToneSpectrum& spectrum, std::uint64_t seed) {
  validate_spectrum(spectrum);
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> uni(0.0, kTwoPi);

  NoiseRealization r;
  r.tones = spectrum.tones;
  r.phases.reserve(spectrum.tones.size());
  for (std::size_t i = 0; i < spectrum.tones.size(); ++i) {
    r.phases.push_back(uni(rng));
  }
  if (spectrum.slow_drift_hz2 > 0.0) {
    std::normal_distribution<double> gauss(0.0, kTwoPi * spectrum.slow_drift_hz2);
    // Slope drawn in Hz/s, stored in field units.
    r.drift_tesla_per_s = gauss(rng) / spectrum.kappa_hz_per_tesla;
  }
  return r;
}

double eval_field(const NoiseRealization& r, double t) {
  double b = r.drift_tesla_per_s * t;
  for (std::size_t i = 0; i < r.tones.size(); ++i) {
    b += r.tones[i].amplitude_tesla *
         std::cos(kTwoPi * r.tones[i].frequency_hz * t + r.phases[i]);
  }
  return b;
}

double max_abs_field(const NoiseRealization& r, double horizon) {
  double b = std::abs(r.drift_tesla_per_s) * horizon;
  for (const auto& t : r.tones) b += t.amplitude_tesla;
  return b;
}

double eval_signal(const SignalModel& s, double t) {
  switch (s.waveform) {
    case Waveform::cosine:
      return s.amplitude_hz * std::cos(kTwoPi * s.frequency_hz * t + s.phase_rad);
    case Waveform::square_unipolar:
    case Waveform::square_bipolar: {
      // First half-period is "on"; phase shifts the pattern.
      double cycles = s.frequency_hz * t + s.phase_rad / kTwoPi;
      double frac = cycles - std::floor(cycles);
      const bool on = frac < 0.5;
      if (s.waveform == Waveform::square_unipolar) {
        return on ? s.amplitude_hz : 0.0;
      }
      return on ? s.amplitude_hz : -s.amplitude_hz;
    }
  }
  return 0.0;
}

std::vector<double> signal_breakpoints(const SignalModel& s, double t0, double t1) {
  std::vector<double> out;
  if (s.waveform == Waveform::cosine || !(s.frequency_hz > 0.0)) return out;
  // Flips at every half period: f*t + phase/2pi = k/2.
  const double half = 0.5 / s.frequency_hz;
  const double offset = -s.phase_rad / (kTwoPi * s.frequency_hz);
  double k = std::ceil((t0 - offset) / half);
  for (double t = offset + k * half; t < t1; t += half) {
    if (t > t0) out.push_back(t);
  }
  return out;
}

std::string to_json(const ToneSpectrum& spectrum) {
  nlohmann::json j;
  j["tones"] = nlohmann::json::array();
  for (const auto& t : spectrum.tones) {
    j["tones"].push_back({{"f_hz", t.frequency_hz}, {"B_tesla", t.amplitude_tesla}});
  }
  j["slow_drift_hz2"] = spectrum.slow_drift_hz2;
  j["kappa_hz_per_tesla"] = spectrum.kappa_hz_per_tesla;
  return j.dump();
}

ToneSpectrum spectrum_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ToneSpectrum s;
  for (const auto& t : j.at("tones")) {
    s.tones.push_back({t.at("f_hz").get<double>(), t.at("B_tesla").get<double>()});
  }
  s.slow_drift_hz2 = j.value("slow_drift_hz2", 0.0);
  s.kappa_hz_per_tesla = j.value("kappa_hz_per_tesla", kDefaultKappaHzPerTesla);
  validate_spectrum(s);
  return s;
}

}  // namespace qlockin
