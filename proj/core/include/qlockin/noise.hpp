#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qlockin {

// Probe coupling derived from a 5.72 MHz splitting at 204 uT (~28.04 Hz/nT).
inline constexpr double kDefaultKappaHzPerTesla = 5.72e6 / 204e-6;

struct Tone {
  double frequency_hz = 0.0;
  double amplitude_tesla = 0.0;
};

// Discrete noise model: a set of fixed tones plus a slowly varying field that
// is only identified through the product g*mu_B*B_slow*f_slow/h (Hz^2).
struct ToneSpectrum {
  std::vector<Tone> tones;
  double slow_drift_hz2 = 0.0;
  double kappa_hz_per_tesla = kDefaultKappaHzPerTesla;
};

// One drawn realization: per-tone phases plus a linear drift coefficient.
// Deterministic to evaluate once drawn.
struct NoiseRealization {
  std::vector<Tone> tones;
  std::vector<double> phases;        // rad, one per tone
  double drift_tesla_per_s = 0.0;
};

// Draws uniform phases for every tone and a zero-mean Gaussian drift slope
// whose RMS (in frequency-shift units) is 2*pi*slow_drift_hz2.
NoiseRealization sample_realization(const ToneSpectrum& spectrum, std::uint64_t seed);

// Sum_n B_n cos(w_n t + alpha_n) + drift * t, in tesla.
double eval_field(const NoiseRealization& r, double t);

// Upper bound on |field| over [0, horizon].
double max_abs_field(const NoiseRealization& r, double horizon);

enum class Waveform { cosine, square_unipolar, square_bipolar };

// Deliberately modulated signal S(t) in frequency-shift units (Hz).
// Square waveforms have 50% duty; with phase 0 the "on" half-period starts at
// t = 0, aligned with the +1 half of the toggling waveform.
struct SignalModel {
  double amplitude_hz = 0.0;
  double frequency_hz = 0.0;
  Waveform waveform = Waveform::cosine;
  double phase_rad = 0.0;
};

double eval_signal(const SignalModel& s, double t);  // Hz

// Discontinuity times of square waveforms inside (t0, t1); empty for cosine.
std::vector<double> signal_breakpoints(const SignalModel& s, double t0, double t1);

std::string to_json(const ToneSpectrum& spectrum);
ToneSpectrum spectrum_from_json(const std::string& text);

}  // namespace qlockin
