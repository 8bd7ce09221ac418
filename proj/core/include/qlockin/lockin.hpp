#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

#include "qlockin/noise.hpp"
#include "qlockin/sequence.hpp"

namespace qlockin {

// Output of the phase-accumulation integrals for one modulation sequence.
// phi_lockin is the in-plane superposition phase; z_component is 1 - 2*P_up
// before readout (identically 0 for ideal pi trains, where the modulation
// factor is a pure +/-1 square wave).
struct Quadratures {
  double phi_lockin = 0.0;
  double z_component = 0.0;
  bool weak_coupling_violated = false;
};

// Classical reference mix-down over one integration window.
struct ClassicalIQ {
  double i = 0.0;
  double q = 0.0;
  double magnitude() const;
  double phase() const;  // atan2(q, i)
};

// Frequency-shift input M(t) in Hz with the metadata the integrators need:
// discontinuity times, an |M| bound and the fastest contained frequency.
struct ShiftSignal {
  std::function<double(double)> value_hz;
  std::vector<double> breakpoints;
  double max_abs_hz = 0.0;
  double max_frequency_hz = 0.0;
};

ShiftSignal shift_from_signal(const SignalModel& s, double t0, double t1);
ShiftSignal shift_from_noise(const NoiseRealization& r, double kappa_hz_per_tesla,
                             double horizon);
ShiftSignal shift_sum(const ShiftSignal& a, const ShiftSignal& b);
// Uniformly sampled series, linearly interpolated between samples.
ShiftSignal shift_from_samples(std::vector<double> times,
                               std::vector<double> values_hz);

// phi = 2*pi Int_0^T M(t) y(t) dt with y the ideal toggling waveform.
// Sets weak_coupling_violated from max|M| and the sequence's modulation
// frequency (soft flag; the integral is still returned).
Quadratures quadratures(const ShiftSignal& m, const PulseSequence& seq);

// I = (1/T) Int M cos(2 pi f_m t) dt, Q likewise with sin, trapezoidal over
// uniform samples spaced dt. Requires at least 20 samples per 1/f_m period.
ClassicalIQ classical_lockin(const std::vector<double>& samples, double dt,
                             double f_m);

// Spectral weight W(w) = (-4/w) sin^2(w tau/2) sin(N w tau)/sin(w tau), in
// seconds, with the removable singularities evaluated by their limits:
// W -> 0 as w -> 0, |W| = 4N/w at w tau = m pi (m odd), W = 0 at even m.
double filter_weight(std::size_t n, double tau_arm, double omega);

// Exact first-order tone response of a pulse train: Int_0^T y(t) e^{i w t} dt
// (seconds). Works for any breakpoint arrangement, CPMG or Uhrig.
std::complex<double> tone_response(const PulseSequence& seq, double omega);

// Contrast factor of the slowly varying field: a zero-mean Gaussian ramp of
// RMS slope 2*pi*slow_drift_hz2 (Hz/s) dephases the N-pulse train by a
// Gaussian phase of RMS 2*pi^2*slow_drift_hz2*(N+1)*tau^2.
double slow_drift_contrast_factor(std::size_t n_pi, double tau_arm,
                                  double slow_drift_hz2);

// Phase-averaged fringe contrast of a CPMG train under the tone spectrum:
// product over tones of J0(2 pi kappa B_n |K(w_n)|) times the slow-drift
// factor. May be negative (a pi flip of the fringe).
double predicted_contrast(std::size_t n_pi, double tau_arm,
                          const ToneSpectrum& spectrum);

// true iff max|M|/f_m < 0.1.
bool weak_coupling_ok(double max_abs_m_hz, double f_m_hz);

}  // namespace qlockin
