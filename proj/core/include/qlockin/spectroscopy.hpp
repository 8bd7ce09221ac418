#pragma once

#include <cstddef>
#include <vector>

#include "qlockin/sequence.hpp"

namespace qlockin {

// Off-resonant probe laser: Rabi coupling, signed detuning from the optical
// transition, and 50% duty on/off amplitude modulation. With am_phase 0 the
// "on" half-period starts at t = 0, in phase with the toggling waveform.
struct LaserParams {
  double rabi_rad_per_s = 0.0;   // Omega_0
  double detuning_hz = 0.0;      // signed
  double am_frequency_hz = 0.0;  // f_L
  double am_phase_rad = 0.0;
};

// Far-detuned two-level shift (Omega_0 / 2 pi)^2 / (4 delta), in Hz.
// Requires |delta| >= 5 Omega_0 / 2 pi.
double light_shift_static(const LaserParams& laser);

// Effective modulated shift seen by the lock-in under square-wave AM: the
// on/off field splits into a carrier (amplitude 1/2) and odd sidebands
// (amplitude 1/(k pi)) at multiples of the AM frequency, each contributing
// c_k^2 (Omega_0/2 pi)^2 / (4 (delta - k f_AM)). Far off resonance this
// tends to half the static shift (the 50% duty factor).
double effective_mod_shift(const LaserParams& laser);

// Contrast multiplier from population transfer to the shelved level:
// product over AM components of (1 - P_k) with P_k a power-broadened
// Lorentzian transfer probability saturating at 1/2 over the exposure.
double shelving_loss(const LaserParams& laser, double exposure_s);

struct FmScanPoint {
  double tau_arm = 0.0;
  double f_m = 0.0;
  double phi = 0.0;  // rad
  bool weak_coupling_violated = false;
};

// Lock-in response of the square-modulated light shift versus modulation
// frequency; peak response at f_m = f_L.
std::vector<FmScanPoint> fm_scan(const LaserParams& laser, std::size_t n_pi,
                                 const std::vector<double>& tau_arms);

struct DetuningPoint {
  double delta_hz = 0.0;
  double contrast = 0.0;
  double phi = 0.0;  // rad
  bool from_oracle = false;
};

// Detuning scan at fixed lock-in period with the laser AM locked to the
// modulation frequency (requires am_frequency == 1/(2 tau_arm)). Points too
// close to a component resonance are evaluated with the three-level
// propagator instead of the pole formula.
std::vector<DetuningPoint> detuning_scan(const LaserParams& base,
                                         const std::vector<double>& deltas_hz,
                                         std::size_t n_pi, double tau_arm);

}  // namespace qlockin
