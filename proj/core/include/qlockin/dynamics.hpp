#pragma once

#include <complex>
#include <cstdint>

#include "qlockin/lockin.hpp"
#include "qlockin/noise.hpp"
#include "qlockin/sequence.hpp"

namespace qlockin {

// Two-level amplitudes in the (up, down) basis.
struct SpinState {
  std::complex<double> up{1.0, 0.0};
  std::complex<double> down{0.0, 0.0};
  double norm() const;
};

// Constant-coefficient Hamiltonian piece H = (m_z sigma_z + w_y sigma_y)/2.
struct HamiltonianSegment {
  double m_z = 0.0;  // rad/s
  double w_y = 0.0;  // rad/s
  double dt = 0.0;   // s
};

// Exact 2x2 unitary exp(-i dt (m_z sigma_z + w_y sigma_y)/2) applied in
// closed form. Throws if the input state norm deviates by more than 1e-6.
SpinState evolve_segment(const SpinState& state, const HamiltonianSegment& seg);

enum class PulseModel { ideal, finite };

struct ExperimentOptions {
  PulseModel pulse_model = PulseModel::ideal;
  double rabi_rad_per_s = 0.0;    // required for PulseModel::finite
  double dt_max = 0.0;            // s; 0 selects the default step
  double pulse_area_scale = 1.0;  // systematic rotation-area error (1.01 = +1%)
};

// Default free-evolution step: min(1/(100 f_max), tau_arm/50), keeping the
// per-step Hamiltonian variation below the percent level.
double default_dt_max(double max_frequency_hz, double tau_arm);

// Full lock-in run: initialize |up>, pi/2 about x, propagate the train with
// piecewise-constant m_z(t) = 2 pi M(t) sampled at segment midpoints, read
// out with a final pi/2 whose axis is calibrated against the programmed
// ideal train so that P_up = 1/2 + (A/2) cos(phi_lockin + phi_rf) for every
// pulse count and phase policy. Returns P_up.
double run_experiment(const PulseSequence& seq, const ShiftSignal& m,
                      double phi_rf, const ExperimentOptions& opts = {});

// Convenience overload composing signal + kappa-scaled noise.
double run_experiment(const PulseSequence& seq, const SignalModel& signal,
                      const NoiseRealization& noise, double kappa_hz_per_tesla,
                      double phi_rf, const ExperimentOptions& opts = {});

// Binomial draw of measurement successes; deterministic per seed.
long sample_shots(double p_up, long shots, std::uint64_t seed);

}  // namespace qlockin
