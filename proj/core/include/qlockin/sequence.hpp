#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace qlockin {

enum class PhasePolicy { fixed_axis, xy_alternating };

// A single rotation pulse. axis_phase 0 is the x axis, pi/2 the y axis.
// duration 0 means an ideal instantaneous pulse.
struct Pulse {
  double time = 0.0;            // s, center of the pulse
  double rotation_angle = 0.0;  // rad
  double axis_phase = 0.0;      // rad
  double duration = 0.0;        // s
};

// Train of pi pulses between the two bracketing pi/2 pulses (which belong to
// the experiment runner, not the sequence). Immutable after construction.
struct PulseSequence {
  std::vector<Pulse> pulses;
  double total_duration = 0.0;  // s
  double tau_arm = 0.0;         // s, uniform arm spacing; 0 when non-uniform
  PhasePolicy phase_policy = PhasePolicy::fixed_axis;
  std::string kind = "cpmg";    // "cpmg" or "uhrig"

  std::size_t n_pi() const { return pulses.size(); }

  // 1/(2 tau_arm) for uniformly spaced trains, 0 otherwise.
  double modulation_frequency() const {
    return tau_arm > 0.0 ? 1.0 / (2.0 * tau_arm) : 0.0;
  }
};

// N pi pulses at k*tau_arm, k = 1..N, total duration (N+1)*tau_arm.
// Under xy_alternating consecutive pulses alternate axis_phase 0, pi/2, ...
PulseSequence make_cpmg(std::size_t n_pi, double tau_arm,
                        PhasePolicy policy = PhasePolicy::fixed_axis,
                        double pulse_duration = 0.0);

// N pi pulses at t_j = T sin^2(pi j / (2N+2)), j = 1..N.
PulseSequence make_uhrig(std::size_t n_pi, double total_duration,
                         PhasePolicy policy = PhasePolicy::fixed_axis,
                         double pulse_duration = 0.0);

// Sign of the toggling waveform at time t, treating pulses as ideal:
// +1 before the first pulse center, flipping at each center.
int toggling_value(const PulseSequence& seq, double t);

// Free-evolution boundaries: 0, pulse centers..., total duration.
std::vector<double> toggling_breakpoints(const PulseSequence& seq);

std::string to_json(const PulseSequence& seq);
PulseSequence sequence_from_json(const std::string& text);

}  // namespace qlockin
