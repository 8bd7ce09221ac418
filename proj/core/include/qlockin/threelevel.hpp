#pragma once

#include <cstddef>

#include "qlockin/sequence.hpp"
#include "qlockin/spectroscopy.hpp"

namespace qlockin {

// Brute-force propagation of the probe pair plus the shelved level through a
// full lock-in run, with the square-AM laser coupling up <-> D at its true
// detuning (no adiabatic elimination). Population left in D reads out dark,
// like the up state.
//
// Piecewise-constant in the laser rotating frame: AM windows and pulse times
// partition the run into segments with exact 3x3 exponentials.
double three_level_dark_probability(const PulseSequence& seq,
                                    const LaserParams& laser, double phi_rf);

struct ThreeLevelFringe {
  double contrast = 0.0;   // >= 0
  double phi = 0.0;        // rad
  double offset = 0.0;     // mean dark probability
  double d_population = 0.0;  // shelved population at readout
};

// Scans phi_rf and fits offset + (A/2) cos(phi + phi_rf) with a free offset
// (shelved population lifts the fringe baseline).
ThreeLevelFringe three_level_fringe(const PulseSequence& seq,
                                    const LaserParams& laser,
                                    std::size_t n_phase_points = 24);

}  // namespace qlockin
