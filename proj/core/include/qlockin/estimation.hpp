#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace qlockin {

class FitFailure : public std::runtime_error {
 public:
  explicit FitFailure(const std::string& what) : std::runtime_error(what) {}
};

struct PhaseScanPoint {
  double phi_rf = 0.0;   // rad
  double shots = 0.0;
  double successes = 0.0;
};

// Result of the two-parameter cosine fringe fit
// P = 1/2 + (A/2) cos(phi + phi_rf), linearized as 1/2 + a cos + b sin.
struct FringeFit {
  double contrast = 0.0;       // A >= 0; sign absorbed into phase
  double phase = 0.0;          // rad, in (-pi, pi]
  double sigma_contrast = 0.0;
  double sigma_phase = 0.0;
  bool phase_undefined = false;  // set when A < 2 sigma_A
  double chi2 = 0.0;
  std::size_t dof = 0;
};

FringeFit fit_fringe(const std::vector<PhaseScanPoint>& scan);

struct ContrastPoint {
  double tau_arm = 0.0;   // s
  double contrast = 0.0;
  double sigma = 1.0;
};

struct SpectrumFit {
  std::vector<double> amplitudes_tesla;
  std::vector<double> sigma_amplitudes;
  double slow_drift_hz2 = 0.0;
  double sigma_slow_drift = 0.0;
  double chi2 = 0.0;
  std::size_t dof = 0;
  std::size_t starts_tried = 0;
};

// Nonlinear least squares of the contrast model over tone amplitudes at the
// fixed candidate frequencies plus the slow-drift product, with multi-start
// over amplitude branches. Throws FitFailure when no start converges.
SpectrumFit fit_spectrum(const std::vector<ContrastPoint>& curve,
                         std::size_t n_pi,
                         const std::vector<double>& candidate_freqs_hz,
                         double kappa_hz_per_tesla);

struct CoherencePoint {
  double duration = 0.0;  // s
  double contrast = 0.0;
};

struct CoherenceFit {
  double tau_coh = 0.0;    // s
  double sigma_tau = 0.0;
  double amplitude = 0.0;  // A0
};

// Least-squares fit of A(T) = A0 exp(-T / tau_coh).
// Throws FitFailure on non-decaying input.
CoherenceFit fit_coherence(const std::vector<CoherencePoint>& points);

// Frequency-shift sensitivity s = (1/2pi) sqrt(2 (4 - A^2) / (A^2 T)),
// in Hz/sqrt(Hz).
double sensitivity(double contrast, double duration);

// Projection-noise limit, sensitivity(1, T).
double sql(double duration);

double freq_to_field(double df_hz, double kappa_hz_per_tesla);   // tesla
double field_to_freq(double b_tesla, double kappa_hz_per_tesla); // Hz

// delta f = phi / (2 pi T).
double phase_to_freq(double phi, double duration);

struct AllanSeries {
  std::vector<double> values_hz;  // uniformly spaced frequency-shift samples
  double interval_s = 0.0;
};

struct AllanPoint {
  double tau_s = 0.0;
  double adev_hz = 0.0;
};

struct AllanResult {
  std::vector<AllanPoint> points;
  std::vector<double> skipped_taus;  // not an integer multiple or too long
};

// Overlapping Allan deviation from phase-accumulated samples.
AllanResult allan_deviation(const AllanSeries& series,
                            const std::vector<double>& taus);

// Least-squares line removed; returned series has zero mean.
AllanSeries detrend_linear(const AllanSeries& series);

}  // namespace qlockin
