#include "qlockin/estimation.hpp"

#include <gsl/gsl_blas.h>
#include <gsl/gsl_matrix.h>
#include <gsl/gsl_multifit_nlinear.h>
#include <gsl/gsl_vector.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "qlockin/lockin.hpp"
#include "qlockin/rng.hpp"

namespace qlockin {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void validate_scan(const std::vector<PhaseScanPoint>& scan) {
  if (scan.size() < 5) throw std::invalid_argument("phase scan needs >= 5 points");
  std::set<double> distinct;
  double lo = scan.front().phi_rf, hi = scan.front().phi_rf;
  for (const auto& p : scan) {
    if (!(p.shots > 0.0)) throw std::invalid_argument("shots must be > 0");
    if (p.successes < 0.0 || p.successes > p.shots) {
      throw std::invalid_argument("successes must lie in [0, shots]");
    }
    distinct.insert(p.phi_rf);
    lo = std::min(lo, p.phi_rf);
    hi = std::max(hi, p.phi_rf);
  }
  if (distinct.size() < 5) throw std::invalid_argument("phase scan needs >= 5 distinct phi_rf");
  if (hi - lo < 1.5 * std::numbers::pi) {
    throw std::invalid_argument("phase scan must span at least 3 pi / 2");
  }
}

struct LinearFringe {
  double a = 0.0, b = 0.0;
  double caa = 0.0, cbb = 0.0, cab = 0.0;  // covariance of (a, b)
  double chi2 = 0.0;
};

LinearFringe solve_fringe(const std::vector<PhaseScanPoint>& scan,
                          const std::vector<double>& weights) {
  double saa = 0.0, sbb = 0.0, sab = 0.0, ra = 0.0, rb = 0.0;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double c = std::cos(scan[i].phi_rf), s = std::sin(scan[i].phi_rf);
    const double y = scan[i].successes / scan[i].shots - 0.5;
    const double w = weights[i];
    saa += w * c * c;
    sbb += w * s * s;
    sab += w * c * s;
    ra += w * c * y;
    rb += w * s * y;
  }
  const double det = saa * sbb - sab * sab;
  if (!(det > 0.0)) throw FitFailure("degenerate phase-scan design");
  LinearFringe out;
  out.a = (sbb * ra - sab * rb) / det;
  out.b = (saa * rb - sab * ra) / det;
  out.caa = sbb / det;
  out.cbb = saa / det;
  out.cab = -sab / det;
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double c = std::cos(scan[i].phi_rf), s = std::sin(scan[i].phi_rf);
    const double y = scan[i].successes / scan[i].shots - 0.5;
    const double r = y - out.a * c - out.b * s;
    out.chi2 += weights[i] * r * r;
  }
  return out;
}

}  // namespace

FringeFit fit_fringe(const std::vector<PhaseScanPoint>& scan) {
  validate_scan(scan);

  // First pass with shot-count weights, second with binomial weights taken
  // from the first-pass model.
  std::vector<double> w(scan.size());
  for (std::size_t i = 0; i < scan.size(); ++i) w[i] = scan[i].shots;
  LinearFringe lin = solve_fringe(scan, w);
  for (std::size_t i = 0; i < scan.size(); ++i) {
    const double p = 0.5 + lin.a * std::cos(scan[i].phi_rf) +
                     lin.b * std::sin(scan[i].phi_rf);
    const double var = std::max(p * (1.0 - p), 1e-4);
    w[i] = scan[i].shots / var;
  }
  lin = solve_fringe(scan, w);

  FringeFit fit;
  const double r = std::hypot(lin.a, lin.b);
  fit.contrast = 2.0 * r;
  fit.phase = std::atan2(-lin.b, lin.a);
  if (r > 0.0) {
    const double r2 = r * r;
    fit.sigma_contrast =
        2.0 *
        std::sqrt(std::max(0.0, (lin.a * lin.a * lin.caa + lin.b * lin.b * lin.cbb +
                                 2.0 * lin.a * lin.b * lin.cab) /
                                    r2));
    fit.sigma_phase = std::sqrt(
        std::max(0.0, (lin.b * lin.b * lin.caa + lin.a * lin.a * lin.cbb -
                       2.0 * lin.a * lin.b * lin.cab) /
                          (r2 * r2)));
  } else {
    fit.sigma_contrast = 2.0 * std::sqrt(std::max(lin.caa, lin.cbb));
    fit.sigma_phase = std::numbers::pi;
  }
  fit.phase_undefined = fit.contrast < 2.0 * fit.sigma_contrast;
  fit.chi2 = lin.chi2;
  fit.dof = scan.size() - 2;
  return fit;
}

namespace {

// ---- GSL nonlinear least-squares plumbing ----------------------------------

struct SpectrumData {
  const std::vector<ContrastPoint>* curve;
  std::size_t n_pi;
  const std::vector<double>* freqs;
  double kappa;
  // Precomputed |tone response| per (point, tone); parameters only enter
  // through the Bessel/Gaussian arguments.
  std::vector<std::vector<double>> kernels;
};

double spectrum_model(const SpectrumData& d, const double* amps_pt, double slow,
                      std::size_t i) {
  double a = 1.0;
  for (std::size_t n = 0; n < d.freqs->size(); ++n) {
    const double b_tesla = std::abs(amps_pt[n]) * 1e-12;
    const double arg = kTwoPi * d.kappa * b_tesla * d.kernels[i][n];
    a *= std::cyl_bessel_j(0.0, std::abs(arg));
  }
  return a * slow_drift_contrast_factor(d.n_pi, (*d.curve)[i].tau_arm,
                                        std::abs(slow));
}

int spectrum_residuals(const gsl_vector* x, void* params, gsl_vector* f) {
  const auto& d = *static_cast<const SpectrumData*>(params);
  const std::size_t n_tones = d.freqs->size();
  std::vector<double> amps(n_tones);
  for (std::size_t n = 0; n < n_tones; ++n) amps[n] = gsl_vector_get(x, n);
  const double slow = gsl_vector_get(x, n_tones);
  for (std::size_t i = 0; i < d.curve->size(); ++i) {
    const auto& pt = (*d.curve)[i];
    const double model = spectrum_model(d, amps.data(), slow, i);
    gsl_vector_set(f, i, (model - pt.contrast) / pt.sigma);
  }
  return GSL_SUCCESS;
}

struct NlFitResult {
  std::vector<double> x;
  std::vector<double> sigma;
  double chi2 = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

NlFitResult run_nlinear(gsl_multifit_nlinear_fdf& fdf,
                        const std::vector<double>& start) {
  const std::size_t p = start.size();
  gsl_multifit_nlinear_parameters params =
      gsl_multifit_nlinear_default_parameters();
  gsl_multifit_nlinear_workspace* w = gsl_multifit_nlinear_alloc(
      gsl_multifit_nlinear_trust, &params, fdf.n, p);
  gsl_vector* x0 = gsl_vector_alloc(p);
  for (std::size_t i = 0; i < p; ++i) gsl_vector_set(x0, i, start[i]);
  gsl_multifit_nlinear_init(x0, &fdf, w);

  int info = 0;
  const int status = gsl_multifit_nlinear_driver(400, 1e-10, 1e-10, 1e-10,
                                                 nullptr, nullptr, &info, w);

  NlFitResult out;
  out.converged = status == GSL_SUCCESS;
  out.iterations = gsl_multifit_nlinear_niter(w);
  out.x.resize(p);
  for (std::size_t i = 0; i < p; ++i) out.x[i] = gsl_vector_get(w->x, i);
  gsl_vector* r = gsl_multifit_nlinear_residual(w);
  gsl_blas_ddot(r, r, &out.chi2);

  gsl_matrix* covar = gsl_matrix_alloc(p, p);
  gsl_matrix* jac = gsl_multifit_nlinear_jac(w);
  gsl_multifit_nlinear_covar(jac, 0.0, covar);
  out.sigma.resize(p);
  for (std::size_t i = 0; i < p; ++i) {
    out.sigma[i] = std::sqrt(std::max(0.0, gsl_matrix_get(covar, i, i)));
  }
  gsl_matrix_free(covar);
  gsl_vector_free(x0);
  gsl_multifit_nlinear_free(w);
  return out;
}

}  // namespace

SpectrumFit fit_spectrum(const std::vector<ContrastPoint>& curve,
                         std::size_t n_pi,
                         const std::vector<double>& candidate_freqs_hz,
                         double kappa_hz_per_tesla) {
  if (curve.size() < candidate_freqs_hz.size() + 2) {
    throw std::invalid_argument("not enough contrast points for the fit");
  }
  for (const auto& pt : curve) {
    if (!(pt.tau_arm > 0.0)) throw std::invalid_argument("tau_arm must be > 0");
    if (!(pt.sigma > 0.0)) throw std::invalid_argument("sigma must be > 0");
  }

  SpectrumData data;
  data.curve = &curve;
  data.n_pi = n_pi;
  data.freqs = &candidate_freqs_hz;
  data.kappa = kappa_hz_per_tesla;
  data.kernels.resize(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const auto seq = make_cpmg(n_pi, curve[i].tau_arm);
    data.kernels[i].reserve(candidate_freqs_hz.size());
    for (double f : candidate_freqs_hz) {
      data.kernels[i].push_back(std::abs(tone_response(seq, kTwoPi * f)));
    }
  }

  const std::size_t n_tones = candidate_freqs_hz.size();
  gsl_multifit_nlinear_fdf fdf{};
  fdf.f = spectrum_residuals;
  fdf.df = nullptr;  // finite-difference Jacobian
  fdf.fvv = nullptr;
  fdf.n = curve.size();
  fdf.p = n_tones + 1;
  fdf.params = &data;

  // Multi-start over amplitude branches (J0 oscillation makes the problem
  // multimodal); deterministic seeded starts.
  std::vector<std::vector<double>> starts;
  starts.push_back(std::vector<double>(n_tones + 1, 0.0));
  starts.push_back([&] {
    std::vector<double> s(n_tones + 1, 300.0);
    s[n_tones] = 30.0;
    return s;
  }());
  auto rng = make_rng(0x5eedf17ull);
  std::uniform_real_distribution<double> amp(0.0, 1200.0);
  std::uniform_real_distribution<double> slow(0.0, 120.0);
  for (int k = 0; k < 10; ++k) {
    std::vector<double> s(n_tones + 1);
    for (std::size_t i = 0; i < n_tones; ++i) s[i] = amp(rng);
    s[n_tones] = slow(rng);
    starts.push_back(std::move(s));
  }

  NlFitResult best;
  bool have_best = false;
  std::ostringstream diag;
  for (const auto& s : starts) {
    const auto r = run_nlinear(fdf, s);
    diag << "start chi2=" << r.chi2 << " converged=" << r.converged << "\n";
    if (r.converged && (!have_best || r.chi2 < best.chi2)) {
      best = r;
      have_best = true;
    }
  }
  if (!have_best) {
    throw FitFailure("spectrum fit did not converge from any start:\n" + diag.str());
  }

  SpectrumFit fit;
  fit.amplitudes_tesla.resize(n_tones);
  fit.sigma_amplitudes.resize(n_tones);
  for (std::size_t i = 0; i < n_tones; ++i) {
    fit.amplitudes_tesla[i] = std::abs(best.x[i]) * 1e-12;
    fit.sigma_amplitudes[i] = best.sigma[i] * 1e-12;
  }
  fit.slow_drift_hz2 = std::abs(best.x[n_tones]);
  fit.sigma_slow_drift = best.sigma[n_tones];
  fit.chi2 = best.chi2;
  fit.dof = curve.size() - (n_tones + 1);
  fit.starts_tried = starts.size();
  return fit;
}

namespace {

struct CoherenceData {
  const std::vector<CoherencePoint>* points;
};

int coherence_residuals(const gsl_vector* x, void* params, gsl_vector* f) {
  const auto& d = *static_cast<const CoherenceData*>(params);
  const double a0 = gsl_vector_get(x, 0);
  const double rate = gsl_vector_get(x, 1);
  for (std::size_t i = 0; i < d.points->size(); ++i) {
    const auto& p = (*d.points)[i];
    gsl_vector_set(f, i, a0 * std::exp(-rate * p.duration) - p.contrast);
  }
  return GSL_SUCCESS;
}

}  // namespace

CoherenceFit fit_coherence(const std::vector<CoherencePoint>& points) {
  if (points.size() < 4) throw std::invalid_argument("need >= 4 points");

  // Log-linear initial guess from the positive contrasts.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t m = 0;
  for (const auto& p : points) {
    if (p.contrast > 1e-12) {
      const double ly = std::log(p.contrast);
      sx += p.duration;
      sy += ly;
      sxx += p.duration * p.duration;
      sxy += p.duration * ly;
      ++m;
    }
  }
  if (m < 2) throw FitFailure("coherence fit: no usable points");
  const double det = m * sxx - sx * sx;
  double rate0 = det != 0.0 ? -(m * sxy - sx * sy) / det : 0.0;
  double a0 = std::exp((sy + rate0 * sx) / m);
  if (rate0 <= 0.0) rate0 = 1e-3 / (points.back().duration + 1e-12);

  CoherenceData data{&points};
  gsl_multifit_nlinear_fdf fdf{};
  fdf.f = coherence_residuals;
  fdf.n = points.size();
  fdf.p = 2;
  fdf.params = &data;

  const auto r = run_nlinear(fdf, {a0, rate0});
  if (!r.converged) throw FitFailure("coherence fit did not converge");
  const double rate = r.x[1];
  const double sigma_rate = r.sigma[1];
  // Unweighted fit: scale parameter errors by the residual variance.
  const double scale =
      points.size() > 2 ? std::sqrt(r.chi2 / static_cast<double>(points.size() - 2))
                        : 1.0;
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw FitFailure("coherence fit: data do not decay");
  }
  // Reject rates indistinguishable from zero (constant data).
  if (rate < 2.0 * sigma_rate * scale) {
    throw FitFailure("coherence fit: decay rate consistent with zero");
  }
  CoherenceFit fit;
  fit.tau_coh = 1.0 / rate;
  fit.sigma_tau = sigma_rate * scale / (rate * rate);
  fit.amplitude = r.x[0];
  return fit;
}

double sensitivity(double contrast, double duration) {
  if (contrast == 0.0) throw std::domain_error("zero contrast: sensitivity diverges");
  if (!(contrast > 0.0 && contrast <= 1.0)) {
    throw std::invalid_argument("contrast must lie in (0, 1]");
  }
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
  return std::sqrt(2.0 * (4.0 - contrast * contrast) /
                   (contrast * contrast * duration)) /
         kTwoPi;
}

double sql(double duration) { return sensitivity(1.0, duration); }

double freq_to_field(double df_hz, double kappa_hz_per_tesla) {
  if (!(kappa_hz_per_tesla > 0.0)) throw std::invalid_argument("kappa must be > 0");
  return df_hz / kappa_hz_per_tesla;
}

double field_to_freq(double b_tesla, double kappa_hz_per_tesla) {
  if (!(kappa_hz_per_tesla > 0.0)) throw std::invalid_argument("kappa must be > 0");
  return b_tesla * kappa_hz_per_tesla;
}

double phase_to_freq(double phi, double duration) {
  if (!(duration > 0.0)) throw std::invalid_argument("duration must be > 0");
  return phi / (kTwoPi * duration);
}

AllanResult allan_deviation(const AllanSeries& series,
                            const std::vector<double>& taus) {
  const std::size_t m_samples = series.values_hz.size();
  if (m_samples < 9) throw std::invalid_argument("series too short (< 9 samples)");
  if (!(series.interval_s > 0.0)) throw std::invalid_argument("interval must be > 0");

  // Phase accumulation: x_j = tau0 * sum_{i<j} y_i, j = 0..M.
  std::vector<double> x(m_samples + 1, 0.0);
  for (std::size_t i = 0; i < m_samples; ++i) {
    x[i + 1] = x[i] + series.values_hz[i] * series.interval_s;
  }

  AllanResult out;
  for (double tau : taus) {
    const double ratio = tau / series.interval_s;
    const auto m = static_cast<std::size_t>(std::llround(ratio));
    if (m < 1 || std::abs(ratio - static_cast<double>(m)) > 1e-9 ||
        static_cast<double>(m) > static_cast<double>(m_samples) / 3.0) {
      out.skipped_taus.push_back(tau);
      continue;
    }
    double acc = 0.0;
    const std::size_t terms = m_samples + 1 - 2 * m;
    for (std::size_t j = 0; j < terms; ++j) {
      const double d = x[j + 2 * m] - 2.0 * x[j + m] + x[j];
      acc += d * d;
    }
    const double t = static_cast<double>(m) * series.interval_s;
    out.points.push_back(
        {t, std::sqrt(acc / (2.0 * static_cast<double>(terms) * t * t))});
  }
  return out;
}

AllanSeries detrend_linear(const AllanSeries& series) {
  const std::size_t n = series.values_hz.size();
  if (n < 3) throw std::invalid_argument("need >= 3 samples to detrend");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i);
    sx += t;
    sy += series.values_hz[i];
    sxx += t * t;
    sxy += t * series.values_hz[i];
  }
  const double det = static_cast<double>(n) * sxx - sx * sx;
  const double slope = (static_cast<double>(n) * sxy - sx * sy) / det;
  const double intercept = (sy - slope * sx) / static_cast<double>(n);
  AllanSeries out;
  out.interval_s = series.interval_s;
  out.values_hz.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values_hz[i] =
        series.values_hz[i] - (intercept + slope * static_cast<double>(i));
  }
  return out;
}

}  // namespace qlockin
