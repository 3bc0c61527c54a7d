#pragma once

// Synthetic forecast generator with a known Gaussian error law.
//
// Every (x, y, var) series follows an AR(1) rollout
//
//   X^{t+1} = a X^t + F + s(x,y) * noise_sd * eta^t
//
// where eta^t is spatially smoothed white noise renormalized to unit marginal
// variance per cell, F a constant forcing offset and s(x,y) a scale field
// (1 everywhere unless heteroscedastic). X^0 is drawn from the stationary
// law, so the error of the conditional-mean forecast after `step` steps is
// exactly N(0, sigma_true^2) with
//
//   sigma_true(step)^2 = (s * noise_sd)^2 * (1 - a^{2 step}) / (1 - a^2).
//
// Lead index t of a tensor holds step t + 1.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "cpgrid/calibration_set.hpp"
#include "cpgrid/error.hpp"
#include "cpgrid/field_tensor.hpp"
#include "cpgrid/normal.hpp"
#include "cpgrid/parallel.hpp"
#include "cpgrid/rng.hpp"

namespace cpgrid {

struct SynthConfig {
  GridSpec spec = GridSpec::make(8, 24, 24, 2);
  double ar_coeff = 0.8;
  double noise_sd = 1.0;
  /// Box-kernel radius in cells (floored); 0 gives white noise.
  double spatial_corr_len = 2.0;
  /// Model-reported sigma is miscalibration * sigma_true.
  double miscalibration = 1.0;
  /// When set, s(x,y) = 2^sin(2 pi ((x + 0.5)/nx + phase)), a band pattern
  /// spanning a 4x range whose phase is drawn per sample.
  bool heteroscedastic = false;
  double forcing = 0.0;
  std::uint64_t seed = 0;

  void validate() const {
    spec.validate();
    if (!(std::fabs(ar_coeff) < 1.0)) {
      throw ValidationError("ar_coeff must lie in (-1,1), got " + std::to_string(ar_coeff));
    }
    if (!(noise_sd > 0.0) || !std::isfinite(noise_sd)) {
      throw ValidationError("noise_sd must be > 0");
    }
    if (!(spatial_corr_len >= 0.0) || !std::isfinite(spatial_corr_len)) {
      throw ValidationError("spatial_corr_len must be >= 0");
    }
    if (!(miscalibration > 0.0) || !std::isfinite(miscalibration)) {
      throw ValidationError("miscalibration must be > 0");
    }
    if (!std::isfinite(forcing)) throw ValidationError("forcing must be finite");
  }
};

/// (1 - a^{2 step}) / (1 - a^2): error variance growth after `step` steps.
inline double ar_variance_factor(double a, std::size_t step) {
  if (step == 0) return 0.0;
  return (1.0 - std::pow(a, 2.0 * static_cast<double>(step))) / (1.0 - a * a);
}

/// Error sd after `step` >= 1 steps at a cell with scale 1.
inline double sigma_true(const SynthConfig& cfg, std::size_t step) {
  cfg.validate();
  if (step < 1) throw ValidationError("sigma_true: step must be >= 1");
  return cfg.noise_sd * std::sqrt(ar_variance_factor(cfg.ar_coeff, step));
}

/// Half-width z_{1-alpha/2} * sigma of the ideal central (1 - alpha) interval.
inline double true_quantile(double sigma, double alpha) {
  if (!(sigma >= 0.0)) throw ValidationError("true_quantile: sigma must be >= 0");
  return two_sided_z(alpha) * sigma;
}

inline double true_quantile(const SynthConfig& cfg, std::size_t step, double alpha) {
  return true_quantile(sigma_true(cfg, step), alpha);
}

/// One synthetic forecast: the truth, a deterministic forecast, and the
/// probabilistic forecast (mean, sigma). `initial` holds X^0 (t_out = 1).
struct SynthSample {
  FieldTensor initial;
  FieldTensor truth;
  FieldTensor prediction;
  FieldTensor mean;
  FieldTensor sigma;
};

namespace detail {

inline std::vector<double> scale_field(const SynthConfig& cfg, double phase) {
  const auto& s = cfg.spec;
  std::vector<double> scale(s.nx * s.ny, 1.0);
  if (!cfg.heteroscedastic) return scale;
  for (std::size_t x = 0; x < s.nx; ++x) {
    const double theta = 2.0 * std::numbers::pi *
                         ((static_cast<double>(x) + 0.5) / static_cast<double>(s.nx) + phase);
    const double v = std::exp2(std::sin(theta));
    for (std::size_t y = 0; y < s.ny; ++y) scale[x * s.ny + y] = v;
  }
  return scale;
}

// Separable truncated box filter of radius r over an nx-by-ny white-noise
// field, each output divided by sqrt(window size) so it is exactly N(0,1).
class Smoother {
 public:
  Smoother(std::size_t nx, std::size_t ny, std::size_t radius)
      : nx_(nx), ny_(ny), r_(radius), tmp_(nx * ny), norm_(nx * ny) {
    for (std::size_t x = 0; x < nx_; ++x) {
      for (std::size_t y = 0; y < ny_; ++y) {
        norm_[x * ny_ + y] =
            1.0 / std::sqrt(static_cast<double>(window(x, nx_) * window(y, ny_)));
      }
    }
  }

  void operator()(std::vector<double>& field) {
    if (r_ == 0) return;
    for (std::size_t x = 0; x < nx_; ++x) {
      for (std::size_t y = 0; y < ny_; ++y) {
        double acc = 0.0;
        const std::size_t lo = y >= r_ ? y - r_ : 0;
        const std::size_t hi = std::min(ny_ - 1, y + r_);
        for (std::size_t k = lo; k <= hi; ++k) acc += field[x * ny_ + k];
        tmp_[x * ny_ + y] = acc;
      }
    }
    for (std::size_t x = 0; x < nx_; ++x) {
      const std::size_t lo = x >= r_ ? x - r_ : 0;
      const std::size_t hi = std::min(nx_ - 1, x + r_);
      for (std::size_t y = 0; y < ny_; ++y) {
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) acc += tmp_[k * ny_ + y];
        field[x * ny_ + y] = acc * norm_[x * ny_ + y];
      }
    }
  }

 private:
  std::size_t window(std::size_t i, std::size_t n) const {
    const std::size_t lo = i >= r_ ? i - r_ : 0;
    const std::size_t hi = std::min(n - 1, i + r_);
    return hi - lo + 1;
  }

  std::size_t nx_, ny_, r_;
  std::vector<double> tmp_;
  std::vector<double> norm_;
};

}  // namespace detail

/// Generates sample `index` of the run described by cfg. Output depends only
/// on (cfg, index).
///
/// Draw order from the sample's stream: one uniform for the scale phase, then
/// for X^0 and each step t = 1..t_out, for each variable, nx*ny Gaussians in
/// row-major (x, y) order.
inline SynthSample generate_pair(const SynthConfig& cfg, std::uint64_t index) {
  cfg.validate();
  const GridSpec& spec = cfg.spec;
  const std::size_t nx = spec.nx, ny = spec.ny, nvar = spec.nvar, plane = nx * ny;
  const double a = cfg.ar_coeff;

  SplitMix64 rng = SplitMix64::substream(cfg.seed, index);
  const double phase = rng.uniform();
  const std::vector<double> scale = detail::scale_field(cfg, phase);
  detail::Smoother smooth(nx, ny, static_cast<std::size_t>(std::floor(cfg.spatial_corr_len)));

  std::vector<double> noise(plane);
  auto draw = [&] {
    for (double& z : noise) z = rng.gaussian();
    smooth(noise);
  };

  // state[(x*ny + y)*nvar + v]
  std::vector<double> state(plane * nvar), mean(plane * nvar);
  const double stationary_sd = cfg.noise_sd / std::sqrt(1.0 - a * a);
  for (std::size_t v = 0; v < nvar; ++v) {
    draw();
    for (std::size_t p = 0; p < plane; ++p) {
      state[p * nvar + v] = scale[p] * stationary_sd * noise[p];
    }
  }
  mean = state;
  std::vector<double> initial = state;

  const std::size_t cells = spec.cell_count();
  std::vector<double> truth(cells), pred(cells), sigma(cells);
  for (std::size_t t = 0; t < spec.t_out; ++t) {
    for (std::size_t v = 0; v < nvar; ++v) {
      draw();
      for (std::size_t p = 0; p < plane; ++p) {
        double& xv = state[p * nvar + v];
        xv = a * xv + cfg.forcing + scale[p] * cfg.noise_sd * noise[p];
      }
    }
    const double sd_step = cfg.noise_sd * std::sqrt(ar_variance_factor(a, t + 1));
    const std::size_t base = t * plane * nvar;
    for (std::size_t k = 0; k < plane * nvar; ++k) {
      mean[k] = a * mean[k] + cfg.forcing;
      truth[base + k] = state[k];
      pred[base + k] = mean[k];
      sigma[base + k] = cfg.miscalibration * scale[k / nvar] * sd_step;
    }
  }

  GridSpec init_spec = spec;
  init_spec.t_out = 1;
  init_spec.lead_hours = {0.0};

  SynthSample out{FieldTensor(std::move(init_spec), std::move(initial)),
                  FieldTensor(spec, std::move(truth)), FieldTensor(spec, pred),
                  FieldTensor(spec, std::move(pred)), FieldTensor(spec, std::move(sigma))};
  return out;
}

/// Samples [first, first + count), generated in parallel over samples.
inline std::vector<SynthSample> generate_samples(const SynthConfig& cfg, std::uint64_t first,
                                                 std::size_t count, unsigned threads = 1) {
  cfg.validate();
  std::vector<SynthSample> out(count);
  parallel_for(count, threads, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) out[i] = generate_pair(cfg, first + i);
  });
  return out;
}

/// Per-cell sigma_true of sample `index` at every lead (the scale field only
/// depends on the sample when heteroscedastic).
inline FieldTensor sigma_true_field(const SynthConfig& cfg, std::uint64_t index) {
  cfg.validate();
  SplitMix64 rng = SplitMix64::substream(cfg.seed, index);
  const std::vector<double> scale = detail::scale_field(cfg, rng.uniform());
  const GridSpec& s = cfg.spec;
  std::vector<double> out(s.cell_count());
  for (std::size_t t = 0; t < s.t_out; ++t) {
    const double sd = sigma_true(cfg, t + 1);
    for (std::size_t p = 0; p < s.nx * s.ny; ++p) {
      for (std::size_t v = 0; v < s.nvar; ++v) {
        out[(t * s.nx * s.ny + p) * s.nvar + v] = scale[p] * sd;
      }
    }
  }
  return FieldTensor(s, std::move(out));
}

inline CalibrationSet deterministic_set(const std::vector<SynthSample>& samples) {
  std::vector<FieldTensor> preds, truths;
  for (const auto& s : samples) {
    preds.push_back(s.prediction);
    truths.push_back(s.truth);
  }
  return CalibrationSet::deterministic(std::move(preds), std::move(truths));
}

inline CalibrationSet probabilistic_set(const std::vector<SynthSample>& samples) {
  std::vector<FieldTensor> means, sigmas, truths;
  for (const auto& s : samples) {
    means.push_back(s.mean);
    sigmas.push_back(s.sigma);
    truths.push_back(s.truth);
  }
  return CalibrationSet::probabilistic(std::move(means), std::move(sigmas), std::move(truths));
}

}  // namespace cpgrid
