// End-to-end use of the library: simulate forecasts, calibrate per-cell
// quantiles on one split, build intervals on another, and report coverage.

#include <cstdio>

#include "cpgrid/cpgrid.hpp"

int main() {
  cpgrid::SynthConfig cfg;
  cfg.spec = cpgrid::GridSpec::make(4, 12, 12, 1);
  cfg.miscalibration = 0.7;  // the model's sigma is too small
  cfg.heteroscedastic = true;
  cfg.seed = 1;

  const auto calib = cpgrid::generate_samples(cfg, 0, 200);
  const auto test = cpgrid::generate_samples(cfg, 200, 300);

  const double alpha = 0.1;
  const auto q_res = cpgrid::calibrate_quantiles(cpgrid::score_res(cpgrid::deterministic_set(calib)), alpha);
  const auto q_std = cpgrid::calibrate_quantiles(cpgrid::score_std(cpgrid::probabilistic_set(calib)), alpha);

  cpgrid::CoverageAccumulator res(cfg.spec, alpha), std_(cfg.spec, alpha), raw(cfg.spec, alpha);
  for (const auto& s : test) {
    res.add(cpgrid::intervals_res(s.prediction, q_res), s.truth);
    std_.add(cpgrid::intervals_std(s.mean, s.sigma, q_std), s.truth);
    raw.add(cpgrid::gaussian_intervals(s.mean, s.sigma, alpha), s.truth);
  }

  std::printf("nominal coverage %.2f\n", 1.0 - alpha);
  std::printf("%-10s %9s %9s\n", "method", "coverage", "width");
  for (const auto& [name, acc] : {std::pair{"gaussian", &raw}, {"res", &res}, {"std", &std_}}) {
    const auto r = acc->report();
    std::printf("%-10s %9.4f %9.4f\n", name, r.domain_coverage, r.mean_width);
  }

  const auto r = std_.report();
  std::printf("std width by lead:");
  for (double w : r.per_leadtime_mean_width) std::printf(" %.3f", w);
  std::printf("\n");
  return 0;
}
