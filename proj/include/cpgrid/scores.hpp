#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpgrid/calibration_set.hpp"
#include "cpgrid/error.hpp"
#include "cpgrid/field_tensor.hpp"

namespace cpgrid {

/// Non-conformity score family.
///  RES: |y - f(x)|
///  STD: |y - mu(x)| / max(sigma(x), sigma_floor)
struct ScoreStrategy {
  enum class Kind { Res, Std };

  Kind kind = Kind::Res;
  double sigma_floor = 1e-8;

  static ScoreStrategy res() { return {Kind::Res, 1e-8}; }
  static ScoreStrategy std_normalized(double floor = 1e-8) { return {Kind::Std, floor}; }

  void validate() const {
    if (!(sigma_floor >= 0.0) || !std::isfinite(sigma_floor)) {
      throw ValidationError("sigma_floor must be finite and >= 0");
    }
  }

  bool operator==(const ScoreStrategy&) const = default;
};

inline const char* to_string(ScoreStrategy::Kind k) {
  return k == ScoreStrategy::Kind::Res ? "res" : "std";
}

inline ScoreStrategy::Kind parse_strategy_kind(const std::string& s) {
  if (s == "res" || s == "RES") return ScoreStrategy::Kind::Res;
  if (s == "std" || s == "STD") return ScoreStrategy::Kind::Std;
  throw ValidationError("unknown score strategy '" + s + "' (expected res|std)");
}

inline double effective_sigma(double sigma, double floor) noexcept {
  return std::max(sigma, floor);
}

/// Calibration scores stacked as (n, t, x, y, var), sample-major.
class ScoreSet {
 public:
  ScoreSet(GridSpec spec, std::size_t n, std::vector<double> scores,
           ScoreStrategy strategy)
      : spec_(std::move(spec)), n_(n), scores_(std::move(scores)), strategy_(strategy) {
    spec_.validate();
    strategy_.validate();
    if (n_ < 1) throw ValidationError("ScoreSet: n must be >= 1");
    if (scores_.size() != n_ * spec_.cell_count()) {
      throw ValidationError("ScoreSet: score count does not equal n * cells");
    }
    for (std::size_t i = 0; i < scores_.size(); ++i) {
      if (!(scores_[i] >= 0.0) || !std::isfinite(scores_[i])) {
        throw ValidationError("ScoreSet: invalid score at position " + std::to_string(i));
      }
    }
  }

  const GridSpec& spec() const noexcept { return spec_; }
  std::size_t n() const noexcept { return n_; }
  const ScoreStrategy& strategy() const noexcept { return strategy_; }
  std::span<const double> scores() const noexcept { return scores_; }

  /// Scores of sample i, one per cell.
  std::span<const double> sample(std::size_t i) const {
    return std::span<const double>(scores_).subspan(i * spec_.cell_count(),
                                                    spec_.cell_count());
  }

  double at(std::size_t i, std::size_t cell) const noexcept {
    return scores_[i * spec_.cell_count() + cell];
  }

 private:
  GridSpec spec_;
  std::size_t n_;
  std::vector<double> scores_;
  ScoreStrategy strategy_;
};

/// Builds a ScoreSet one calibration sample at a time.
class ScoreAccumulator {
 public:
  ScoreAccumulator(GridSpec spec, ScoreStrategy strategy)
      : spec_(std::move(spec)), strategy_(strategy) {
    spec_.validate();
    strategy_.validate();
  }

  void add_res(const FieldTensor& truth, const FieldTensor& prediction) {
    if (strategy_.kind != ScoreStrategy::Kind::Res) {
      throw ValidationError("ScoreAccumulator: RES sample added to STD scores");
    }
    require_same_spec(spec_, truth.spec(), "score_res");
    require_same_spec(spec_, prediction.spec(), "score_res");
    const auto y = truth.data();
    const auto f = prediction.data();
    for (std::size_t c = 0; c < y.size(); ++c) scores_.push_back(std::fabs(y[c] - f[c]));
    ++n_;
  }

  void add_std(const FieldTensor& truth, const FieldTensor& mean, const FieldTensor& sigma) {
    if (strategy_.kind != ScoreStrategy::Kind::Std) {
      throw ValidationError("ScoreAccumulator: STD sample added to RES scores");
    }
    require_same_spec(spec_, truth.spec(), "score_std");
    require_same_spec(spec_, mean.spec(), "score_std");
    require_same_spec(spec_, sigma.spec(), "score_std");
    const auto y = truth.data();
    const auto mu = mean.data();
    const auto sd = sigma.data();
    const std::size_t start = scores_.size();
    for (std::size_t c = 0; c < y.size(); ++c) {
      if (sd[c] < 0.0) {
        scores_.resize(start);
        throw ValidationError("score_std: negative sigma at flat index " + std::to_string(c));
      }
      const double s = std::fabs(y[c] - mu[c]) / effective_sigma(sd[c], strategy_.sigma_floor);
      if (!std::isfinite(s)) {
        scores_.resize(start);
        throw ValidationError("score_std: non-finite score at flat index " +
                              std::to_string(c) + " (sigma 0 with sigma_floor 0?)");
      }
      scores_.push_back(s);
    }
    ++n_;
  }

  std::size_t size() const noexcept { return n_; }

  ScoreSet finish() && {
    return ScoreSet(std::move(spec_), n_, std::move(scores_), strategy_);
  }

 private:
  GridSpec spec_;
  ScoreStrategy strategy_;
  std::size_t n_ = 0;
  std::vector<double> scores_;
};

inline ScoreSet score_res(const CalibrationSet& calib) {
  if (calib.is_probabilistic()) {
    throw ValidationError("score_res: calibration set carries sigma tensors; use score_std");
  }
  ScoreAccumulator acc(calib.spec(), ScoreStrategy::res());
  for (std::size_t i = 0; i < calib.size(); ++i) {
    acc.add_res(calib.truths()[i], calib.predictions()[i]);
  }
  return std::move(acc).finish();
}

inline ScoreSet score_std(const CalibrationSet& calib, double sigma_floor = 1e-8) {
  if (!calib.is_probabilistic()) {
    throw ValidationError("score_std: calibration set has no sigma tensors");
  }
  ScoreAccumulator acc(calib.spec(), ScoreStrategy::std_normalized(sigma_floor));
  for (std::size_t i = 0; i < calib.size(); ++i) {
    acc.add_std(calib.truths()[i], calib.predictions()[i], calib.sigmas()[i]);
  }
  return std::move(acc).finish();
}

}  // namespace cpgrid
