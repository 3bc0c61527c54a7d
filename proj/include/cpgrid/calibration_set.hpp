#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "cpgrid/error.hpp"
#include "cpgrid/field_tensor.hpp"

namespace cpgrid {

/// Held-out (prediction, truth) pairs. Deterministic sets carry point
/// predictions; probabilistic sets carry (mean, sigma) pairs.
class CalibrationSet {
 public:
  static CalibrationSet deterministic(std::vector<FieldTensor> predictions,
                                      std::vector<FieldTensor> truths) {
    CalibrationSet c;
    c.predictions_ = std::move(predictions);
    c.truths_ = std::move(truths);
    c.check();
    return c;
  }

  static CalibrationSet probabilistic(std::vector<FieldTensor> means,
                                      std::vector<FieldTensor> sigmas,
                                      std::vector<FieldTensor> truths) {
    CalibrationSet c;
    c.predictions_ = std::move(means);
    c.sigmas_ = std::move(sigmas);
    c.truths_ = std::move(truths);
    if (c.sigmas_.size() != c.predictions_.size()) {
      throw ValidationError("CalibrationSet: mean and sigma counts differ");
    }
    c.check();
    for (std::size_t i = 0; i < c.sigmas_.size(); ++i) {
      for (double s : c.sigmas_[i].data()) {
        if (s < 0.0) {
          throw ValidationError("CalibrationSet: negative sigma in sample " +
                                std::to_string(i));
        }
      }
    }
    return c;
  }

  std::size_t size() const noexcept { return truths_.size(); }
  bool is_probabilistic() const noexcept { return !sigmas_.empty(); }
  const GridSpec& spec() const noexcept { return truths_.front().spec(); }

  /// Point predictions, or means for a probabilistic set.
  const std::vector<FieldTensor>& predictions() const noexcept { return predictions_; }
  const std::vector<FieldTensor>& sigmas() const noexcept { return sigmas_; }
  const std::vector<FieldTensor>& truths() const noexcept { return truths_; }

 private:
  CalibrationSet() = default;

  void check() const {
    if (truths_.empty()) throw ValidationError("CalibrationSet: n must be >= 1");
    if (predictions_.size() != truths_.size()) {
      throw ValidationError("CalibrationSet: prediction and truth counts differ");
    }
    const GridSpec& s = truths_.front().spec();
    auto same = [&](const std::vector<FieldTensor>& v) {
      for (const auto& t : v) require_same_spec(s, t.spec(), "CalibrationSet");
    };
    same(truths_);
    same(predictions_);
    same(sigmas_);
  }

  std::vector<FieldTensor> predictions_;
  std::vector<FieldTensor> sigmas_;
  std::vector<FieldTensor> truths_;
};

}  // namespace cpgrid
