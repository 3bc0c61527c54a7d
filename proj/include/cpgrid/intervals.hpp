#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cpgrid/calibrate.hpp"
#include "cpgrid/container.hpp"
#include "cpgrid/error.hpp"
#include "cpgrid/field_tensor.hpp"
#include "cpgrid/normal.hpp"

namespace cpgrid {

/// Per-cell prediction set [lower, upper]. Bounds may be infinite.
class IntervalField {
 public:
  IntervalField(GridSpec spec, double alpha, std::vector<double> lower,
                std::vector<double> upper, std::string method = "res")
      : spec_(std::move(spec)),
        alpha_(alpha),
        lower_(std::move(lower)),
        upper_(std::move(upper)),
        method_(std::move(method)) {
    spec_.validate();
    validate_alpha(alpha_);
    if (lower_.size() != spec_.cell_count() || upper_.size() != spec_.cell_count()) {
      throw ValidationError("IntervalField: bound length does not match spec");
    }
    for (std::size_t c = 0; c < lower_.size(); ++c) {
      if (std::isnan(lower_[c]) || std::isnan(upper_[c]) || lower_[c] > upper_[c]) {
        throw ValidationError("IntervalField: invalid bounds at flat index " +
                              std::to_string(c));
      }
    }
  }

  const GridSpec& spec() const noexcept { return spec_; }
  double alpha() const noexcept { return alpha_; }
  std::span<const double> lower() const noexcept { return lower_; }
  std::span<const double> upper() const noexcept { return upper_; }
  /// "res", "std" or "gaussian" (uncalibrated baseline).
  const std::string& method() const noexcept { return method_; }

  bool contains(std::size_t cell, double y) const noexcept {
    return lower_[cell] <= y && y <= upper_[cell];
  }

 private:
  GridSpec spec_;
  double alpha_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::string method_;
};

/// prediction -+ q, cellwise.
inline IntervalField intervals_res(const FieldTensor& prediction, const QuantileField& q) {
  require_same_spec(prediction.spec(), q.spec(), "intervals_res");
  if (q.strategy().kind != ScoreStrategy::Kind::Res) {
    throw ValidationError("intervals_res: quantiles were calibrated with STD scores");
  }
  const auto f = prediction.data();
  std::vector<double> lo(f.size()), hi(f.size());
  for (std::size_t c = 0; c < f.size(); ++c) {
    lo[c] = f[c] - q[c];
    hi[c] = f[c] + q[c];
  }
  return IntervalField(prediction.spec(), q.alpha(), std::move(lo), std::move(hi), "res");
}

/// mean -+ q * max(sigma, floor), using the floor recorded at calibration.
inline IntervalField intervals_std(const FieldTensor& mean, const FieldTensor& sigma,
                                   const QuantileField& q) {
  require_same_spec(mean.spec(), q.spec(), "intervals_std");
  require_same_spec(sigma.spec(), q.spec(), "intervals_std");
  if (q.strategy().kind != ScoreStrategy::Kind::Std) {
    throw ValidationError("intervals_std: quantiles were calibrated with RES scores");
  }
  const double floor = q.strategy().sigma_floor;
  const auto mu = mean.data();
  const auto sd = sigma.data();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> lo(mu.size()), hi(mu.size());
  for (std::size_t c = 0; c < mu.size(); ++c) {
    if (sd[c] < 0.0) {
      throw ValidationError("intervals_std: negative sigma at flat index " + std::to_string(c));
    }
    if (std::isinf(q[c])) {
      lo[c] = -inf;
      hi[c] = inf;
      continue;
    }
    const double half = q[c] * effective_sigma(sd[c], floor);
    lo[c] = mu[c] - half;
    hi[c] = mu[c] + half;
  }
  return IntervalField(mean.spec(), q.alpha(), std::move(lo), std::move(hi), "std");
}

/// Uncalibrated baseline: mean -+ z_{1-alpha/2} * sigma, no conformal step.
inline IntervalField gaussian_intervals(const FieldTensor& mean, const FieldTensor& sigma,
                                        double alpha) {
  require_same_spec(mean.spec(), sigma.spec(), "gaussian_intervals");
  const double z = two_sided_z(alpha);
  const auto mu = mean.data();
  const auto sd = sigma.data();
  std::vector<double> lo(mu.size()), hi(mu.size());
  for (std::size_t c = 0; c < mu.size(); ++c) {
    if (sd[c] < 0.0) {
      throw ValidationError("gaussian_intervals: negative sigma at flat index " +
                            std::to_string(c));
    }
    lo[c] = mu[c] - z * sd[c];
    hi[c] = mu[c] + z * sd[c];
  }
  return IntervalField(mean.spec(), alpha, std::move(lo), std::move(hi), "gaussian");
}

inline std::vector<double> interval_width(const IntervalField& iv) {
  std::vector<double> w(iv.lower().size());
  for (std::size_t c = 0; c < w.size(); ++c) w[c] = iv.upper()[c] - iv.lower()[c];
  return w;
}

/// Files of an interval field stored under `prefix`.
struct IntervalPaths {
  fs::path lower, upper, sidecar;

  explicit IntervalPaths(const fs::path& prefix)
      : lower(prefix.string() + ".lower.cpt"),
        upper(prefix.string() + ".upper.cpt"),
        sidecar(prefix.string() + ".json") {}
};

inline void save_intervals(const IntervalField& iv, const fs::path& prefix) {
  const IntervalPaths p(prefix);
  const nlohmann::json meta{{"kind", "intervals"}, {"alpha", iv.alpha()},
                            {"method", iv.method()}};
  write_raw_container(p.lower, iv.spec(), iv.lower(), meta, p.sidecar);
  write_raw_container(p.upper, iv.spec(), iv.upper(), meta, p.sidecar);
}

inline IntervalField load_intervals(const fs::path& prefix) {
  const IntervalPaths p(prefix);
  RawContainer lo = read_raw_container(p.lower, true, p.sidecar);
  RawContainer hi = read_raw_container(p.upper, true, p.sidecar);
  try {
    if (lo.sidecar.value("kind", "") != "intervals") {
      throw FormatError(FormatError::Kind::BadSidecar,
                        p.sidecar.string() + ": sidecar is not an interval field");
    }
    return IntervalField(std::move(lo.spec), lo.sidecar.at("alpha").get<double>(),
                         std::move(lo.data), std::move(hi.data),
                         lo.sidecar.value("method", "res"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::BadSidecar, p.sidecar.string() + ": " + e.what());
  }
}

}  // namespace cpgrid
