#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cpgrid/container.hpp"
#include "cpgrid/error.hpp"
#include "cpgrid/parallel.hpp"
#include "cpgrid/scores.hpp"

namespace cpgrid {

inline void validate_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha must lie in (0,1), got " + std::to_string(alpha));
  }
}

namespace detail {
// (n+1)(1-alpha) is usually meant to be an exact integer when it looks like
// one (n=9, alpha=0.1); products within this distance of an integer snap to it.
inline constexpr double kRankSnap = 1e-9;
}  // namespace detail

/// Finite-sample conformal rank k = ceil((n+1)(1-alpha)), 1-indexed.
/// Returns nullopt when k > n, i.e. the quantile is +infinity.
inline std::optional<std::size_t> conformal_rank(std::size_t n, double alpha) {
  validate_alpha(alpha);
  if (n < 1) throw ValidationError("conformal_rank: n must be >= 1");
  const double x = static_cast<double>(n + 1) * (1.0 - alpha);
  const double k = std::ceil(x - detail::kRankSnap);
  if (k > static_cast<double>(n)) return std::nullopt;
  return static_cast<std::size_t>(std::max(k, 1.0));
}

/// Smallest n for which conformal_rank(n, alpha) is finite.
inline std::size_t min_calibration_size(double alpha) {
  validate_alpha(alpha);
  auto n = static_cast<std::size_t>(
      std::max(1.0, std::ceil((1.0 - alpha) / alpha - detail::kRankSnap)));
  while (!conformal_rank(n, alpha)) ++n;
  while (n > 1 && conformal_rank(n - 1, alpha)) --n;
  return n;
}

inline std::string infinite_rank_warning(std::size_t n, double alpha) {
  return "WARN: infinite quantiles (n=" + std::to_string(n) + " < required " +
         std::to_string(min_calibration_size(alpha)) + ")";
}

/// Per-cell conformal quantile for one alpha. Entries are +inf when the
/// calibration set is too small for the requested coverage.
class QuantileField {
 public:
  QuantileField(GridSpec spec, double alpha, std::size_t n, std::vector<double> q,
                ScoreStrategy strategy)
      : spec_(std::move(spec)), alpha_(alpha), n_(n), q_(std::move(q)), strategy_(strategy) {
    spec_.validate();
    validate_alpha(alpha_);
    strategy_.validate();
    if (q_.size() != spec_.cell_count()) {
      throw ValidationError("QuantileField: q length does not match spec");
    }
    for (std::size_t i = 0; i < q_.size(); ++i) {
      const double v = q_[i];
      if (std::isnan(v) || v < 0.0) {
        throw ValidationError("QuantileField: invalid q at flat index " + std::to_string(i));
      }
    }
  }

  const GridSpec& spec() const noexcept { return spec_; }
  double alpha() const noexcept { return alpha_; }
  std::size_t n() const noexcept { return n_; }
  const ScoreStrategy& strategy() const noexcept { return strategy_; }
  std::span<const double> q() const noexcept { return q_; }
  double operator[](std::size_t cell) const noexcept { return q_[cell]; }

  /// True when the rank was infinite (every entry is +inf).
  bool infinite() const noexcept { return !conformal_rank(n_, alpha_).has_value(); }

 private:
  GridSpec spec_;
  double alpha_;
  std::size_t n_;
  std::vector<double> q_;
  ScoreStrategy strategy_;
};

namespace detail {

// Exact k-th order statistics (k 1-indexed, finite ranks only) of every cell,
// written to out[j][cell] for ranks[j].
inline void select_order_statistics(const ScoreSet& scores,
                                    std::span<const std::size_t> ranks,
                                    std::vector<std::vector<double>>& out,
                                    unsigned threads) {
  const std::size_t cells = scores.spec().cell_count();
  const std::size_t n = scores.n();
  const std::span<const double> all = scores.scores();
  parallel_for(cells, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> buf(n);
    for (std::size_t c = begin; c < end; ++c) {
      for (std::size_t i = 0; i < n; ++i) buf[i] = all[i * cells + c];
      for (std::size_t j = 0; j < ranks.size(); ++j) {
        auto nth = buf.begin() + static_cast<std::ptrdiff_t>(ranks[j] - 1);
        std::nth_element(buf.begin(), nth, buf.end());
        out[j][c] = *nth;
      }
    }
  });
}

}  // namespace detail

/// Per-cell k-th smallest calibration score, k = conformal_rank(n, alpha).
inline QuantileField calibrate_quantiles(const ScoreSet& scores, double alpha,
                                         unsigned threads = 1) {
  const auto rank = conformal_rank(scores.n(), alpha);
  const std::size_t cells = scores.spec().cell_count();
  std::vector<std::vector<double>> q(
      1, std::vector<double>(cells, std::numeric_limits<double>::infinity()));
  if (rank) {
    const std::size_t ranks[] = {*rank};
    detail::select_order_statistics(scores, ranks, q, threads);
  }
  return QuantileField(scores.spec(), alpha, scores.n(), std::move(q[0]), scores.strategy());
}

/// One QuantileField per alpha; alphas must be non-empty and strictly increasing.
inline std::vector<QuantileField> calibrate_sweep(const ScoreSet& scores,
                                                  std::span<const double> alphas,
                                                  unsigned threads = 1) {
  if (alphas.empty()) throw ValidationError("calibrate_sweep: empty alpha list");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    validate_alpha(alphas[i]);
    if (i > 0 && !(alphas[i] > alphas[i - 1])) {
      throw ValidationError("calibrate_sweep: alphas must be strictly increasing");
    }
  }
  const std::size_t cells = scores.spec().cell_count();
  std::vector<std::vector<double>> q(
      alphas.size(), std::vector<double>(cells, std::numeric_limits<double>::infinity()));

  std::vector<std::size_t> finite_ranks;
  std::vector<std::size_t> finite_slots;
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    if (auto r = conformal_rank(scores.n(), alphas[j])) {
      finite_ranks.push_back(*r);
      finite_slots.push_back(j);
    }
  }
  if (!finite_ranks.empty()) {
    std::vector<std::vector<double>> selected(finite_ranks.size(),
                                              std::vector<double>(cells));
    detail::select_order_statistics(scores, finite_ranks, selected, threads);
    for (std::size_t j = 0; j < finite_slots.size(); ++j) {
      q[finite_slots[j]] = std::move(selected[j]);
    }
  }

  std::vector<QuantileField> out;
  out.reserve(alphas.size());
  for (std::size_t j = 0; j < alphas.size(); ++j) {
    out.emplace_back(scores.spec(), alphas[j], scores.n(), std::move(q[j]),
                     scores.strategy());
  }
  return out;
}

inline nlohmann::json quantile_metadata(const QuantileField& qf) {
  return {{"kind", "quantiles"},
          {"alpha", qf.alpha()},
          {"n", qf.n()},
          {"strategy", to_string(qf.strategy().kind)},
          {"sigma_floor", qf.strategy().sigma_floor}};
}

/// Writes q (with +inf kept as IEEE infinity) and a sidecar recording
/// alpha, n, strategy and sigma_floor.
inline void save_quantiles(const QuantileField& qf, const fs::path& path) {
  write_raw_container(path, qf.spec(), qf.q(), quantile_metadata(qf));
}

inline QuantileField load_quantiles(const fs::path& path) {
  RawContainer raw = read_raw_container(path, /*allow_infinite=*/true);
  const auto& j = raw.sidecar;
  try {
    if (j.value("kind", "") != "quantiles") {
      throw FormatError(FormatError::Kind::BadSidecar,
                        path.string() + ": sidecar is not a quantile field");
    }
    ScoreStrategy st{parse_strategy_kind(j.at("strategy").get<std::string>()),
                     j.at("sigma_floor").get<double>()};
    return QuantileField(std::move(raw.spec), j.at("alpha").get<double>(),
                         j.at("n").get<std::size_t>(), std::move(raw.data), st);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::BadSidecar, path.string() + ": " + e.what());
  }
}

}  // namespace cpgrid
