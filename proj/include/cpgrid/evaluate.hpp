#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cpgrid/container.hpp"
#include "cpgrid/error.hpp"
#include "cpgrid/field_tensor.hpp"
#include "cpgrid/intervals.hpp"
#include "cpgrid/parallel.hpp"

namespace cpgrid {

/// Coverage and width statistics of one (lead, variable) slice.
struct SliceStats {
  double coverage = 0.0;
  double mean_width = 0.0;  // over finite widths; NaN when none
  std::uint64_t n_infinite = 0;
};

struct CoverageReport {
  GridSpec spec;
  double alpha = 0.0;
  std::size_t n_test = 0;
  std::vector<double> per_cell_coverage;
  double domain_coverage = 0.0;
  std::vector<double> per_leadtime_coverage;
  std::vector<double> per_variable_coverage;
  double mean_width = 0.0;
  std::vector<double> per_leadtime_mean_width;
  std::vector<double> per_variable_mean_width;
  /// Count of (test sample, cell) pairs with infinite width.
  std::uint64_t n_infinite = 0;
  /// slices[t * nvar + v]
  std::vector<SliceStats> slices;
};

namespace detail {

inline double ratio_or_nan(double num, std::uint64_t den) {
  return den == 0 ? std::numeric_limits<double>::quiet_NaN()
                  : num / static_cast<double>(den);
}

}  // namespace detail

/// Streams (interval, truth) pairs into per-cell tallies. Work is split over
/// cells only, so the report is bitwise independent of the thread count.
class CoverageAccumulator {
 public:
  CoverageAccumulator(GridSpec spec, double alpha, unsigned threads = 1)
      : spec_(std::move(spec)), alpha_(alpha), threads_(threads) {
    spec_.validate();
    validate_alpha(alpha_);
    const std::size_t cells = spec_.cell_count();
    covered_.assign(cells, 0);
    finite_.assign(cells, 0);
    width_sum_.assign(cells, 0.0);
  }

  void add(const IntervalField& iv, const FieldTensor& truth) {
    require_same_spec(spec_, iv.spec(), "empirical_coverage");
    require_same_spec(spec_, truth.spec(), "empirical_coverage");
    if (iv.alpha() != alpha_) {
      throw ValidationError("empirical_coverage: mixed alpha (" + std::to_string(iv.alpha()) +
                            " vs " + std::to_string(alpha_) + ")");
    }
    const auto lo = iv.lower();
    const auto hi = iv.upper();
    const auto y = truth.data();
    parallel_for(spec_.cell_count(), threads_, [&](std::size_t b, std::size_t e) {
      for (std::size_t c = b; c < e; ++c) {
        if (lo[c] <= y[c] && y[c] <= hi[c]) ++covered_[c];
        const double w = hi[c] - lo[c];
        if (std::isfinite(w)) {
          width_sum_[c] += w;
          ++finite_[c];
        }
      }
    });
    ++m_;
  }

  std::size_t size() const noexcept { return m_; }

  CoverageReport report() const {
    if (m_ == 0) throw ValidationError("empirical_coverage: no test samples");
    const std::size_t cells = spec_.cell_count();
    const std::size_t per_lead = spec_.cells_per_lead();
    const std::size_t nvar = spec_.nvar;

    CoverageReport r;
    r.spec = spec_;
    r.alpha = alpha_;
    r.n_test = m_;
    r.per_cell_coverage.resize(cells);
    for (std::size_t c = 0; c < cells; ++c) {
      r.per_cell_coverage[c] = static_cast<double>(covered_[c]) / static_cast<double>(m_);
    }
    r.domain_coverage = pairwise_sum(r.per_cell_coverage) / static_cast<double>(cells);

    auto infinite_at = [&](std::size_t c) { return m_ - finite_[c]; };

    // Lead-time slices are contiguous blocks of per_lead cells.
    std::vector<double> cov_buf, width_buf;
    for (std::size_t t = 0; t < spec_.t_out; ++t) {
      const std::size_t b = t * per_lead;
      r.per_leadtime_coverage.push_back(
          pairwise_sum(std::span<const double>(r.per_cell_coverage).subspan(b, per_lead)) /
          static_cast<double>(per_lead));
      std::uint64_t fin = 0;
      for (std::size_t c = b; c < b + per_lead; ++c) fin += finite_[c];
      r.per_leadtime_mean_width.push_back(detail::ratio_or_nan(
          pairwise_sum(std::span<const double>(width_sum_).subspan(b, per_lead)), fin));
    }

    // Variable and (lead, variable) slices are strided.
    auto strided = [&](std::size_t t_begin, std::size_t t_end, std::size_t v) {
      cov_buf.clear();
      width_buf.clear();
      SliceStats s;
      std::uint64_t fin = 0;
      for (std::size_t t = t_begin; t < t_end; ++t) {
        for (std::size_t c = t * per_lead + v; c < (t + 1) * per_lead; c += nvar) {
          cov_buf.push_back(r.per_cell_coverage[c]);
          width_buf.push_back(width_sum_[c]);
          fin += finite_[c];
          s.n_infinite += infinite_at(c);
        }
      }
      s.coverage = pairwise_sum(cov_buf) / static_cast<double>(cov_buf.size());
      s.mean_width = detail::ratio_or_nan(pairwise_sum(width_buf), fin);
      return s;
    };
    for (std::size_t v = 0; v < nvar; ++v) {
      const SliceStats s = strided(0, spec_.t_out, v);
      r.per_variable_coverage.push_back(s.coverage);
      r.per_variable_mean_width.push_back(s.mean_width);
    }
    for (std::size_t t = 0; t < spec_.t_out; ++t) {
      for (std::size_t v = 0; v < nvar; ++v) r.slices.push_back(strided(t, t + 1, v));
    }

    std::uint64_t fin = 0;
    for (std::size_t c = 0; c < cells; ++c) {
      fin += finite_[c];
      r.n_infinite += infinite_at(c);
    }
    r.mean_width = detail::ratio_or_nan(pairwise_sum(width_sum_), fin);
    return r;
  }

 private:
  GridSpec spec_;
  double alpha_;
  unsigned threads_;
  std::size_t m_ = 0;
  std::vector<std::uint64_t> covered_;
  std::vector<std::uint64_t> finite_;
  std::vector<double> width_sum_;
};

/// Fraction of test truths inside their intervals, per cell and aggregated.
/// Boundary hits count as covered.
inline CoverageReport empirical_coverage(std::span<const IntervalField> ivs,
                                         std::span<const FieldTensor> truths,
                                         unsigned threads = 1) {
  if (ivs.empty() || ivs.size() != truths.size()) {
    throw ValidationError("empirical_coverage: need equal, non-empty interval and truth lists");
  }
  CoverageAccumulator acc(ivs.front().spec(), ivs.front().alpha(), threads);
  for (std::size_t i = 0; i < ivs.size(); ++i) acc.add(ivs[i], truths[i]);
  return acc.report();
}

struct CurvePoint {
  double nominal = 0.0;  // 1 - alpha
  double coverage = 0.0;
};

/// (1 - alpha, domain coverage) points sorted by nominal coverage.
inline std::vector<CurvePoint> coverage_curve(std::span<const CoverageReport> reports) {
  std::vector<CurvePoint> pts;
  for (const auto& r : reports) pts.push_back({1.0 - r.alpha, r.domain_coverage});
  std::sort(pts.begin(), pts.end(),
            [](const CurvePoint& a, const CurvePoint& b) { return a.nominal < b.nominal; });
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (!(pts[i].nominal > pts[i - 1].nominal)) {
      throw ValidationError("coverage_curve: duplicate alpha in grid");
    }
  }
  return pts;
}

/// Coverage curve from interval sweeps: ivs_per_alpha[j][i] is the interval
/// for test sample i at the j-th alpha.
inline std::vector<CurvePoint> coverage_curve(
    std::span<const std::vector<IntervalField>> ivs_per_alpha,
    std::span<const FieldTensor> truths, unsigned threads = 1) {
  std::vector<CoverageReport> reports;
  for (const auto& ivs : ivs_per_alpha) {
    reports.push_back(empirical_coverage(ivs, truths, threads));
  }
  return coverage_curve(reports);
}

struct WidthSummary {
  double mean = 0.0;  // NaN when every width is infinite
  std::vector<double> per_leadtime;
  std::uint64_t n_infinite = 0;
};

/// Mean of finite interval widths over all cells and fields.
inline WidthSummary mean_width(std::span<const IntervalField> ivs) {
  if (ivs.empty()) throw ValidationError("mean_width: empty interval list");
  const GridSpec& spec = ivs.front().spec();
  const std::size_t per_lead = spec.cells_per_lead();
  std::vector<double> sums(spec.cell_count(), 0.0);
  std::vector<std::uint64_t> fin(spec.cell_count(), 0);
  WidthSummary out;
  for (const auto& iv : ivs) {
    require_same_spec(spec, iv.spec(), "mean_width");
    for (std::size_t c = 0; c < sums.size(); ++c) {
      const double w = iv.upper()[c] - iv.lower()[c];
      if (std::isfinite(w)) {
        sums[c] += w;
        ++fin[c];
      } else {
        ++out.n_infinite;
      }
    }
  }
  std::uint64_t total = 0;
  for (std::size_t t = 0; t < spec.t_out; ++t) {
    std::uint64_t f = 0;
    for (std::size_t c = t * per_lead; c < (t + 1) * per_lead; ++c) f += fin[c];
    total += f;
    out.per_leadtime.push_back(detail::ratio_or_nan(
        pairwise_sum(std::span<const double>(sums).subspan(t * per_lead, per_lead)), f));
  }
  out.mean = detail::ratio_or_nan(pairwise_sum(sums), total);
  return out;
}

namespace detail {

inline nlohmann::json number_or_null(double x) {
  return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

inline nlohmann::json numbers_or_null(std::span<const double> xs) {
  nlohmann::json a = nlohmann::json::array();
  for (double x : xs) a.push_back(number_or_null(x));
  return a;
}

inline std::string fmt_number(double x) {
  if (!std::isfinite(x)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

}  // namespace detail

/// JSON form of a report. Non-finite widths serialize as null.
inline nlohmann::json to_json(const CoverageReport& r, bool include_cells = true) {
  nlohmann::json j{
      {"alpha", r.alpha},
      {"nominal_coverage", 1.0 - r.alpha},
      {"n_test", r.n_test},
      {"domain_coverage", r.domain_coverage},
      {"per_leadtime_coverage", r.per_leadtime_coverage},
      {"per_variable_coverage", r.per_variable_coverage},
      {"mean_width", detail::number_or_null(r.mean_width)},
      {"per_leadtime_mean_width", detail::numbers_or_null(r.per_leadtime_mean_width)},
      {"per_variable_mean_width", detail::numbers_or_null(r.per_variable_mean_width)},
      {"n_infinite", r.n_infinite},
      {"spec", spec_to_json(r.spec)},
  };
  if (include_cells) j["per_cell_coverage"] = r.per_cell_coverage;
  return j;
}

inline constexpr const char* kCoverageCsvHeader =
    "lead_hours,variable,coverage,mean_width,n_infinite";

/// CSV rows for every (lead, variable) slice, then per-lead rows with
/// variable "all", per-variable rows with lead_hours "all", and one total row.
inline std::string to_csv(const CoverageReport& r) {
  std::string out = std::string(kCoverageCsvHeader) + "\n";
  auto row = [&](const std::string& lead, const std::string& var, double cov, double width,
                 std::uint64_t ninf) {
    out += lead + "," + var + "," + detail::fmt_number(cov) + "," + detail::fmt_number(width) +
           "," + std::to_string(ninf) + "\n";
  };
  const auto& s = r.spec;
  for (std::size_t t = 0; t < s.t_out; ++t) {
    for (std::size_t v = 0; v < s.nvar; ++v) {
      const auto& st = r.slices[t * s.nvar + v];
      row(detail::fmt_number(s.lead_hours[t]), s.variable_names[v], st.coverage,
          st.mean_width, st.n_infinite);
    }
  }
  for (std::size_t t = 0; t < s.t_out; ++t) {
    std::uint64_t ninf = 0;
    for (std::size_t v = 0; v < s.nvar; ++v) ninf += r.slices[t * s.nvar + v].n_infinite;
    row(detail::fmt_number(s.lead_hours[t]), "all", r.per_leadtime_coverage[t],
        r.per_leadtime_mean_width[t], ninf);
  }
  for (std::size_t v = 0; v < s.nvar; ++v) {
    std::uint64_t ninf = 0;
    for (std::size_t t = 0; t < s.t_out; ++t) ninf += r.slices[t * s.nvar + v].n_infinite;
    row("all", s.variable_names[v], r.per_variable_coverage[v], r.per_variable_mean_width[v],
        ninf);
  }
  row("all", "all", r.domain_coverage, r.mean_width, r.n_infinite);
  return out;
}

/// Reads the aggregate fields of a JSON report (per-cell values optional).
inline CoverageReport report_from_json(const nlohmann::json& j) {
  auto nums = [](const nlohmann::json& a) {
    std::vector<double> v;
    for (const auto& x : a) {
      v.push_back(x.is_null() ? std::numeric_limits<double>::quiet_NaN() : x.get<double>());
    }
    return v;
  };
  try {
    CoverageReport r;
    r.spec = spec_from_json(j.at("spec"));
    r.alpha = j.at("alpha").get<double>();
    r.n_test = j.at("n_test").get<std::size_t>();
    r.domain_coverage = j.at("domain_coverage").get<double>();
    r.per_leadtime_coverage = nums(j.at("per_leadtime_coverage"));
    r.per_variable_coverage = nums(j.at("per_variable_coverage"));
    r.mean_width = j.at("mean_width").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                : j.at("mean_width").get<double>();
    r.per_leadtime_mean_width = nums(j.at("per_leadtime_mean_width"));
    r.per_variable_mean_width = nums(j.at("per_variable_mean_width"));
    r.n_infinite = j.at("n_infinite").get<std::uint64_t>();
    if (j.contains("per_cell_coverage")) r.per_cell_coverage = nums(j.at("per_cell_coverage"));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::BadSidecar, std::string("coverage report: ") + e.what());
  }
}

}  // namespace cpgrid
