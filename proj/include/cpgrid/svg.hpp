#pragma once

// Static SVG figures: interval-width heatmaps and coverage curves. Output is
// a pure function of the inputs (fixed-precision number formatting).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpgrid/error.hpp"
#include "cpgrid/evaluate.hpp"
#include "cpgrid/intervals.hpp"

namespace cpgrid::svg {

struct Rgb {
  int r, g, b;
};

namespace detail {

inline std::string num(double x, int precision = 2) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.*f", precision, x);
  return buf;
}

inline std::string label(double x) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

inline std::string hex(Rgb c) {
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c.r, c.g, c.b);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

// Viridis sampled at 0, .25, .5, .75, 1.
inline constexpr std::array<Rgb, 5> kViridis{{
    {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};

}  // namespace detail

/// Linear colour map over [0,1], clamped.
inline Rgb colormap(double u) {
  using detail::kViridis;
  if (!(u > 0.0)) return kViridis.front();
  if (u >= 1.0) return kViridis.back();
  const double pos = u * static_cast<double>(kViridis.size() - 1);
  const auto i = static_cast<std::size_t>(pos);
  const double f = pos - static_cast<double>(i);
  const Rgb a = kViridis[i], b = kViridis[i + 1];
  auto lerp = [f](int x, int y) {
    return static_cast<int>(std::lround(x + (y - x) * f));
  };
  return {lerp(a.r, b.r), lerp(a.g, b.g), lerp(a.b, b.b)};
}

/// Widths of one (lead, variable) slice as an nx-by-ny row-major plane.
inline std::vector<double> width_plane(const IntervalField& iv, std::size_t lead,
                                       std::size_t var) {
  const GridSpec& s = iv.spec();
  if (lead >= s.t_out || var >= s.nvar) throw ValidationError("width_plane: index out of range");
  std::vector<double> plane(s.nx * s.ny);
  for (std::size_t x = 0; x < s.nx; ++x) {
    for (std::size_t y = 0; y < s.ny; ++y) {
      const std::size_t c = flat_index(s, lead, x, y, var);
      plane[x * s.ny + y] = iv.upper()[c] - iv.lower()[c];
    }
  }
  return plane;
}

/// Heatmap of an nx-by-ny plane: one <rect class="cell"> per grid cell
/// (x down, y across), a gradient colour bar, and min/max annotations.
/// Non-finite values are drawn grey and excluded from the colour range.
inline std::string heatmap(std::span<const double> plane, std::size_t nx, std::size_t ny,
                           const std::string& title) {
  if (plane.size() != nx * ny || nx == 0 || ny == 0) {
    throw ValidationError("heatmap: plane size does not match nx*ny");
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (double v : plane) {
    if (std::isfinite(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  const bool any_finite = lo <= hi;
  const double span = any_finite && hi > lo ? hi - lo : 1.0;

  const double cell = std::clamp(480.0 / static_cast<double>(std::max(nx, ny)), 2.0, 24.0);
  const double margin = 40.0;
  const double map_w = cell * static_cast<double>(ny);
  const double map_h = cell * static_cast<double>(nx);
  const double bar_x = margin + map_w + 20.0;
  const double width = bar_x + 90.0;
  const double height = margin + map_h + 30.0;

  using detail::num;
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
       num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  o += "<defs><linearGradient id=\"cbar\" x1=\"0\" y1=\"1\" x2=\"0\" y2=\"0\">";
  for (int i = 0; i <= 4; ++i) {
    o += "<stop offset=\"" + num(i / 4.0) + "\" stop-color=\"" +
         detail::hex(colormap(i / 4.0)) + "\"/>";
  }
  o += "</linearGradient></defs>\n";
  o += "<text x=\"" + num(margin) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" +
       detail::escape(title) + "</text>\n";
  o += "<g shape-rendering=\"crispEdges\">\n";
  for (std::size_t x = 0; x < nx; ++x) {
    for (std::size_t y = 0; y < ny; ++y) {
      const double v = plane[x * ny + y];
      const std::string fill =
          std::isfinite(v) ? detail::hex(colormap((v - lo) / span)) : std::string("#bdbdbd");
      o += "<rect class=\"cell\" x=\"" + num(margin + cell * static_cast<double>(y)) +
           "\" y=\"" + num(margin + cell * static_cast<double>(x)) + "\" width=\"" + num(cell) +
           "\" height=\"" + num(cell) + "\" fill=\"" + fill + "\"/>\n";
    }
  }
  o += "</g>\n";
  o += "<rect class=\"colorbar\" x=\"" + num(bar_x) + "\" y=\"" + num(margin) +
       "\" width=\"16\" height=\"" + num(map_h) + "\" fill=\"url(#cbar)\" stroke=\"#333\"/>\n";
  const std::string max_label = any_finite ? detail::label(hi) : std::string("n/a");
  const std::string min_label = any_finite ? detail::label(lo) : std::string("n/a");
  o += "<text class=\"max\" x=\"" + num(bar_x + 22.0) + "\" y=\"" + num(margin + 10.0) +
       "\" font-family=\"sans-serif\" font-size=\"11\">max " + max_label + "</text>\n";
  o += "<text class=\"min\" x=\"" + num(bar_x + 22.0) + "\" y=\"" + num(margin + map_h) +
       "\" font-family=\"sans-serif\" font-size=\"11\">min " + min_label + "</text>\n";
  o += "</svg>\n";
  return o;
}

struct CurveSeries {
  std::string name;
  std::vector<CurvePoint> points;
};

/// Empirical coverage against nominal 1 - alpha on the unit square, with the
/// dashed diagonal as reference. One <polyline class="curve"> per series.
inline std::string coverage_chart(std::span<const CurveSeries> series) {
  constexpr double left = 60.0, top = 30.0, plot = 400.0;
  constexpr std::array<const char*, 6> colours{"#1f77b4", "#d62728", "#2ca02c",
                                               "#9467bd", "#ff7f0e", "#8c564b"};
  using detail::num;
  auto px = [&](double u) { return left + plot * std::clamp(u, 0.0, 1.0); };
  auto py = [&](double v) { return top + plot * (1.0 - std::clamp(v, 0.0, 1.0)); };

  const double width = left + plot + 160.0;
  const double height = top + plot + 50.0;
  std::string o;
  o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
       num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
  o += "<rect x=\"" + num(left) + "\" y=\"" + num(top) + "\" width=\"" + num(plot) +
       "\" height=\"" + num(plot) + "\" fill=\"none\" stroke=\"#333\"/>\n";
  for (int i = 0; i <= 10; ++i) {
    const double u = i / 10.0;
    o += "<text x=\"" + num(px(u)) + "\" y=\"" + num(top + plot + 16.0) +
         "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">" + num(u, 1) +
         "</text>\n";
    o += "<text x=\"" + num(left - 6.0) + "\" y=\"" + num(py(u) + 3.0) +
         "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" + num(u, 1) +
         "</text>\n";
  }
  o += "<text x=\"" + num(px(0.5)) + "\" y=\"" + num(top + plot + 38.0) +
       "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
       "nominal coverage 1 - alpha</text>\n";
  o += "<text x=\"16\" y=\"" + num(py(0.5)) +
       "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
       num(py(0.5)) + ")\">empirical coverage</text>\n";
  o += "<line class=\"diagonal\" x1=\"" + num(px(0.0)) + "\" y1=\"" + num(py(0.0)) +
       "\" x2=\"" + num(px(1.0)) + "\" y2=\"" + num(py(1.0)) +
       "\" stroke=\"#888\" stroke-dasharray=\"6 4\"/>\n";
  for (std::size_t s = 0; s < series.size(); ++s) {
    const char* colour = colours[s % colours.size()];
    std::string pts;
    for (const auto& p : series[s].points) {
      if (!pts.empty()) pts += ' ';
      pts += num(px(p.nominal), 3) + "," + num(py(p.coverage), 3);
    }
    o += "<polyline class=\"curve\" fill=\"none\" stroke=\"" + std::string(colour) +
         "\" stroke-width=\"2\" points=\"" + pts + "\"/>\n";
    for (const auto& p : series[s].points) {
      o += "<circle cx=\"" + num(px(p.nominal), 3) + "\" cy=\"" + num(py(p.coverage), 3) +
           "\" r=\"3\" fill=\"" + colour + "\"/>\n";
    }
    const double ly = top + 14.0 + 18.0 * static_cast<double>(s);
    o += "<line x1=\"" + num(left + plot + 14.0) + "\" y1=\"" + num(ly) + "\" x2=\"" +
         num(left + plot + 34.0) + "\" y2=\"" + num(ly) + "\" stroke=\"" + colour +
         "\" stroke-width=\"2\"/>\n";
    o += "<text x=\"" + num(left + plot + 40.0) + "\" y=\"" + num(ly + 4.0) +
         "\" font-family=\"sans-serif\" font-size=\"11\">" + detail::escape(series[s].name) +
         "</text>\n";
  }
  o += "</svg>\n";
  return o;
}

}  // namespace cpgrid::svg
