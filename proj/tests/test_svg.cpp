#include <limits>
#include <string>

#include <gtest/gtest.h>

#include "cpgrid/svg.hpp"

using namespace cpgrid;

namespace {

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) ++n;
  return n;
}

std::vector<double> ramp(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = 0.5 + 0.01 * static_cast<double>(i);
  return v;
}

}  // namespace

TEST(Heatmap, OneRectPerCellAndColorbar) {
  const auto plane = ramp(24 * 24);
  const std::string svg = svg::heatmap(plane, 24, 24, "width");
  EXPECT_EQ(count(svg, "<rect class=\"cell\""), 576u);
  EXPECT_EQ(count(svg, "<rect class=\"colorbar\""), 1u);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
}

TEST(Heatmap, Deterministic) {
  const auto plane = ramp(6 * 9);
  EXPECT_EQ(svg::heatmap(plane, 6, 9, "a"), svg::heatmap(plane, 6, 9, "a"));
}

TEST(Heatmap, AnnotatesRangeAndGreysNonFinite) {
  std::vector<double> plane{1.0, 2.0, std::numeric_limits<double>::infinity(), 3.5};
  const std::string svg = svg::heatmap(plane, 2, 2, "t <1>");
  EXPECT_NE(svg.find("min 1"), std::string::npos);
  EXPECT_NE(svg.find("max 3.5"), std::string::npos);
  EXPECT_EQ(count(svg, "#bdbdbd"), 1u);
  EXPECT_NE(svg.find("t &lt;1&gt;"), std::string::npos);
  EXPECT_THROW(svg::heatmap(plane, 3, 2, ""), ValidationError);
}

TEST(Colormap, EndpointsAndClamp) {
  const auto lo = svg::colormap(0.0);
  const auto hi = svg::colormap(1.0);
  const auto under = svg::colormap(-3.0);
  EXPECT_EQ(lo.r, under.r);
  EXPECT_EQ(lo.g, under.g);
  EXPECT_NE(lo.g, hi.g);
}

TEST(WidthPlane, ExtractsLeadAndVariable) {
  const auto s = GridSpec::make(2, 2, 3, 2);
  std::vector<double> lo(s.cell_count(), 0.0), hi(s.cell_count());
  for (std::size_t c = 0; c < hi.size(); ++c) hi[c] = static_cast<double>(c);
  const IntervalField iv(s, 0.1, lo, hi);
  const auto p = svg::width_plane(iv, 1, 1);
  ASSERT_EQ(p.size(), 6u);
  for (std::size_t x = 0; x < 2; ++x) {
    for (std::size_t y = 0; y < 3; ++y) {
      EXPECT_EQ(p[x * 3 + y], static_cast<double>(cell_index(s, 1, x, y, 1)));
    }
  }
}

TEST(CoverageChart, DiagonalAndOneCurvePerSeries) {
  std::vector<svg::CurveSeries> series{
      {"res", {{0.5, 0.52}, {0.9, 0.91}}},
      {"std", {{0.5, 0.49}, {0.9, 0.89}}},
  };
  const std::string svg = svg::coverage_chart(series);
  EXPECT_EQ(count(svg, "class=\"diagonal\""), 1u);
  EXPECT_EQ(count(svg, "<polyline class=\"curve\""), 2u);
  EXPECT_NE(svg.find(">res<"), std::string::npos);
}
