#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "cpgrid/intervals.hpp"
#include "test_util.hpp"

using namespace cpgrid;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const GridSpec kOne = GridSpec::make(1, 1, 1, 1);

FieldTensor scalar(double v) { return FieldTensor::filled(kOne, v); }

QuantileField q_res(const GridSpec& s, std::vector<double> q, double alpha = 0.1) {
  return QuantileField(s, alpha, 50, std::move(q), ScoreStrategy::res());
}

QuantileField q_std(const GridSpec& s, std::vector<double> q, double floor = 1e-8) {
  return QuantileField(s, 0.1, 50, std::move(q), ScoreStrategy::std_normalized(floor));
}

FieldTensor random_field(const GridSpec& s, std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> d(s.cell_count());
  for (double& x : d) x = u(rng);
  return FieldTensor(s, std::move(d));
}

}  // namespace

TEST(IntervalsRes, SymmetricBand) {
  const auto iv = intervals_res(scalar(5.0), q_res(kOne, {2.0}));
  EXPECT_EQ(iv.lower()[0], 3.0);
  EXPECT_EQ(iv.upper()[0], 7.0);
  EXPECT_EQ(iv.method(), "res");
  EXPECT_EQ(iv.alpha(), 0.1);
}

TEST(IntervalsRes, ZeroQuantileGivesPoint) {
  const auto iv = intervals_res(scalar(-1.5), q_res(kOne, {0.0}));
  EXPECT_EQ(iv.lower()[0], -1.5);
  EXPECT_EQ(iv.upper()[0], -1.5);
  EXPECT_TRUE(iv.contains(0, -1.5));
}

TEST(IntervalsRes, InfiniteQuantileGivesWholeLine) {
  const auto iv = intervals_res(scalar(3.0), q_res(kOne, {kInf}));
  EXPECT_EQ(iv.lower()[0], -kInf);
  EXPECT_EQ(iv.upper()[0], kInf);
  EXPECT_TRUE(iv.contains(0, 1e300));
}

TEST(IntervalsStd, ScaledBand) {
  const auto iv = intervals_std(scalar(5.0), scalar(2.0), q_std(kOne, {1.5}));
  EXPECT_EQ(iv.lower()[0], 2.0);
  EXPECT_EQ(iv.upper()[0], 8.0);
  EXPECT_EQ(iv.method(), "std");
}

TEST(IntervalsStd, ZeroSigmaUsesStoredFloor) {
  const auto iv = intervals_std(scalar(0.0), scalar(0.0), q_std(kOne, {1.5}, 1e-8));
  EXPECT_DOUBLE_EQ(iv.upper()[0] - iv.lower()[0], 3e-8);
}

TEST(IntervalsStd, InfiniteQuantileWithZeroSigma) {
  const auto iv = intervals_std(scalar(0.0), scalar(0.0), q_std(kOne, {kInf}));
  EXPECT_EQ(iv.lower()[0], -kInf);
  EXPECT_EQ(iv.upper()[0], kInf);
}

TEST(Intervals, StrategyMismatch) {
  EXPECT_THROW(intervals_res(scalar(0), q_std(kOne, {1.0})), ValidationError);
  EXPECT_THROW(intervals_std(scalar(0), scalar(1), q_res(kOne, {1.0})), ValidationError);
}

TEST(Intervals, SpecMismatch) {
  const auto other = GridSpec::make(1, 2, 1, 1);
  EXPECT_THROW(intervals_res(FieldTensor::filled(other, 0), q_res(kOne, {1.0})),
               SpecMismatchError);
  EXPECT_THROW(intervals_std(scalar(0), FieldTensor::filled(other, 1), q_std(kOne, {1.0})),
               SpecMismatchError);
}

TEST(Intervals, RejectsBadBounds) {
  EXPECT_THROW(IntervalField(kOne, 0.1, {1.0}, {0.0}), ValidationError);
  EXPECT_THROW(IntervalField(kOne, 0.1, {std::nan("")}, {0.0}), ValidationError);
  EXPECT_THROW(IntervalField(kOne, 0.0, {0.0}, {1.0}), ValidationError);
  EXPECT_THROW(IntervalField(kOne, 0.1, {0.0, 0.0}, {1.0, 1.0}), ValidationError);
}

TEST(IntervalProperties, ResWidthIndependentOfForecast) {
  std::mt19937_64 rng(21);
  const auto s = GridSpec::make(2, 4, 3, 2);
  const auto q = q_res(s, std::vector<double>(s.cell_count(), 0.75));
  for (int i = 0; i < 10; ++i) {
    const auto iv = intervals_res(random_field(s, rng, -100, 100), q);
    for (double w : interval_width(iv)) EXPECT_NEAR(w, 1.5, 1e-12);
  }
}

TEST(IntervalProperties, StdWidthMonotoneInSigma) {
  std::mt19937_64 rng(22);
  const auto s = GridSpec::make(1, 5, 5, 1);
  const auto q = q_std(s, std::vector<double>(s.cell_count(), 1.3));
  const auto mu = random_field(s, rng, -5, 5);
  const auto sd = random_field(s, rng, 0.0, 2.0);
  std::vector<double> bigger(sd.data().begin(), sd.data().end());
  for (double& x : bigger) x *= 1.5;
  const auto a = interval_width(intervals_std(mu, sd, q));
  const auto b = interval_width(intervals_std(mu, FieldTensor(s, bigger), q));
  for (std::size_t c = 0; c < a.size(); ++c) EXPECT_GE(b[c], a[c]);
}

TEST(IntervalProperties, LargerQuantileNests) {
  std::mt19937_64 rng(23);
  const auto s = GridSpec::make(2, 3, 3, 1);
  const auto f = random_field(s, rng, -3, 3);
  const auto q1 = random_field(s, rng, 0, 1);
  std::vector<double> q2(q1.data().begin(), q1.data().end());
  for (double& x : q2) x += 0.25;
  const auto small = intervals_res(f, q_res(s, {q1.data().begin(), q1.data().end()}));
  const auto large = intervals_res(f, q_res(s, q2));
  for (std::size_t c = 0; c < s.cell_count(); ++c) {
    EXPECT_LE(large.lower()[c], small.lower()[c]);
    EXPECT_GE(large.upper()[c], small.upper()[c]);
  }
}

TEST(IntervalProperties, TranslationEquivariance) {
  std::mt19937_64 rng(24);
  std::uniform_int_distribution<int> u(-32, 32);
  const auto s = GridSpec::make(1, 4, 4, 1);
  std::vector<double> f(s.cell_count()), q(s.cell_count()), shifted(s.cell_count());
  for (std::size_t c = 0; c < f.size(); ++c) {
    f[c] = u(rng) / 4.0;
    q[c] = std::abs(u(rng)) / 8.0;
    shifted[c] = f[c] + 2.5;
  }
  const auto a = intervals_res(FieldTensor(s, f), q_res(s, q));
  const auto b = intervals_res(FieldTensor(s, shifted), q_res(s, q));
  for (std::size_t c = 0; c < f.size(); ++c) {
    EXPECT_EQ(b.lower()[c], a.lower()[c] + 2.5);
    EXPECT_EQ(b.upper()[c], a.upper()[c] + 2.5);
  }
}

TEST(GaussianBaseline, UsesNormalQuantile) {
  const auto iv = gaussian_intervals(scalar(1.0), scalar(2.0), 0.05);
  EXPECT_NEAR(iv.upper()[0], 1.0 + 2.0 * 1.959963984540054, 1e-9);
  EXPECT_NEAR(iv.lower()[0], 1.0 - 2.0 * 1.959963984540054, 1e-9);
  EXPECT_EQ(iv.method(), "gaussian");
}

TEST(IntervalPersistence, RoundTripWithInfinity) {
  cpgrid::testing::TempDir dir;
  const auto s = GridSpec::make(2, 2, 1, 1);
  const IntervalField iv(s, 0.2, {-kInf, 0.0, 1.0, -2.0}, {kInf, 0.5, 1.0, 3.0}, "std");
  save_intervals(iv, dir / "sample_00000");
  EXPECT_TRUE(fs::exists(dir / "sample_00000.lower.cpt"));
  EXPECT_TRUE(fs::exists(dir / "sample_00000.upper.cpt"));
  EXPECT_TRUE(fs::exists(dir / "sample_00000.json"));
  const auto back = load_intervals(dir / "sample_00000");
  EXPECT_EQ(back.alpha(), 0.2);
  EXPECT_EQ(back.method(), "std");
  EXPECT_EQ(back.spec(), s);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_EQ(back.lower()[c], iv.lower()[c]);
    EXPECT_EQ(back.upper()[c], iv.upper()[c]);
  }
}
