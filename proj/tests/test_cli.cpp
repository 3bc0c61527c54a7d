#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "cpgrid/cpgrid.hpp"
#include "test_util.hpp"

using namespace cpgrid;
using cpgrid::testing::TempDir;

namespace {

struct CliResult {
  int code;
  std::string err;
};

CliResult cli(const std::string& args, const TempDir& scratch) {
  const auto err_file = scratch / "stderr.txt";
  const std::string cmd = std::string("\"") + CPGRID_CLI_PATH + "\" " + args + " > \"" +
                          (scratch / "stdout.txt").string() + "\" 2> \"" + err_file.string() +
                          "\"";
  const int status = std::system(cmd.c_str());
  std::ifstream in(err_file);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::size_t count_suffix(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      ++n;
    }
  }
  return n;
}

std::string small_grid() { return "--nx 4 --ny 3 --t-out 2 --nvar 1 --corr-len 1 "; }

}  // namespace

TEST(Cli, GenerateWritesAllRolesAndIsReproducible) {
  TempDir tmp;
  const auto a = tmp / "a";
  const auto b = tmp / "b";
  ASSERT_EQ(cli("generate " + small_grid() + "--n-samples 5 --seed 9 --out " + a.string(), tmp).code, 0);
  ASSERT_EQ(cli("generate " + small_grid() + "--n-samples 5 --seed 9 --out " + b.string(), tmp).code, 0);
  for (const char* role : {".truth.cpt", ".prediction.cpt", ".mean.cpt", ".sigma.cpt"}) {
    EXPECT_EQ(count_suffix(a, role), 5u) << role;
  }
  EXPECT_TRUE(fs::exists(a / "manifest.json"));
  EXPECT_FALSE(fs::exists(a / ".cpgrid.lock"));
  for (const auto& e : fs::directory_iterator(a)) {
    const auto name = e.path().filename();
    EXPECT_EQ(cpgrid::testing::read_bytes(e.path()), cpgrid::testing::read_bytes(b / name.string()))
        << name;
  }
  const auto side = read_json_file(a / "sample_00000.truth.json");
  EXPECT_EQ(side["nx"], 4);
  EXPECT_EQ(side["lead_hours"], (std::vector<double>{3.0, 6.0}));
}

TEST(Cli, UsageErrorsExitTwo) {
  TempDir tmp;
  const CliResult bad_ar = cli("generate --ar 1.5 --out " + (tmp / "g").string(), tmp);
  EXPECT_EQ(bad_ar.code, 2);
  EXPECT_NE(bad_ar.err.find("ar_coeff"), std::string::npos);
  EXPECT_EQ(cli("generate", tmp).code, 2);
  EXPECT_EQ(cli("frobnicate", tmp).code, 2);
  EXPECT_EQ(cli("--help", tmp).code, 0);
}

TEST(Cli, MissingInputIsRuntimeError) {
  TempDir tmp;
  fs::create_directories(tmp / "cal");
  cpgrid::testing::write_bytes(tmp / "cal" / "sample_00000.truth.cpt", {'C', 'P', 'T', 'F'});
  const CliResult r = cli("calibrate --calib-dir " + (tmp / "cal").string() + " --alpha 0.1 --out " +
                        (tmp / "q").string(),
                    tmp);
  EXPECT_EQ(r.code, 1);
}

TEST(Cli, CalibrateWarnsOnInfiniteQuantiles) {
  TempDir tmp;
  const auto cal = tmp / "cal";
  const auto q = tmp / "q";
  ASSERT_EQ(cli("generate " + small_grid() + "--n-samples 3 --out " + cal.string(), tmp).code, 0);
  const CliResult r = cli("calibrate --calib-dir " + cal.string() + " --alpha 0.1 --out " + q.string(), tmp);
  ASSERT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("WARN: infinite quantiles (n=3 < required 9)"), std::string::npos);
  const auto qf = load_quantiles(q / "quantiles_alpha_0.1.cpt");
  for (double v : qf.q()) EXPECT_TRUE(std::isinf(v));
}

TEST(Cli, FullPipeline) {
  TempDir tmp;
  const auto cal = tmp / "cal", test = tmp / "test", q = tmp / "q";
  ASSERT_EQ(cli("generate " + small_grid() + "--n-samples 40 --seed 1 --out " + cal.string(), tmp).code, 0);
  ASSERT_EQ(cli("generate " + small_grid() + "--n-samples 10 --seed 2 --out " + test.string(), tmp).code, 0);
  ASSERT_EQ(cli("calibrate --calib-dir " + cal.string() + " --alpha 0.1,0.05,0.2 --out " + q.string(), tmp).code, 0);
  EXPECT_EQ(count_suffix(q, ".cpt"), 3u);
  EXPECT_TRUE(fs::exists(q / "quantiles_alpha_0.05.cpt"));
  EXPECT_EQ(cli("calibrate --calib-dir " + cal.string() + " --alpha 0.1,0.1 --out " + q.string(), tmp).code, 2);

  const auto iv = tmp / "iv";
  ASSERT_EQ(cli("predict --quantiles " + (q / "quantiles_alpha_0.1.cpt").string() +
                    " --prediction-dir " + test.string() + " --out " + iv.string(),
                tmp).code,
            0);
  EXPECT_EQ(count_suffix(iv, ".lower.cpt"), 10u);

  const auto report = tmp / "eval" / "report.json";
  ASSERT_EQ(cli("evaluate --intervals-dir " + iv.string() + " --truth-dir " + test.string() +
                    " --out " + report.string(),
                tmp).code,
            0);
  const auto j = read_json_file(report);
  EXPECT_EQ(j["n_test"], 10);
  EXPECT_EQ(j["alpha"], 0.1);
  EXPECT_TRUE(fs::exists(tmp / "eval" / "report.csv"));
  EXPECT_TRUE(fs::exists(tmp / "eval" / "report.cells.cpt"));
  EXPECT_TRUE(fs::exists(tmp / "eval" / "report.manifest.json"));

  const auto svg_dir = tmp / "svg";
  ASSERT_EQ(cli("report --intervals " + (iv / "sample_00000").string() +
                    " --lead-times 3,6 --var var0 --out " + svg_dir.string(),
                tmp).code,
            0);
  EXPECT_TRUE(fs::exists(svg_dir / "width_var0_lead3h.svg"));
  EXPECT_TRUE(fs::exists(svg_dir / "width_var0_lead6h.csv"));
  EXPECT_EQ(cli("report --intervals " + (iv / "sample_00000").string() +
                    " --lead-times 3 --var bogus --out " + svg_dir.string(),
                tmp).code,
            2);
  EXPECT_EQ(cli("report --intervals " + (iv / "sample_00000").string() +
                    " --lead-times 9 --var var0 --out " + svg_dir.string(),
                tmp).code,
            2);
  ASSERT_EQ(cli("report --coverage-curve " + report.string() + " --label res --out " +
                    svg_dir.string(),
                tmp).code,
            0);
  EXPECT_TRUE(fs::exists(svg_dir / "coverage_curve.svg"));
}

TEST(Cli, PredictStdWithoutSigmaExitsTwo) {
  TempDir tmp;
  const auto cal = tmp / "cal", q = tmp / "q";
  ASSERT_EQ(cli("generate " + small_grid() + "--n-samples 20 --out " + cal.string(), tmp).code, 0);
  ASSERT_EQ(cli("calibrate --calib-dir " + cal.string() + " --strategy std --alpha 0.2 --out " +
                    q.string(),
                tmp).code,
            0);
  const CliResult r = cli("predict --quantiles " + (q / "quantiles_alpha_0.2.cpt").string() +
                        " --prediction " + (cal / "sample_00000.mean.cpt").string() + " --out " +
                        (tmp / "iv").string(),
                    tmp);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("--sigma"), std::string::npos);
}

TEST(Cli, EvaluateEmptyDirExitsTwo) {
  TempDir tmp;
  fs::create_directories(tmp / "empty");
  EXPECT_EQ(cli("evaluate --intervals-dir " + (tmp / "empty").string() + " --truth-dir " +
                    (tmp / "empty").string() + " --out " + (tmp / "r.json").string(),
                tmp).code,
            2);
}

TEST(Cli, EvaluateCountsInfiniteIntervals) {
  TempDir tmp;
  const auto s = GridSpec::make(2, 2, 2, 1);
  const double inf = std::numeric_limits<double>::infinity();
  fs::create_directories(tmp / "iv");
  fs::create_directories(tmp / "truth");
  for (int i = 0; i < 3; ++i) {
    const std::string stem = "sample_0000" + std::to_string(i);
    save_intervals(IntervalField(s, 0.1, std::vector<double>(8, -inf), std::vector<double>(8, inf)),
                   tmp / "iv" / stem);
    write_container(FieldTensor::filled(s, 1e12 * i), tmp / "truth" / (stem + ".truth.cpt"));
  }
  ASSERT_EQ(cli("evaluate --intervals-dir " + (tmp / "iv").string() + " --truth-dir " +
                    (tmp / "truth").string() + " --out " + (tmp / "r.json").string(),
                tmp).code,
            0);
  const auto j = read_json_file(tmp / "r.json");
  EXPECT_EQ(j["domain_coverage"], 1.0);
  EXPECT_EQ(j["n_infinite"], 24);
  EXPECT_TRUE(j["mean_width"].is_null());
}

TEST(Cli, EvaluateSpecMismatchExitsOne) {
  TempDir tmp;
  fs::create_directories(tmp / "iv");
  fs::create_directories(tmp / "truth");
  const auto s = GridSpec::make(1, 2, 2, 1);
  save_intervals(IntervalField(s, 0.1, std::vector<double>(4, 0), std::vector<double>(4, 1)),
                 tmp / "iv" / "sample_00000");
  write_container(FieldTensor::filled(GridSpec::make(1, 3, 2, 1), 0.5),
                  tmp / "truth" / "sample_00000.truth.cpt");
  EXPECT_EQ(cli("evaluate --intervals-dir " + (tmp / "iv").string() + " --truth-dir " +
                    (tmp / "truth").string() + " --out " + (tmp / "r.json").string(),
                tmp).code,
            1);
}

TEST(Manifest, Fnv1aReferenceValues) {
  Fnv1a empty;
  EXPECT_EQ(empty.hex(), "cbf29ce484222325");
  Fnv1a a;
  a.update("a", 1);
  EXPECT_EQ(a.value(), 0xAF63DC4C8601EC8CULL);
  Fnv1a foobar;
  foobar.update("foobar", 6);
  EXPECT_EQ(foobar.value(), 0x85944171F73967E8ULL);
}

TEST(Manifest, TimestampsNullByDefault) {
  RunManifest m;
  m.command = "generate";
  const auto j = m.to_json();
  EXPECT_TRUE(j["timestamps"]["started"].is_null());
  EXPECT_EQ(j["tool_version"], kToolVersion);
}

TEST(Manifest, OutputLockIsExclusive) {
  TempDir tmp;
  {
    OutputLock lock(tmp.path());
    EXPECT_TRUE(fs::exists(tmp / ".cpgrid.lock"));
    EXPECT_THROW(OutputLock second(tmp.path()), IoError);
  }
  EXPECT_FALSE(fs::exists(tmp / ".cpgrid.lock"));
  EXPECT_NO_THROW(OutputLock again(tmp.path()));
}
