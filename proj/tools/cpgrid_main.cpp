// cpgrid: command-line front end for per-cell conformal calibration of
// gridded forecasts.
//
// Exit codes: 0 success, 1 runtime or I/O failure, 2 usage or validation.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpgrid/cpgrid.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public cpgrid::ValidationError {
 public:
  using cpgrid::ValidationError::ValidationError;
};

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<double> parse_number_list(const std::string& text, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "' as a number");
    }
    out.push_back(v);
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fmt_g(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%g", x);
  return buf;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

/// Sorted stems of files in `dir` named `<stem><suffix>`.
std::vector<std::string> list_stems(const fs::path& dir, const std::string& suffix) {
  if (!fs::is_directory(dir)) throw UsageError("not a directory: " + dir.string());
  std::vector<std::string> stems;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (e.is_regular_file() && ends_with(name, suffix)) {
      stems.push_back(name.substr(0, name.size() - suffix.size()));
    }
  }
  std::sort(stems.begin(), stems.end());
  return stems;
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw cpgrid::IoError(dir.string(), "cannot create output directory");
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw cpgrid::IoError(path.string(), "cannot open for writing");
  out << text;
  if (!out) throw cpgrid::IoError(path.string(), "write failed");
}

/// Hash of the command, its flags and the bytes of every input file.
std::string config_hash(const std::string& command, const json& flags,
                        const std::vector<std::string>& inputs) {
  cpgrid::Fnv1a h;
  h.update(command);
  h.update(flags.dump());
  for (const auto& in : inputs) {
    h.update(in);
    h.update_file(in);
  }
  return h.hex();
}

struct Common {
  bool record_time = false;
  unsigned threads = 1;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_flag("--record-time", c.record_time, "Record wall-clock timestamps in the manifest");
  sub->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
}

cpgrid::RunManifest start_manifest(const std::string& command, const json& flags,
                                   const Common& c) {
  cpgrid::RunManifest m;
  m.command = command;
  m.flags = flags;
  if (c.record_time) m.started = now_utc();
  return m;
}

void finish_manifest(cpgrid::RunManifest& m, const Common& c, const fs::path& path,
                     json extra = json::object()) {
  m.config_hash = config_hash(m.command, m.flags, m.inputs);
  if (c.record_time) m.finished = now_utc();
  json j = m.to_json();
  for (auto& [k, v] : extra.items()) j[k] = v;
  cpgrid::write_json_file(path, j);
}

// ---------------------------------------------------------------- generate

struct GenerateArgs {
  std::size_t nx = 24, ny = 24, t_out = 8, nvar = 2, n_samples = 200;
  double ar = 0.8, sd = 1.0, miscal = 1.0, corr_len = 2.0, forcing = 0.0, step_hours = 3.0;
  bool hetero = false;
  std::uint64_t seed = 0;
  std::string out;
  std::uint64_t first_index = 0;
  Common common;
};

int cmd_generate(const GenerateArgs& a) {
  cpgrid::SynthConfig cfg;
  cfg.spec = cpgrid::GridSpec::make(a.t_out, a.nx, a.ny, a.nvar, a.step_hours);
  cfg.ar_coeff = a.ar;
  cfg.noise_sd = a.sd;
  cfg.spatial_corr_len = a.corr_len;
  cfg.miscalibration = a.miscal;
  cfg.heteroscedastic = a.hetero;
  cfg.forcing = a.forcing;
  cfg.seed = a.seed;
  cfg.validate();
  if (a.n_samples < 1) throw UsageError("--n-samples must be >= 1");

  const json config{{"spec", cpgrid::spec_to_json(cfg.spec)},
                    {"ar_coeff", cfg.ar_coeff},
                    {"noise_sd", cfg.noise_sd},
                    {"spatial_corr_len", cfg.spatial_corr_len},
                    {"miscalibration", cfg.miscalibration},
                    {"heteroscedastic", cfg.heteroscedastic},
                    {"forcing", cfg.forcing},
                    {"seed", cfg.seed},
                    {"first_index", a.first_index},
                    {"rng", "splitmix64/polar"}};

  const fs::path out(a.out);
  prepare_out_dir(out);
  cpgrid::OutputLock lock(out);
  auto manifest = start_manifest("generate", config, a.common);

  constexpr std::size_t kBatch = 64;
  char name[64];
  for (std::size_t b = 0; b < a.n_samples; b += kBatch) {
    const std::size_t count = std::min(kBatch, a.n_samples - b);
    const auto samples =
        cpgrid::generate_samples(cfg, a.first_index + b, count, a.common.threads);
    for (std::size_t i = 0; i < count; ++i) {
      std::snprintf(name, sizeof name, "sample_%05zu", b + i);
      const std::string stem = (out / name).string();
      const std::pair<const char*, const cpgrid::FieldTensor*> parts[] = {
          {".truth.cpt", &samples[i].truth},
          {".prediction.cpt", &samples[i].prediction},
          {".mean.cpt", &samples[i].mean},
          {".sigma.cpt", &samples[i].sigma}};
      for (const auto& [suffix, tensor] : parts) {
        cpgrid::write_container(*tensor, stem + suffix);
        manifest.outputs.push_back(fs::path(stem + suffix).filename().string());
      }
    }
  }
  finish_manifest(manifest, a.common, out / "manifest.json",
                  {{"config", config}, {"n_samples", a.n_samples}, {"seed", cfg.seed}});
  std::cout << "wrote " << a.n_samples << " samples to " << out.string() << "\n";
  return 0;
}

// --------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string calib_dir, strategy = "res", alphas, out;
  double sigma_floor = 1e-8;
  Common common;
};

int cmd_calibrate(const CalibrateArgs& a) {
  const auto kind = cpgrid::parse_strategy_kind(a.strategy);
  std::vector<double> alphas = parse_number_list(a.alphas, "--alpha");
  std::sort(alphas.begin(), alphas.end());
  for (double al : alphas) cpgrid::validate_alpha(al);
  if (std::adjacent_find(alphas.begin(), alphas.end()) != alphas.end()) {
    throw UsageError("--alpha: duplicate value");
  }
  const cpgrid::ScoreStrategy strategy{kind, a.sigma_floor};
  strategy.validate();

  const fs::path dir(a.calib_dir);
  const auto stems = list_stems(dir, ".truth.cpt");
  if (stems.empty()) throw UsageError("no *.truth.cpt files in " + dir.string());

  const json flags{{"calib_dir", a.calib_dir}, {"strategy", cpgrid::to_string(kind)},
                   {"alpha", alphas}, {"sigma_floor", a.sigma_floor}};
  auto manifest = start_manifest("calibrate", flags, a.common);

  std::optional<cpgrid::ScoreAccumulator> acc;
  for (const auto& stem : stems) {
    const fs::path truth_path = dir / (stem + ".truth.cpt");
    const auto truth = cpgrid::read_container(truth_path);
    if (!acc) acc.emplace(truth.spec(), strategy);
    manifest.inputs.push_back(truth_path.string());
    if (kind == cpgrid::ScoreStrategy::Kind::Res) {
      const fs::path p = dir / (stem + ".prediction.cpt");
      acc->add_res(truth, cpgrid::read_container(p));
      manifest.inputs.push_back(p.string());
    } else {
      const fs::path m = dir / (stem + ".mean.cpt");
      const fs::path s = dir / (stem + ".sigma.cpt");
      acc->add_std(truth, cpgrid::read_container(m), cpgrid::read_container(s));
      manifest.inputs.push_back(m.string());
      manifest.inputs.push_back(s.string());
    }
  }
  const cpgrid::ScoreSet scores = std::move(*acc).finish();
  const auto fields = cpgrid::calibrate_sweep(scores, alphas, a.common.threads);

  const fs::path out(a.out);
  prepare_out_dir(out);
  cpgrid::OutputLock lock(out);
  for (const auto& qf : fields) {
    const std::string file = "quantiles_alpha_" + fmt_g(qf.alpha()) + ".cpt";
    cpgrid::save_quantiles(qf, out / file);
    manifest.outputs.push_back(file);
    if (qf.infinite()) std::cerr << cpgrid::infinite_rank_warning(qf.n(), qf.alpha()) << "\n";
  }
  finish_manifest(manifest, a.common, out / "manifest.json", {{"n", scores.n()}});
  std::cout << "calibrated " << fields.size() << " quantile field(s) from n=" << scores.n()
            << " samples\n";
  return 0;
}

// ----------------------------------------------------------------- predict

struct PredictArgs {
  std::string quantiles, prediction, prediction_dir, sigma, out;
  std::optional<double> baseline_alpha;
  Common common;
};

std::string strip_role(std::string name) {
  for (const char* suffix : {".cpt"}) {
    if (ends_with(name, suffix)) name.resize(name.size() - std::string(suffix).size());
  }
  for (const char* role : {".prediction", ".mean"}) {
    if (ends_with(name, role)) name.resize(name.size() - std::string(role).size());
  }
  return name;
}

int cmd_predict(const PredictArgs& a) {
  if (a.prediction.empty() == a.prediction_dir.empty()) {
    throw UsageError("exactly one of --prediction or --prediction-dir is required");
  }
  std::optional<cpgrid::QuantileField> qf;
  bool needs_sigma = true;
  if (a.baseline_alpha) {
    cpgrid::validate_alpha(*a.baseline_alpha);
  } else {
    if (a.quantiles.empty()) throw UsageError("--quantiles is required (or --baseline-alpha)");
    qf.emplace(cpgrid::load_quantiles(a.quantiles));
    needs_sigma = qf->strategy().kind == cpgrid::ScoreStrategy::Kind::Std;
  }
  if (needs_sigma && !a.prediction.empty() && a.sigma.empty()) {
    throw UsageError(a.baseline_alpha ? "--baseline-alpha requires --sigma"
                                      : "STD quantiles require --sigma");
  }

  const json flags{{"quantiles", a.quantiles},
                   {"prediction", a.prediction},
                   {"prediction_dir", a.prediction_dir},
                   {"sigma", a.sigma},
                   {"baseline_alpha", a.baseline_alpha ? json(*a.baseline_alpha) : json(nullptr)}};
  auto manifest = start_manifest("predict", flags, a.common);
  if (qf) manifest.inputs.push_back(a.quantiles);

  // (stem, prediction-or-mean path, sigma path)
  struct Job {
    std::string stem;
    fs::path pred, sigma;
  };
  std::vector<Job> jobs;
  if (!a.prediction.empty()) {
    jobs.push_back({strip_role(fs::path(a.prediction).filename().string()), a.prediction,
                    needs_sigma ? fs::path(a.sigma) : fs::path()});
  } else {
    const fs::path dir(a.prediction_dir);
    const std::string suffix = needs_sigma ? ".mean.cpt" : ".prediction.cpt";
    for (const auto& stem : list_stems(dir, suffix)) {
      jobs.push_back({stem, dir / (stem + suffix),
                      needs_sigma ? dir / (stem + ".sigma.cpt") : fs::path()});
    }
    if (jobs.empty()) throw UsageError("no *" + suffix + " files in " + dir.string());
  }

  const fs::path out(a.out);
  prepare_out_dir(out);
  cpgrid::OutputLock lock(out);
  for (const auto& job : jobs) {
    const auto pred = cpgrid::read_container(job.pred);
    manifest.inputs.push_back(job.pred.string());
    std::optional<cpgrid::FieldTensor> sigma;
    if (needs_sigma) {
      sigma.emplace(cpgrid::read_container(job.sigma));
      manifest.inputs.push_back(job.sigma.string());
    }
    const cpgrid::IntervalField iv =
        a.baseline_alpha ? cpgrid::gaussian_intervals(pred, *sigma, *a.baseline_alpha)
        : needs_sigma    ? cpgrid::intervals_std(pred, *sigma, *qf)
                         : cpgrid::intervals_res(pred, *qf);
    cpgrid::save_intervals(iv, out / job.stem);
    manifest.outputs.push_back(job.stem + ".lower.cpt");
    manifest.outputs.push_back(job.stem + ".upper.cpt");
    manifest.outputs.push_back(job.stem + ".json");
  }
  finish_manifest(manifest, a.common, out / "manifest.json");
  std::cout << "wrote " << jobs.size() << " interval field(s) to " << out.string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
  std::string intervals_dir, truth_dir, out;
  Common common;
};

int cmd_evaluate(const EvaluateArgs& a) {
  const fs::path ivdir(a.intervals_dir), tdir(a.truth_dir);
  const auto stems = list_stems(ivdir, ".lower.cpt");
  if (stems.empty()) throw UsageError("no interval fields (*.lower.cpt) in " + ivdir.string());

  const json flags{{"intervals_dir", a.intervals_dir}, {"truth_dir", a.truth_dir}};
  auto manifest = start_manifest("evaluate", flags, a.common);

  std::optional<cpgrid::CoverageAccumulator> acc;
  for (const auto& stem : stems) {
    const auto iv = cpgrid::load_intervals(ivdir / stem);
    const fs::path tpath = tdir / (stem + ".truth.cpt");
    const auto truth = cpgrid::read_container(tpath);
    if (!acc) acc.emplace(iv.spec(), iv.alpha(), a.common.threads);
    acc->add(iv, truth);
    manifest.inputs.push_back((ivdir / (stem + ".lower.cpt")).string());
    manifest.inputs.push_back((ivdir / (stem + ".upper.cpt")).string());
    manifest.inputs.push_back(tpath.string());
  }
  const cpgrid::CoverageReport report = acc->report();

  const fs::path out(a.out);
  fs::path parent = out.parent_path();
  if (parent.empty()) parent = ".";
  prepare_out_dir(parent);
  cpgrid::OutputLock lock(parent);

  fs::path base = out;
  base.replace_extension();
  const fs::path csv = base.string() + ".csv";
  const fs::path cells = base.string() + ".cells.cpt";
  json j = cpgrid::to_json(report, /*include_cells=*/false);
  j["per_cell_coverage_file"] = cells.filename().string();
  cpgrid::write_json_file(out, j);
  write_text(csv, cpgrid::to_csv(report));
  cpgrid::write_raw_container(cells, report.spec, report.per_cell_coverage,
                              {{"kind", "per_cell_coverage"}, {"alpha", report.alpha}});
  manifest.outputs = {out.filename().string(), csv.filename().string(),
                      cells.filename().string()};
  finish_manifest(manifest, a.common, base.string() + ".manifest.json");

  std::printf("alpha=%g n_test=%zu domain_coverage=%.6f mean_width=%.6g n_infinite=%llu\n",
              report.alpha, report.n_test, report.domain_coverage, report.mean_width,
              static_cast<unsigned long long>(report.n_infinite));
  return 0;
}

// ------------------------------------------------------------------ report

struct ReportArgs {
  std::string intervals, lead_times, var, coverage_curve, out, label = "empirical";
  Common common;
};

int cmd_report(const ReportArgs& a) {
  if (a.intervals.empty() == a.coverage_curve.empty()) {
    throw UsageError("give either --intervals (with --lead-times and --var) or --coverage-curve");
  }
  const json flags{{"intervals", a.intervals}, {"lead_times", a.lead_times}, {"var", a.var},
                   {"coverage_curve", a.coverage_curve}, {"label", a.label}};
  auto manifest = start_manifest("report", flags, a.common);
  const fs::path out(a.out);

  if (!a.intervals.empty()) {
    if (a.var.empty() || a.lead_times.empty()) {
      throw UsageError("--intervals needs --lead-times and --var");
    }
    const auto iv = cpgrid::load_intervals(a.intervals);
    const auto& spec = iv.spec();
    const std::size_t v = spec.variable_index(a.var);
    if (v == spec.nvar) {
      std::string names;
      for (const auto& n : spec.variable_names) names += (names.empty() ? "" : ", ") + n;
      throw UsageError("unknown variable '" + a.var + "'; available: " + names);
    }
    std::vector<std::size_t> leads;
    for (double h : parse_number_list(a.lead_times, "--lead-times")) {
      auto it = std::find(spec.lead_hours.begin(), spec.lead_hours.end(), h);
      if (it == spec.lead_hours.end()) {
        std::string hours;
        for (double lh : spec.lead_hours) hours += (hours.empty() ? "" : ", ") + fmt_g(lh);
        throw UsageError("unknown lead time " + fmt_g(h) + "h; available: " + hours);
      }
      leads.push_back(static_cast<std::size_t>(it - spec.lead_hours.begin()));
    }
    const cpgrid::IntervalPaths paths(a.intervals);
    manifest.inputs = {paths.lower.string(), paths.upper.string()};

    prepare_out_dir(out);
    cpgrid::OutputLock lock(out);
    for (std::size_t t : leads) {
      const auto plane = cpgrid::svg::width_plane(iv, t, v);
      const std::string stem = "width_" + a.var + "_lead" + fmt_g(spec.lead_hours[t]) + "h";
      const std::string title = "interval width, " + a.var + ", lead " +
                                fmt_g(spec.lead_hours[t]) + " h, alpha " + fmt_g(iv.alpha());
      write_text(out / (stem + ".svg"), cpgrid::svg::heatmap(plane, spec.nx, spec.ny, title));
      std::string csv = "x,y,width\n";
      for (std::size_t x = 0; x < spec.nx; ++x) {
        for (std::size_t y = 0; y < spec.ny; ++y) {
          csv += std::to_string(x) + "," + std::to_string(y) + "," +
                 cpgrid::detail::fmt_number(plane[x * spec.ny + y]) + "\n";
        }
      }
      write_text(out / (stem + ".csv"), csv);
      manifest.outputs.push_back(stem + ".svg");
      manifest.outputs.push_back(stem + ".csv");
    }
    finish_manifest(manifest, a.common, out / "manifest.json");
    return 0;
  }

  std::vector<cpgrid::CoverageReport> reports;
  for (const auto& path : split_list(a.coverage_curve)) {
    reports.push_back(cpgrid::report_from_json(cpgrid::read_json_file(path)));
    manifest.inputs.push_back(path);
  }
  if (reports.empty()) throw UsageError("--coverage-curve: no report files given");
  const cpgrid::svg::CurveSeries series{a.label, cpgrid::coverage_curve(reports)};

  prepare_out_dir(out);
  cpgrid::OutputLock lock(out);
  write_text(out / "coverage_curve.svg",
             cpgrid::svg::coverage_chart(std::span<const cpgrid::svg::CurveSeries>(&series, 1)));
  std::string csv = "nominal,coverage\n";
  for (const auto& p : series.points) {
    csv += cpgrid::detail::fmt_number(p.nominal) + "," + cpgrid::detail::fmt_number(p.coverage) +
           "\n";
  }
  write_text(out / "coverage_curve.csv", csv);
  manifest.outputs = {"coverage_curve.svg", "coverage_curve.csv"};
  finish_manifest(manifest, a.common, out / "manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Per-cell conformal prediction intervals for gridded forecasts"};
  app.require_subcommand(1);
  app.set_version_flag("--version", cpgrid::kToolVersion);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic AR(1) forecast sample directory");
  g->add_option("--nx", gen.nx, "Grid rows")->capture_default_str();
  g->add_option("--ny", gen.ny, "Grid columns")->capture_default_str();
  g->add_option("--t-out", gen.t_out, "Lead times")->capture_default_str();
  g->add_option("--nvar", gen.nvar, "Variables")->capture_default_str();
  g->add_option("--n-samples", gen.n_samples, "Number of forecasts")->capture_default_str();
  g->add_option("--ar", gen.ar, "AR(1) coefficient in (-1,1)")->capture_default_str();
  g->add_option("--sd", gen.sd, "Innovation sd (> 0)")->capture_default_str();
  g->add_option("--miscal", gen.miscal, "Reported sigma / true sigma (> 0)")->capture_default_str();
  g->add_flag("--hetero", gen.hetero, "Spatially varying innovation sd");
  g->add_option("--corr-len", gen.corr_len, "Spatial smoothing radius in cells")
      ->capture_default_str();
  g->add_option("--forcing", gen.forcing, "Constant forcing offset")->capture_default_str();
  g->add_option("--step-hours", gen.step_hours, "Hours per lead step")->capture_default_str();
  g->add_option("--seed", gen.seed, "RNG seed")->capture_default_str();
  g->add_option("--first-index", gen.first_index, "Sub-stream index of the first sample")
      ->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();
  add_common(g, gen.common);

  CalibrateArgs cal;
  auto* c = app.add_subcommand("calibrate", "Estimate per-cell conformal quantiles");
  c->add_option("--calib-dir", cal.calib_dir, "Calibration sample directory")->required();
  c->add_option("--strategy", cal.strategy, "Score: res | std")
      ->check(CLI::IsMember({"res", "std", "RES", "STD"}))
      ->capture_default_str();
  c->add_option("--alpha", cal.alphas, "Comma-separated miscoverage levels")->required();
  c->add_option("--sigma-floor", cal.sigma_floor, "Lower clamp on sigma for STD scores")
      ->capture_default_str();
  c->add_option("--out", cal.out, "Output directory")->required();
  add_common(c, cal.common);

  PredictArgs pre;
  auto* p = app.add_subcommand("predict", "Build prediction intervals from quantiles");
  p->add_option("--quantiles", pre.quantiles, "Quantile field (.cpt)");
  p->add_option("--prediction", pre.prediction, "Prediction or mean tensor (.cpt)");
  p->add_option("--prediction-dir", pre.prediction_dir,
                "Directory of <stem>.prediction.cpt / <stem>.mean.cpt + .sigma.cpt");
  p->add_option("--sigma", pre.sigma, "Sigma tensor (.cpt), required for STD quantiles");
  p->add_option("--baseline-alpha", pre.baseline_alpha,
                "Uncalibrated Gaussian intervals mean +- z sigma instead of quantiles");
  p->add_option("--out", pre.out, "Output directory")->required();
  add_common(p, pre.common);

  EvaluateArgs ev;
  auto* e = app.add_subcommand("evaluate", "Empirical coverage and width of intervals");
  e->add_option("--intervals-dir", ev.intervals_dir, "Directory of interval fields")->required();
  e->add_option("--truth-dir", ev.truth_dir, "Directory of <stem>.truth.cpt")->required();
  e->add_option("--out", ev.out, "Report JSON path")->required();
  add_common(e, ev.common);

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "SVG/CSV width maps and coverage curves");
  r->add_option("--intervals", rep.intervals, "Interval field prefix (<dir>/<stem>)");
  r->add_option("--lead-times", rep.lead_times, "Comma-separated lead hours");
  r->add_option("--var", rep.var, "Variable name");
  r->add_option("--coverage-curve", rep.coverage_curve, "Comma-separated report JSON files");
  r->add_option("--label", rep.label, "Series label for the coverage curve")
      ->capture_default_str();
  r->add_option("--out", rep.out, "Output directory")->required();
  add_common(r, rep.common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*g) return cmd_generate(gen);
    if (*c) return cmd_calibrate(cal);
    if (*p) return cmd_predict(pre);
    if (*e) return cmd_evaluate(ev);
    if (*r) return cmd_report(rep);
  } catch (const cpgrid::SpecMismatchError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  } catch (const cpgrid::ValidationError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
