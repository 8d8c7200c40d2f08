// Command-line front end: ingest event logs into snapshot networks, fit the
// time-varying sender/receiver effects, cross-validate the bandwidth, run
// synthetic studies, and drive the trajectory clustering / change-point
// pipelines. Every output is CSV or JSON with deterministic formatting, so
// identical configuration and seed produce byte-identical output directories.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tvbeta/analysis.hpp"
#include "tvbeta/bandwidth.hpp"
#include "tvbeta/csv.hpp"
#include "tvbeta/errors.hpp"
#include "tvbeta/estimator.hpp"
#include "tvbeta/inference.hpp"
#include "tvbeta/ingest.hpp"
#include "tvbeta/kernel.hpp"
#include "tvbeta/simlab.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNonexistence = 4;

// ---------------------------------------------------------------------------
// small helpers

tvbeta::KernelSpec kernel_from_name(const std::string& name) {
  tvbeta::KernelSpec spec;
  if (name == "epanechnikov")
    spec.family = tvbeta::KernelFamily::Epanechnikov;
  else if (name == "uniform")
    spec.family = tvbeta::KernelFamily::Uniform;
  else if (name == "triangular")
    spec.family = tvbeta::KernelFamily::Triangular;
  else
    throw tvbeta::ConfigError("unknown kernel: " + name);
  return spec;
}

std::vector<double> parse_h_grid(const std::string& text) {
  double lo = 0, hi = 0, step = 0;
  if (std::sscanf(text.c_str(), "%lf:%lf:%lf", &lo, &hi, &step) != 3)
    throw tvbeta::ConfigError("bandwidth grid must be lo:hi:step");
  if (!(lo > 0.0) || !(step > 0.0) || hi < lo)
    throw tvbeta::ConfigError("bandwidth grid must satisfy 0 < lo <= hi, step > 0");
  std::vector<double> grid;
  const int count = static_cast<int>(std::floor((hi - lo) / step + 1e-9)) + 1;
  for (int k = 0; k < count; ++k) grid.push_back(lo + step * k);
  return grid;
}

json network_to_json(const tvbeta::DynamicNetwork& net) {
  json j;
  j["n"] = net.n();
  j["window"] = {net.window_a(), net.window_b()};
  j["times"] = net.times();
  json edges = json::array();
  for (int l = 0; l < net.size(); ++l) {
    json snap = json::array();
    const tvbeta::Adjacency& A = net.snapshot(l);
    for (int i = 0; i < net.n(); ++i)
      for (int k = 0; k < net.n(); ++k)
        if (A(i, k)) snap.push_back({i + 1, k + 1});
    edges.push_back(std::move(snap));
  }
  j["edges"] = std::move(edges);
  return j;
}

tvbeta::DynamicNetwork network_from_json(const json& j) {
  if (!j.contains("n") || !j.contains("window") || !j.contains("times") ||
      !j.contains("edges"))
    throw tvbeta::DataError("network file needs n, window, times, edges");
  const int n = j.at("n").get<int>();
  const std::vector<double> window = j.at("window").get<std::vector<double>>();
  if (window.size() != 2)
    throw tvbeta::DataError("network window must be [a, b]");
  std::vector<double> times = j.at("times").get<std::vector<double>>();
  std::vector<std::vector<std::pair<int, int>>> edges;
  for (const json& snap : j.at("edges")) {
    std::vector<std::pair<int, int>> list;
    for (const json& e : snap) {
      if (!e.is_array() || e.size() != 2)
        throw tvbeta::DataError("each edge must be [src, dst]");
      list.emplace_back(e[0].get<int>() - 1, e[1].get<int>() - 1);  // to 0-based
    }
    edges.push_back(std::move(list));
  }
  return tvbeta::DynamicNetwork::from_edge_lists(n, std::move(times), edges,
                                                 window[0], window[1]);
}

void write_network_json(const std::string& path,
                        const tvbeta::DynamicNetwork& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw tvbeta::DataError("cannot open for writing: " + path);
  out << network_to_json(net).dump(2) << '\n';
}

tvbeta::DynamicNetwork read_network_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tvbeta::DataError("cannot open network file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw tvbeta::DataError(std::string("invalid network file: ") + e.what());
  }
  return network_from_json(j);
}

std::vector<std::string> coord_header(int n) {
  std::vector<std::string> head{"t"};
  for (int i = 1; i <= n; ++i) head.push_back("alpha_" + std::to_string(i));
  for (int k = 1; k < n; ++k) head.push_back("beta_" + std::to_string(k));
  return head;
}

void write_coord_rows(tvbeta::CsvWriter& csv, const std::vector<double>& grid,
                      const std::vector<Eigen::VectorXd>& rows) {
  for (std::size_t g = 0; g < grid.size(); ++g) {
    std::vector<std::string> cells{tvbeta::format_double(grid[g])};
    for (int q = 0; q < rows[g].size(); ++q)
      cells.push_back(tvbeta::format_double(rows[g][q]));
    csv.row(cells);
  }
}

void write_theta_csv(const std::string& path, const tvbeta::ParamTrajectory& traj) {
  tvbeta::CsvWriter csv(path);
  csv.row(coord_header(traj.n()));
  std::vector<Eigen::VectorXd> rows;
  rows.reserve(traj.params.size());
  for (const tvbeta::ParamVector& p : traj.params) rows.push_back(p.free());
  write_coord_rows(csv, traj.grid, rows);
}

void write_fit_report_csv(const std::string& path,
                          const std::vector<double>& grid,
                          const std::vector<tvbeta::FitReport>& reports) {
  tvbeta::CsvWriter csv(path);
  csv.row({"t", "converged", "nonexistence", "iterations", "final_residual",
           "kernel_mass"});
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const tvbeta::FitReport& r = reports[g];
    csv.row({tvbeta::format_double(grid[g]), r.converged ? "1" : "0",
             r.nonexistence ? "1" : "0", std::to_string(r.iterations),
             tvbeta::format_double(r.final_residual),
             tvbeta::format_double(r.kernel_mass)});
  }
}

void write_cv_csv(const std::string& path, const tvbeta::CvResult& cv) {
  tvbeta::CsvWriter csv(path);
  csv.row({"h", "loss", "failures"});
  for (std::size_t k = 0; k < cv.grid.size(); ++k)
    csv.row({tvbeta::format_double(cv.grid[k]),
             tvbeta::format_double(cv.losses[k]), std::to_string(cv.failures[k])});
}

void write_distance_csv(const std::string& path, const Eigen::MatrixXd& D) {
  tvbeta::CsvWriter csv(path);
  std::vector<std::string> head{"node"};
  for (int j = 0; j < D.cols(); ++j) head.push_back(std::to_string(j + 1));
  csv.row(head);
  for (int i = 0; i < D.rows(); ++i) {
    std::vector<std::string> cells{std::to_string(i + 1)};
    for (int j = 0; j < D.cols(); ++j)
      cells.push_back(tvbeta::format_double(D(i, j)));
    csv.row(cells);
  }
}

void write_error_json(const fs::path& outdir, int code, const std::string& kind,
                      const std::string& message) {
  std::error_code ec;
  fs::create_directories(outdir, ec);
  std::ofstream out(outdir / "error.json", std::ios::binary);
  if (!out) return;
  json j;
  j["exit_code"] = code;
  j["error"] = kind;
  j["message"] = message;
  out << j.dump(2) << '\n';
}

void write_config_echo(const fs::path& outdir, const CLI::App& app) {
  std::ofstream out(outdir / "config.echo", std::ios::binary);
  if (!out) throw tvbeta::DataError("cannot write config echo");
  out << app.config_to_str(true, true);
}

// ---------------------------------------------------------------------------
// per-subcommand options

struct CommonOpts {
  std::string out;
  std::string kernel = "epanechnikov";
};

struct IngestOpts : CommonOpts {
  std::string events;
  std::string nodes;
  double bucket_width = 0.0;
};

struct FitOpts : CommonOpts {
  std::string network;
  double h = 0.0;  // 0 = select by cross-validation
  std::string h_grid = "0.05:0.3:0.01";
  std::string policy = "strict";
  int grid_points = 101;
  bool tolerate = false;
  bool no_se = false;
};

struct CvOpts : CommonOpts {
  std::string network;
  std::string h_grid = "0.05:0.3:0.01";
  std::string policy = "strict";
};

struct SimulateOpts : CommonOpts {
  std::string study = "generate";
  std::string family = "benchmark";
  double const_value = 0.0;
  int n = 40;
  int N = 100;
  double h = 0.23;
  int reps = 100;
  std::uint64_t seed = 1;
  int replicate = 0;
  double t = 0.5;
  std::vector<double> ts{0.2, 0.4, 0.6};
  std::vector<int> nodes{1, 41, 81, 121};
  std::vector<int> coords{1, 2};
};

struct AnalyzeOpts : FitOpts {
  int k = 0;  // 0 = choose by the ratio-plateau rule
  int k_max = 8;
  double threshold = 0.05;
  std::string backend = "medoid";
};

struct ChangepointOpts : CommonOpts {
  std::string network;
  double h = 0.1;
  double a1 = std::numeric_limits<double>::quiet_NaN();
  double b1 = std::numeric_limits<double>::quiet_NaN();
  int scan_points = 41;
};

// ---------------------------------------------------------------------------
// subcommand bodies (throw on error, return the exit code otherwise)

int run_ingest(const IngestOpts& o) {
  std::vector<std::string> filter;
  if (!o.nodes.empty()) {
    std::ifstream in(o.nodes);
    if (!in) throw tvbeta::DataError("cannot open node list: " + o.nodes);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) filter.push_back(line);
    }
  }
  const std::vector<tvbeta::EventRecord> events = tvbeta::read_events_file(o.events);
  tvbeta::IngestResult res = tvbeta::ingest(events, o.bucket_width, filter);

  write_network_json((fs::path(o.out) / "network.json").string(), res.net);
  {
    tvbeta::CsvWriter csv((fs::path(o.out) / "node_map.csv").string());
    csv.row({"node", "id"});
    for (std::size_t i = 0; i < res.node_ids.size(); ++i)
      csv.row({std::to_string(i + 1), res.node_ids[i]});
  }
  {
    tvbeta::CsvWriter csv((fs::path(o.out) / "ingest_report.csv").string());
    csv.row({"events_read", "self_events", "filtered_out", "duplicates",
             "total_buckets", "empty_buckets", "n", "N"});
    csv.row({std::to_string(res.report.events_read),
             std::to_string(res.report.self_events),
             std::to_string(res.report.filtered_out),
             std::to_string(res.report.duplicates),
             std::to_string(res.report.total_buckets),
             std::to_string(res.report.empty_buckets),
             std::to_string(res.net.n()), std::to_string(res.net.size())});
  }
  std::cout << "ingested " << res.net.size() << " snapshots over "
            << res.net.n() << " nodes\n";
  return 0;
}

// Fit pipeline shared by `fit` and `analyze`: optional CV, trajectory fit,
// theta/fit_report outputs. Returns the fit and the number of failed points.
struct FittedNetwork {
  tvbeta::DynamicNetwork net;
  tvbeta::TrajectoryFit fit;
  int failures = 0;
};

FittedNetwork run_fit_pipeline(const FitOpts& o) {
  const tvbeta::KernelSpec spec = kernel_from_name(o.kernel);
  tvbeta::DynamicNetwork net = read_network_json(o.network);

  double h = o.h;
  if (!(h > 0.0)) {
    tvbeta::CvOptions cvo;
    cvo.policy = o.policy == "skip" ? tvbeta::CvFailurePolicy::SkipRenormalize
                                    : tvbeta::CvFailurePolicy::InfiniteLoss;
    const tvbeta::CvResult cv =
        tvbeta::loo_cv(net, parse_h_grid(o.h_grid), cvo, spec);
    write_cv_csv((fs::path(o.out) / "cv.csv").string(), cv);
    h = cv.h_opt;
    std::cout << "cross-validated bandwidth: " << tvbeta::format_double(h)
              << "\n";
  }

  const std::vector<double> grid = tvbeta::default_grid(net, o.grid_points);
  tvbeta::TrajectoryFit fit = tvbeta::fit_trajectory(net, grid, h, {}, spec);

  write_theta_csv((fs::path(o.out) / "theta.csv").string(), fit.trajectory);
  write_fit_report_csv((fs::path(o.out) / "fit_report.csv").string(), grid,
                       fit.reports);

  if (!o.no_se) {
    tvbeta::CsvWriter csv((fs::path(o.out) / "se.csv").string());
    csv.row(coord_header(net.n()));
    std::vector<Eigen::VectorXd> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const tvbeta::FitReport& r = fit.reports[g];
      if (r.converged && !r.nonexistence) {
        rows.push_back(
            tvbeta::variance_estimate(net, grid[g], r.theta, h, spec).se);
      } else {
        rows.push_back(Eigen::VectorXd::Constant(2 * net.n() - 1, nan));
      }
    }
    write_coord_rows(csv, grid, rows);
  }

  int failures = 0;
  for (const tvbeta::FitReport& r : fit.reports)
    if (!r.converged || r.nonexistence) ++failures;

  return FittedNetwork{std::move(net), std::move(fit), failures};
}

int run_fit(const FitOpts& o) {
  const FittedNetwork f = run_fit_pipeline(o);
  if (f.failures > 0) {
    std::cout << f.failures << " of " << f.fit.reports.size()
              << " grid fits failed\n";
    if (!o.tolerate) return kExitNonexistence;
  }
  return 0;
}

int run_cv(const CvOpts& o) {
  const tvbeta::KernelSpec spec = kernel_from_name(o.kernel);
  const tvbeta::DynamicNetwork net = read_network_json(o.network);
  tvbeta::CvOptions cvo;
  cvo.policy = o.policy == "skip" ? tvbeta::CvFailurePolicy::SkipRenormalize
                                  : tvbeta::CvFailurePolicy::InfiniteLoss;
  const tvbeta::CvResult cv = tvbeta::loo_cv(net, parse_h_grid(o.h_grid), cvo, spec);
  write_cv_csv((fs::path(o.out) / "cv.csv").string(), cv);
  {
    std::ofstream out(fs::path(o.out) / "h_opt.txt", std::ios::binary);
    out << tvbeta::format_double(cv.h_opt) << '\n';
  }
  std::cout << "selected bandwidth: " << tvbeta::format_double(cv.h_opt) << "\n";
  return 0;
}

tvbeta::ParamFamily family_from_opts(const SimulateOpts& o) {
  if (o.family == "benchmark") return tvbeta::ParamFamily::benchmark(o.n);
  if (o.family == "sparse") return tvbeta::ParamFamily::sparse(o.n);
  if (o.family == "constant")
    return tvbeta::ParamFamily::constant(o.n, o.const_value);
  throw tvbeta::ConfigError("unknown family: " + o.family);
}

int run_simulate(const SimulateOpts& o) {
  const tvbeta::KernelSpec spec = kernel_from_name(o.kernel);
  const tvbeta::ParamFamily family = family_from_opts(o);
  tvbeta::SimDesign design;
  design.n = o.n;
  design.N = o.N;
  design.h = o.h;
  design.reps = o.reps;
  design.seed = o.seed;

  if (o.study == "generate") {
    const tvbeta::DynamicNetwork net =
        tvbeta::generate(design, family, o.replicate);
    write_network_json((fs::path(o.out) / "network.json").string(), net);
    tvbeta::CsvWriter csv((fs::path(o.out) / "truth.csv").string());
    csv.row(coord_header(o.n));
    std::vector<Eigen::VectorXd> rows;
    for (double t : net.times()) rows.push_back(family.eval(t).free());
    write_coord_rows(csv, net.times(), rows);
    return 0;
  }

  if (o.study == "table") {
    std::vector<int> nodes0;
    for (int v : o.nodes) nodes0.push_back(v - 1);
    const std::vector<tvbeta::BiasSdRow> rows = tvbeta::bias_sd_table(
        design, family, o.ts, nodes0,
        {tvbeta::Provenance::Smoothed, tvbeta::Provenance::PointWise,
         tvbeta::Provenance::SmoothedPointWise},
        {}, spec);
    tvbeta::CsvWriter csv((fs::path(o.out) / "bias_sd.csv").string());
    csv.row({"method", "t", "node", "alpha_bias", "alpha_sd", "beta_bias",
             "beta_sd", "used", "excluded"});
    for (const tvbeta::BiasSdRow& r : rows) {
      const char* m = r.method == tvbeta::Provenance::Smoothed ? "smoothed"
                      : r.method == tvbeta::Provenance::PointWise
                          ? "pointwise"
                          : "smoothed_pointwise";
      csv.row({m, tvbeta::format_double(r.t), std::to_string(r.node + 1),
               tvbeta::format_double(r.alpha_bias),
               tvbeta::format_double(r.alpha_sd),
               tvbeta::format_double(r.beta_bias),
               tvbeta::format_double(r.beta_sd), std::to_string(r.used),
               std::to_string(r.excluded)});
    }
    return 0;
  }

  if (o.study == "rmse") {
    tvbeta::CsvWriter csv((fs::path(o.out) / "rmse.csv").string());
    csv.row({"replicate", "rmse_summed", "rmse_per_coordinate", "clean"});
    for (int r = 0; r < o.reps; ++r) {
      const tvbeta::DynamicNetwork net = tvbeta::generate(design, family, r);
      const tvbeta::TrajectoryFit fit =
          tvbeta::fit_trajectory(net, net.times(), design.h, {}, spec);
      int bad = 0;
      for (const tvbeta::FitReport& rep : fit.reports)
        if (!rep.converged || rep.nonexistence) ++bad;
      const tvbeta::RmseResult res =
          tvbeta::rmse(fit.trajectory, family, net.times());
      csv.row({std::to_string(r), tvbeta::format_double(res.summed),
               tvbeta::format_double(res.per_coordinate),
               bad == 0 ? "1" : "0"});
    }
    return 0;
  }

  if (o.study == "normality") {
    std::vector<int> coords0;
    for (int q : o.coords) coords0.push_back(q - 1);
    const tvbeta::NormalityDiag diag =
        tvbeta::normality_diag(design, family, o.t, coords0, o.reps, {}, spec);
    {
      tvbeta::CsvWriter csv((fs::path(o.out) / "normality_z.csv").string());
      std::vector<std::string> head;
      for (int q : o.coords) head.push_back("z_" + std::to_string(q));
      csv.row(head);
      for (int g = 0; g < diag.z.rows(); ++g) {
        std::vector<std::string> cells;
        for (int k = 0; k < diag.z.cols(); ++k)
          cells.push_back(tvbeta::format_double(diag.z(g, k)));
        csv.row(cells);
      }
    }
    {
      tvbeta::CsvWriter csv((fs::path(o.out) / "normality_summary.csv").string());
      csv.row({"coord", "ks", "mean_corrected", "mean_uncorrected",
               "ellipse_coverage", "failed"});
      for (std::size_t k = 0; k < diag.ks.size(); ++k)
        csv.row({std::to_string(o.coords[k]), tvbeta::format_double(diag.ks[k]),
                 tvbeta::format_double(diag.mean_corrected[static_cast<int>(k)]),
                 tvbeta::format_double(diag.mean_uncorrected[static_cast<int>(k)]),
                 tvbeta::format_double(diag.ellipse_coverage),
                 std::to_string(diag.failed)});
    }
    return 0;
  }

  if (o.study == "qdiag") {
    std::ofstream out(fs::path(o.out) / "qdiag.txt", std::ios::binary);
    out << tvbeta::format_double(
               tvbeta::q_diagnostic(family, design.a, design.b))
        << '\n';
    return 0;
  }

  throw tvbeta::ConfigError("unknown study: " + o.study);
}

int run_analyze(const AnalyzeOpts& o) {
  const FittedNetwork f = run_fit_pipeline(o);
  if (f.failures > 0 && !o.tolerate) {
    std::cout << f.failures << " of " << f.fit.reports.size()
              << " grid fits failed\n";
    return kExitNonexistence;
  }

  // keep only converged grid points for the curve distances
  tvbeta::ParamTrajectory traj;
  traj.provenance = f.fit.trajectory.provenance;
  for (std::size_t g = 0; g < f.fit.trajectory.grid.size(); ++g) {
    if (f.fit.reports[g].converged && !f.fit.reports[g].nonexistence) {
      traj.grid.push_back(f.fit.trajectory.grid[g]);
      traj.params.push_back(f.fit.trajectory.params[g]);
    }
  }
  if (traj.grid.size() < 2)
    throw tvbeta::DataError("analyze: fewer than two usable grid points");

  const tvbeta::TrajectoryDistance da =
      tvbeta::trajectory_distance(traj, tvbeta::CurveKind::Alpha);
  const tvbeta::TrajectoryDistance db =
      tvbeta::trajectory_distance(traj, tvbeta::CurveKind::Beta);
  write_distance_csv((fs::path(o.out) / "distance_alpha.csv").string(), da.D);
  write_distance_csv((fs::path(o.out) / "distance_beta.csv").string(), db.D);

  const Eigen::MatrixXd xa = tvbeta::mds_embed(da, 1);
  const Eigen::MatrixXd xb = tvbeta::mds_embed(db, 1);
  {
    tvbeta::CsvWriter csv((fs::path(o.out) / "mds.csv").string());
    csv.row({"node", "x", "y"});
    for (int i = 0; i < xa.rows(); ++i)
      csv.row({std::to_string(i + 1), tvbeta::format_double(xa(i, 0)),
               tvbeta::format_double(xb(i, 0))});
  }

  int ka = o.k, kb = o.k;
  if (o.k == 0) {
    const int k_max = std::min(o.k_max, f.net.n() - 1);
    const tvbeta::SelectKResult sa = tvbeta::select_k(da, k_max, o.threshold);
    const tvbeta::SelectKResult sb = tvbeta::select_k(db, k_max, o.threshold);
    tvbeta::CsvWriter csv((fs::path(o.out) / "select_k.csv").string());
    csv.row({"kind", "K", "ratio", "suggested"});
    for (std::size_t k = 0; k < sa.ks.size(); ++k)
      csv.row({"alpha", std::to_string(sa.ks[k]),
               tvbeta::format_double(sa.ratios[k]), std::to_string(sa.suggested)});
    for (std::size_t k = 0; k < sb.ks.size(); ++k)
      csv.row({"beta", std::to_string(sb.ks[k]),
               tvbeta::format_double(sb.ratios[k]), std::to_string(sb.suggested)});
    ka = sa.suggested;
    kb = sb.suggested;
  }

  const bool kmeans = o.backend == "kmeans";
  const std::vector<int> la = kmeans ? tvbeta::cluster_kmeans_mds(da, ka)
                                     : tvbeta::cluster(da, ka);
  const std::vector<int> lb = kmeans ? tvbeta::cluster_kmeans_mds(db, kb)
                                     : tvbeta::cluster(db, kb);
  {
    tvbeta::CsvWriter csv((fs::path(o.out) / "clusters.csv").string());
    csv.row({"node", "alpha_cluster", "beta_cluster"});
    for (std::size_t i = 0; i < la.size(); ++i)
      csv.row({std::to_string(i + 1), std::to_string(la[i]),
               std::to_string(lb[i])});
  }
  std::cout << "clustered " << la.size() << " nodes into " << ka << " (alpha) / "
            << kb << " (beta) groups\n";
  return f.failures > 0 && !o.tolerate ? kExitNonexistence : 0;
}

int run_changepoint(const ChangepointOpts& o) {
  const tvbeta::KernelSpec spec = kernel_from_name(o.kernel);
  const tvbeta::DynamicNetwork net = read_network_json(o.network);
  const double a1 = std::isnan(o.a1) ? net.window_a() + o.h : o.a1;
  const double b1 = std::isnan(o.b1) ? net.window_b() - o.h : o.b1;
  if (o.scan_points < 2)
    throw tvbeta::ConfigError("changepoint: need at least two scan points");
  std::vector<double> grid;
  for (int g = 0; g < o.scan_points; ++g)
    grid.push_back(a1 + (b1 - a1) * g / (o.scan_points - 1));

  const tvbeta::ChangePointScan scan =
      tvbeta::change_point_scan(net, o.h, a1, b1, grid, {}, spec);

  {
    tvbeta::CsvWriter csv((fs::path(o.out) / "gap_curve.csv").string());
    csv.row({"t", "gap", "ok"});
    std::vector<char> bad(grid.size(), 0);
    for (int g : scan.skipped) bad[static_cast<std::size_t>(g)] = 1;
    for (std::size_t g = 0; g < scan.grid.size(); ++g)
      csv.row({tvbeta::format_double(scan.grid[g]),
               tvbeta::format_double(scan.gap[g]), bad[g] ? "0" : "1"});
  }
  {
    tvbeta::CsvWriter csv((fs::path(o.out) / "changepoint.csv").string());
    csv.row({"t_hat"});
    csv.row({tvbeta::format_double(scan.t_hat)});
  }
  std::cout << "estimated change point: " << tvbeta::format_double(scan.t_hat)
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-varying sender/receiver effect estimation for dynamic "
               "directed networks"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI file");

  IngestOpts ing;
  FitOpts fit;
  CvOpts cv;
  SimulateOpts sim;
  AnalyzeOpts ana;
  ChangepointOpts chg;

  auto add_common = [](CLI::App* sub, CommonOpts& o) {
    sub->add_option("--out", o.out, "output directory")->required();
    sub->add_option("--kernel", o.kernel,
                    "kernel family: epanechnikov, uniform or triangular");
  };

  CLI::App* s_ing = app.add_subcommand("ingest", "aggregate a timestamped edge "
                                                 "list into snapshots");
  add_common(s_ing, ing);
  s_ing->add_option("--events", ing.events, "events file: src dst timestamp")
      ->required();
  s_ing->add_option("--bucket-width", ing.bucket_width,
                    "aggregation bucket width in timestamp units")
      ->required();
  s_ing->add_option("--nodes", ing.nodes, "node id list (one per line)");

  auto add_fit_opts = [&add_common](CLI::App* sub, FitOpts& o) {
    add_common(sub, o);
    sub->add_option("--network", o.network, "network JSON file")->required();
    sub->add_option("--bandwidth", o.h, "bandwidth; omit to cross-validate");
    sub->add_option("--bandwidth-grid", o.h_grid, "CV bandwidth grid lo:hi:step");
    sub->add_option("--policy", o.policy,
                    "CV failure policy: strict or skip");
    sub->add_option("--grid-points", o.grid_points,
                    "equispaced grid points merged with observation times");
    sub->add_flag("--tolerate-failures", o.tolerate,
                  "exit 0 even when some grid fits fail");
    sub->add_flag("--no-se", o.no_se, "skip standard error computation");
  };

  CLI::App* s_fit = app.add_subcommand("fit", "fit the effect trajectories");
  add_fit_opts(s_fit, fit);

  CLI::App* s_cv = app.add_subcommand("cv", "cross-validate the bandwidth");
  add_common(s_cv, cv);
  s_cv->add_option("--network", cv.network, "network JSON file")->required();
  s_cv->add_option("--bandwidth-grid", cv.h_grid, "bandwidth grid lo:hi:step");
  s_cv->add_option("--policy", cv.policy, "failure policy: strict or skip");

  CLI::App* s_sim = app.add_subcommand("simulate", "synthetic studies");
  add_common(s_sim, sim);
  s_sim->add_option("--study", sim.study,
                    "generate, table, rmse, normality or qdiag");
  s_sim->add_option("--family", sim.family,
                    "benchmark, sparse or constant");
  s_sim->add_option("--const-value", sim.const_value,
                    "effect value for the constant family");
  s_sim->add_option("--n", sim.n, "nodes");
  s_sim->add_option("--N", sim.N, "snapshots");
  s_sim->add_option("--bandwidth", sim.h, "bandwidth");
  s_sim->add_option("--reps", sim.reps, "replicates");
  s_sim->add_option("--seed", sim.seed, "RNG seed");
  s_sim->add_option("--replicate", sim.replicate,
                    "replicate index for --study generate");
  s_sim->add_option("--t", sim.t, "evaluation time for --study normality");
  s_sim->add_option("--ts", sim.ts, "evaluation times for --study table")
      ->delimiter(',');
  s_sim->add_option("--nodes", sim.nodes, "1-based nodes for --study table")
      ->delimiter(',');
  s_sim->add_option("--coords", sim.coords,
                    "1-based free coordinates for --study normality")
      ->delimiter(',');

  CLI::App* s_ana = app.add_subcommand("analyze", "fit, embed and cluster the "
                                                  "effect curves");
  add_fit_opts(s_ana, ana);
  s_ana->add_option("--k", ana.k, "cluster count; omit to select by ratio");
  s_ana->add_option("--k-max", ana.k_max, "largest K tried by the selector");
  s_ana->add_option("--threshold", ana.threshold,
                    "ratio improvement threshold of the selector");
  s_ana->add_option("--backend", ana.backend, "medoid or kmeans");

  CLI::App* s_chg = app.add_subcommand("changepoint", "scan for a common jump");
  add_common(s_chg, chg);
  s_chg->add_option("--network", chg.network, "network JSON file")->required();
  s_chg->add_option("--bandwidth", chg.h, "one-sided bandwidth");
  s_chg->add_option("--a1", chg.a1, "scan interval start (default a + h)");
  s_chg->add_option("--b1", chg.b1, "scan interval end (default b - h)");
  s_chg->add_option("--scan-points", chg.scan_points, "scan grid size");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const CommonOpts* common = nullptr;
  if (*s_ing) common = &ing;
  else if (*s_fit) common = &fit;
  else if (*s_cv) common = &cv;
  else if (*s_sim) common = &sim;
  else if (*s_ana) common = &ana;
  else common = &chg;

  const fs::path outdir(common->out);
  try {
    fs::create_directories(outdir);
    write_config_echo(outdir, app);
    int rc = 0;
    if (*s_ing) rc = run_ingest(ing);
    else if (*s_fit) rc = run_fit(fit);
    else if (*s_cv) rc = run_cv(cv);
    else if (*s_sim) rc = run_simulate(sim);
    else if (*s_ana) rc = run_analyze(ana);
    else rc = run_changepoint(chg);
    if (rc == kExitNonexistence)
      write_error_json(outdir, rc, "nonexistence",
                       "some requested fits did not converge");
    return rc;
  } catch (const tvbeta::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    write_error_json(outdir, kExitConfig, "config", e.what());
    return kExitConfig;
  } catch (const tvbeta::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_error_json(outdir, kExitData, "data", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    write_error_json(outdir, kExitData, "internal", e.what());
    return kExitData;
  }
}
