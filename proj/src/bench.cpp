#include "mpjac/bench.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <thread>
#include <utility>

#include "mpjac/jacobi.hpp"
#include "mpjac/matrix_io.hpp"
#include "mpjac/mixed.hpp"
#include "mpjac/norms.hpp"
#include "mpjac/orthogonalize.hpp"

namespace mpjac::bench {

namespace {

using Row = std::map<std::string, std::string, std::less<>>;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(std::int64_t v) { return std::to_string(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(Index v) { return std::to_string(v); }

std::string_view to_string(Mode m) { return m == Mode::Geo ? "geo" : "ari"; }

struct Point {
  Index n = 0;
  double kappa = 0.0;
  Mode mode = Mode::Geo;
  bool from_file = false;  // kappa/mode unknown (Solve on an input file)
};

struct Timed {
  double seconds = 0.0;
};

/// Best-of-reps wall time around fn(); fn is deterministic, so only the
/// clock changes between repetitions.
template <typename Fn>
double time_best(int reps, Fn&& fn) {
  double best = -1.0;
  for (int r = 0; r < reps; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    fn();
    const double s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (best < 0.0 || s < best) best = s;
  }
  return best;
}

double orthogonality_defect(const Matrix<double>& q) {
  const Matrix<double> g =
      q.transpose() * q - Matrix<double>::Identity(q.cols(), q.cols());
  return two_norm_estimate(g);
}

double residual_ratio_of(const SymMatrix<double>& a,
                         const SpectralResult<double>& r) {
  const double norm_a = two_norm_estimate(a);
  if (norm_a == 0.0) return 0.0;
  Matrix<double> residual = a.mat() * r.v;
  residual.noalias() -= r.v * r.lambda.asDiagonal();
  return two_norm_estimate_general(residual) / norm_a;
}

struct ExperimentPlan {
  std::vector<std::string> columns;  // after the common prefix, before `error`
  // Rows for one grid point; may throw, in which case the caller emits an
  // error row for the point.
  std::function<std::vector<Row>(const ExperimentConfig&, const Point&)> eval;
  bool timing = false;  // timing experiments run their points sequentially
};

std::vector<Row> eval_gen_matrix(const ExperimentConfig& cfg, const Point& pt) {
  const SymMatrix<double> a = generate({pt.n, pt.kappa, pt.mode, cfg.seed});
  SpectralResult<double> r =
      jacobi_cyclic(a, unit_roundoff(Precision::Working), 30);
  const auto abs_lambda = r.lambda.cwiseAbs();
  Row row;
  row["kappa_measured"] = fmt(abs_lambda.maxCoeff() / abs_lambda.minCoeff());
  row["fro_norm"] = fmt(fro_norm(a.mat()));
  return {std::move(row)};
}

std::vector<Row> eval_solve_one(const ExperimentConfig& cfg,
                                const SymMatrix<double>& a) {
  const MixedSolveResult r = solve_mixed(a, cfg.tol, cfg.max_sweeps);
  Row row;
  row["off_ratio"] = fmt(r.precondition_off_ratio);
  row["sweeps"] = fmt(r.sweeps);
  row["low_precision_sweeps"] = fmt(r.low_precision_sweeps);
  row["rotations"] = fmt(r.final_report.rotations);
  row["residual_ratio"] = fmt(r.residual_ratio);
  row["orthogonality_defect"] = fmt(orthogonality_defect(r.q));
  row["converged"] = r.converged ? "1" : "0";
  row["time_total_s"] =
      fmt(r.stage_seconds[0] + r.stage_seconds[1] + r.stage_seconds[2]);
  row["time_stage1_s"] = fmt(r.stage_seconds[0]);
  row["time_stage2_s"] = fmt(r.stage_seconds[1]);
  row["time_stage3_s"] = fmt(r.stage_seconds[2]);
  return {std::move(row)};
}

std::vector<Row> eval_solve(const ExperimentConfig& cfg, const Point& pt) {
  return eval_solve_one(cfg, generate({pt.n, pt.kappa, pt.mode, cfg.seed}));
}

std::vector<Row> eval_compare_classic_cyclic(const ExperimentConfig& cfg,
                                             const Point& pt) {
  const SymMatrix<double> a = generate({pt.n, pt.kappa, pt.mode, cfg.seed});
  std::vector<Row> rows;

  SpectralResult<double> classical;
  const double t_classical = time_best(
      cfg.timing_reps, [&] { classical = jacobi_classical(a, cfg.tol); });
  Row row;
  row["method"] = "classical";
  row["time_total_s"] = fmt(t_classical);
  row["rotations"] = fmt(classical.report.rotations);
  row["sweeps"] = fmt(classical.report.sweeps);
  row["converged"] = classical.report.converged ? "1" : "0";
  row["residual_ratio"] = fmt(residual_ratio_of(a, classical));
  rows.push_back(std::move(row));

  SpectralResult<double> cyclic;
  const double t_cyclic = time_best(cfg.timing_reps, [&] {
    cyclic = jacobi_cyclic(a, cfg.tol, cfg.max_sweeps);
  });
  row = Row{};
  row["method"] = "cyclic";
  row["time_total_s"] = fmt(t_cyclic);
  row["rotations"] = fmt(cyclic.report.rotations);
  row["sweeps"] = fmt(cyclic.report.sweeps);
  row["converged"] = cyclic.report.converged ? "1" : "0";
  row["residual_ratio"] = fmt(residual_ratio_of(a, cyclic));
  rows.push_back(std::move(row));
  return rows;
}

std::vector<Row> eval_compare_orthogonalizers(const ExperimentConfig& cfg,
                                              const Point& pt) {
  const SymMatrix<double> a = generate({pt.n, pt.kappa, pt.mode, cfg.seed});
  const Matrix<double> q_low = low_precision_eig_stage(a).q;
  std::vector<Row> rows;

  QrFactors<double> qr;
  const double t_qr =
      time_best(cfg.timing_reps, [&] { qr = householder_qr(q_low); });
  Row row;
  row["method"] = "qr";
  row["orthogonality_defect"] = fmt(orthogonality_defect(qr.q));
  row["time_total_s"] = fmt(t_qr);
  rows.push_back(std::move(row));

  PolarFactor<double> ns;
  const double t_ns =
      time_best(cfg.timing_reps, [&] { ns = newton_schulz(q_low); });
  row = Row{};
  row["method"] = "newton_schulz";
  row["orthogonality_defect"] = fmt(orthogonality_defect(ns.u));
  row["time_total_s"] = fmt(t_ns);
  rows.push_back(std::move(row));
  return rows;
}

std::vector<Row> eval_precondition_bound(const ExperimentConfig& cfg,
                                         const Point& pt) {
  const SymMatrix<double> a = generate({pt.n, pt.kappa, pt.mode, cfg.seed});
  const Matrix<double> q_low = low_precision_eig_stage(a).q;
  const PolarFactor<double> qd = newton_schulz(q_low);
  const SymMatrix<double> a_cond = precondition(a, qd.u);
  Row row;
  row["off_ratio"] = fmt(off_norm(a_cond) / two_norm_estimate(a));
  return {std::move(row)};
}

std::vector<Row> eval_sweep_counts(const ExperimentConfig& cfg,
                                   const Point& pt) {
  const SymMatrix<double> a = generate({pt.n, pt.kappa, pt.mode, cfg.seed});
  const MixedSolveResult r = solve_mixed(a, cfg.tol, cfg.max_sweeps);
  Row row;
  row["sweeps"] = fmt(r.sweeps);
  row["low_precision_sweeps"] = fmt(r.low_precision_sweeps);
  row["residual_ratio"] = fmt(r.residual_ratio);
  row["converged"] = r.converged ? "1" : "0";
  return {std::move(row)};
}

std::vector<Row> eval_timing_improvement(const ExperimentConfig& cfg,
                                         const Point& pt) {
  const SymMatrix<double> a = generate({pt.n, pt.kappa, pt.mode, cfg.seed});

  MixedSolveResult mixed;
  const double t_mixed = time_best(
      cfg.timing_reps, [&] { mixed = solve_mixed(a, cfg.tol, cfg.max_sweeps); });
  MixedSolveResult baseline;
  const double t_baseline = time_best(cfg.timing_reps, [&] {
    baseline = solve_unpreconditioned(a, cfg.tol, cfg.max_sweeps);
  });

  Row row;
  row["time_total_s"] = fmt(t_mixed);
  row["time_baseline_s"] = fmt(t_baseline);
  row["improvement"] = fmt((t_baseline - t_mixed) / t_baseline);
  row["rotations"] = fmt(mixed.final_report.rotations);
  row["rotations_baseline"] = fmt(baseline.final_report.rotations);
  row["time_stage1_s"] = fmt(mixed.stage_seconds[0]);
  row["time_stage2_s"] = fmt(mixed.stage_seconds[1]);
  row["time_stage3_s"] = fmt(mixed.stage_seconds[2]);
  return {std::move(row)};
}

ExperimentPlan plan_for(Experiment e) {
  switch (e) {
    case Experiment::GenMatrix:
      return {{"kappa_measured", "fro_norm"}, eval_gen_matrix, false};
    case Experiment::Solve:
      return {{"off_ratio", "sweeps", "low_precision_sweeps", "rotations",
               "residual_ratio", "orthogonality_defect", "converged",
               "time_total_s", "time_stage1_s", "time_stage2_s",
               "time_stage3_s"},
              eval_solve,
              false};
    case Experiment::CompareClassicCyclic:
      return {{"method", "time_total_s", "rotations", "sweeps", "converged",
               "residual_ratio"},
              eval_compare_classic_cyclic,
              true};
    case Experiment::CompareOrthogonalizers:
      return {{"method", "orthogonality_defect", "time_total_s"},
              eval_compare_orthogonalizers,
              true};
    case Experiment::PreconditionBound:
      return {{"off_ratio"}, eval_precondition_bound, false};
    case Experiment::SweepCounts:
      return {{"sweeps", "low_precision_sweeps", "residual_ratio", "converged"},
              eval_sweep_counts,
              false};
    case Experiment::TimingImprovement:
      return {{"time_total_s", "time_baseline_s", "improvement", "rotations",
               "rotations_baseline", "time_stage1_s", "time_stage2_s",
               "time_stage3_s"},
              eval_timing_improvement,
              true};
  }
  throw std::logic_error("unknown experiment");
}

void write_csv(std::ostream& os, const ExperimentConfig& cfg,
               const std::vector<std::string>& columns,
               const std::vector<Point>& points,
               const std::vector<std::vector<Row>>& results) {
  os << "experiment,n,kappa,mode,seed";
  for (const auto& c : columns) os << ',' << c;
  os << ",error\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (const Row& row : results[i]) {
      os << to_string(cfg.experiment) << ',' << points[i].n << ',';
      if (!points[i].from_file)
        os << fmt(points[i].kappa) << ',' << to_string(points[i].mode);
      else
        os << ',';
      os << ',' << cfg.seed;
      for (const auto& c : columns) {
        const auto it = row.find(c);
        os << ',' << (it == row.end() ? "" : it->second);
      }
      const auto err = row.find("error");
      os << ',' << (err == row.end() ? "" : err->second) << '\n';
    }
  }
}

std::string sanitize_csv_field(std::string s) {
  for (char& c : s)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  return s;
}

}  // namespace

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::GenMatrix: return "gen-matrix";
    case Experiment::Solve: return "solve";
    case Experiment::CompareClassicCyclic: return "compare-classic-cyclic";
    case Experiment::CompareOrthogonalizers: return "compare-orthogonalizers";
    case Experiment::PreconditionBound: return "precondition-bound";
    case Experiment::SweepCounts: return "sweep-counts";
    case Experiment::TimingImprovement: return "timing-improvement";
  }
  return "unknown";
}

std::optional<Experiment> experiment_from_string(std::string_view name) {
  for (Experiment e :
       {Experiment::GenMatrix, Experiment::Solve,
        Experiment::CompareClassicCyclic, Experiment::CompareOrthogonalizers,
        Experiment::PreconditionBound, Experiment::SweepCounts,
        Experiment::TimingImprovement}) {
    if (to_string(e) == name) return e;
  }
  return {};
}

void apply_default_grids(ExperimentConfig& cfg, bool full_scale) {
  auto range = [](Index lo, Index hi, Index step) {
    std::vector<Index> v;
    for (Index n = lo; n <= hi; n += step) v.push_back(n);
    return v;
  };
  const bool need_n = cfg.n_grid.empty();
  const bool need_kappa = cfg.kappa_grid.empty();
  const bool need_modes = cfg.modes.empty();
  auto set_defaults = [&](std::vector<Index> n, std::vector<double> kappa,
                          std::vector<Mode> modes) {
    if (need_n) cfg.n_grid = std::move(n);
    if (need_kappa) cfg.kappa_grid = std::move(kappa);
    if (need_modes) cfg.modes = std::move(modes);
  };
  switch (cfg.experiment) {
    case Experiment::GenMatrix:
      set_defaults({10, 50}, {10.0, 1000.0}, {Mode::Geo, Mode::Ari});
      break;
    case Experiment::Solve:
      set_defaults(full_scale ? range(50, 1000, 50) : range(50, 300, 50),
                   {500.0}, {Mode::Geo, Mode::Ari});
      break;
    case Experiment::CompareClassicCyclic:
      set_defaults(full_scale ? range(100, 1000, 100) : range(100, 500, 100),
                   {100.0}, {Mode::Geo});
      break;
    case Experiment::CompareOrthogonalizers:
      set_defaults(full_scale ? range(100, 3000, 100) : range(100, 600, 100),
                   {100.0}, {Mode::Geo});
      break;
    case Experiment::PreconditionBound:
    case Experiment::SweepCounts:
      set_defaults({50, 250, 500}, {10.0, 100.0, 1000.0, 10000.0},
                   {Mode::Geo, Mode::Ari});
      break;
    case Experiment::TimingImprovement:
      set_defaults(full_scale ? range(100, 1000, 100) : range(100, 500, 100),
                   {100.0}, {Mode::Geo, Mode::Ari});
      break;
  }
}

int run(const ExperimentConfig& cfg) {
  if (cfg.n_grid.empty() || cfg.kappa_grid.empty() || cfg.modes.empty())
    throw std::invalid_argument("bench: empty parameter grid");
  if (!(cfg.tol > 0.0)) throw std::invalid_argument("bench: tol must be > 0");
  if (cfg.output_path.empty())
    throw std::invalid_argument("bench: missing output path");
  for (Index n : cfg.n_grid)
    if (n < 2) throw std::invalid_argument("bench: grid n must be >= 2");
  for (double k : cfg.kappa_grid)
    if (!(k >= 1.0)) throw std::invalid_argument("bench: grid kappa must be >= 1");

  const ExperimentPlan plan = plan_for(cfg.experiment);

  // Solve on an explicit matrix file bypasses the grid.
  if (!cfg.input_path.empty()) {
    if (cfg.experiment != Experiment::Solve)
      throw std::invalid_argument("bench: --input is only valid for solve");
    const SymMatrix<double> a = read_sym_matrix_file(cfg.input_path);
    std::vector<Point> points{{a.order(), 0.0, Mode::Geo, true}};
    std::vector<std::vector<Row>> results(1);
    int failures = 0;
    try {
      results[0] = eval_solve_one(cfg, a);
    } catch (const std::exception& ex) {
      results[0] = {Row{{"error", sanitize_csv_field(ex.what())}}};
      failures = 1;
    }
    std::ofstream os(cfg.output_path);
    if (!os) throw std::runtime_error("bench: cannot write " + cfg.output_path);
    write_csv(os, cfg, plan.columns, points, results);
    return failures == 0 ? 0 : 1;
  }

  std::vector<Point> points;
  for (Index n : cfg.n_grid)
    for (double kappa : cfg.kappa_grid)
      for (Mode mode : cfg.modes) points.push_back({n, kappa, mode});

  std::vector<std::vector<Row>> results(points.size());
  std::atomic<int> failures{0};
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < points.size();
         i = next.fetch_add(1)) {
      try {
        results[i] = plan.eval(cfg, points[i]);
      } catch (const std::exception& ex) {
        results[i] = {Row{{"error", sanitize_csv_field(ex.what())}}};
        failures.fetch_add(1);
      }
    }
  };

  // Timed experiments always run sequentially so wall clocks are comparable.
  const int threads =
      plan.timing ? 1
                  : std::max(1, std::min<int>(cfg.threads,
                                              static_cast<int>(points.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::ofstream os(cfg.output_path);
  if (!os) throw std::runtime_error("bench: cannot write " + cfg.output_path);
  write_csv(os, cfg, plan.columns, points, results);
  if (!os) throw std::runtime_error("bench: write failed: " + cfg.output_path);
  return failures.load() == 0 ? 0 : 1;
}

}  // namespace mpjac::bench
