#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mpjac/core.hpp"
#include "mpjac/testmat.hpp"

namespace mpjac::bench {

enum class Experiment {
  GenMatrix,
  Solve,
  CompareClassicCyclic,
  CompareOrthogonalizers,
  PreconditionBound,
  SweepCounts,
  TimingImprovement,
};

std::string_view to_string(Experiment e);
std::optional<Experiment> experiment_from_string(std::string_view name);

/// One benchmark run: an experiment evaluated over the grid
/// n_grid x kappa_grid x modes, written as CSV to output_path.
/// Non-timing columns are a pure function of the config.
struct ExperimentConfig {
  Experiment experiment = Experiment::Solve;
  std::vector<Index> n_grid;
  std::vector<double> kappa_grid;
  std::vector<Mode> modes;
  std::uint64_t seed = 1;
  double tol = unit_roundoff(Precision::Working);
  int max_sweeps = 10;
  std::string output_path;
  std::string input_path;  // Solve only: solve this matrix file instead of the grid
  int threads = 1;
  int timing_reps = 3;  // timed sections keep the best of this many runs
};

/// Fills any empty grid field with the experiment's desk-scale defaults
/// (or the paper-scale grids when full_scale is set).
void apply_default_grids(ExperimentConfig& config, bool full_scale);

/// Runs the experiment and writes the CSV. Returns 0 when every grid point
/// succeeded; grid points whose solver threw are reported in the CSV's
/// `error` column, the run continues, and the exit status is nonzero.
/// Configuration problems (empty grid, unwritable output) throw.
int run(const ExperimentConfig& config);

}  // namespace mpjac::bench
