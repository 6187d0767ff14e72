#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "cpdesign/adjoint.hpp"
#include "cpdesign/levelset.hpp"

namespace cpd {

struct StoppingRule {
  int max_iterations = 20;
  double plateau_tolerance = 0.02;  // relative merit change
  int plateau_window = 3;
  bool require_negative = true;

  void validate() const;
};

struct OptimizerSettings {
  StoppingRule stopping;
  double step_cells = 1.0;           // max boundary displacement per iteration
  int max_backtracks = 3;
  double backtrack_tolerance = 0.05;  // accepted increase, relative to |merit|
  double band_cells = 3.0;
  double freeze_cells = 2.0;
  AdjointOptions adjoint;
};

struct DesignProblem {
  EvaluatorSettings evaluator;
  DrudeParameters material;
  Vec3 atom;
  LevelSetField initial;
  OptimizerSettings optimizer;
  std::uint64_t config_hash = 0;
};

struct IterationRecord {
  double merit = 0.0;
  bool accepted = true;
  std::uint64_t geometry_hash = 0;
  int components = 0;
  int holes = 0;
  double axis_thickness = 0.0;
  double dtau = 0.0;
  int backtracks = 0;
};

struct OptimizationState {
  int iteration = 0;
  LevelSetField geometry;
  std::vector<IterationRecord> history;  // history.size() == iteration + 1
  double step_scale = 1.0;
  bool stalled = false;

  std::vector<double> merits() const;
  /// merit / max |merit| over the history.
  std::vector<double> normalized_merits() const;
  double current_merit() const { return history.back().merit; }
};

enum class RunStatus { Running, Converged, Plateau, Budget, Stalled };

std::string to_string(RunStatus status);

/// Runs the forward / adjoint / advect / re-evaluate loop on one design problem.
class Optimizer {
 public:
  explicit Optimizer(DesignProblem problem);

  const DesignProblem& problem() const { return problem_; }
  CasimirPolderEvaluator& evaluator() { return evaluator_; }

  /// Constrains and reinitialises the initial geometry and evaluates its merit.
  OptimizationState initial_state();

  /// One full cycle with backtracking. Appends exactly one history record.
  void iterate(OptimizationState& state);

  /// Forces a single advection step of `dtau` from the current state's velocity (no backtracking).
  /// Returns the merit of the moved geometry; the state is left unchanged.
  double trial_step(const OptimizationState& state, double dtau);

  RunStatus status(const OptimizationState& state) const;

  /// Iterates until the stopping rule fires. `on_iteration` sees every completed state.
  RunStatus run(OptimizationState& state, const std::function<void(const OptimizationState&)>& on_iteration = {});

 private:
  struct Step {
    std::vector<double> velocity;
    double vmax = 0.0;
  };
  Step velocity_for(const LevelSetField& geometry);
  LevelSetField moved(const LevelSetField& geometry, const Step& step, double dtau) const;
  IterationRecord describe(const LevelSetField& geometry, double merit) const;
  double evaluate_merit(const LevelSetField& geometry);

  DesignProblem problem_;
  CasimirPolderEvaluator evaluator_;
  std::vector<std::uint8_t> frozen_;
};

/// Versioned binary checkpoint (magic, version, config hash, level set, history, step scale).
std::string encode_checkpoint(const OptimizationState& state, std::uint64_t config_hash);
OptimizationState decode_checkpoint(std::string_view bytes, std::uint64_t expected_hash, const Lattice& lattice);
void save_checkpoint(const std::filesystem::path& path, const OptimizationState& state, std::uint64_t config_hash);
OptimizationState load_checkpoint(const std::filesystem::path& path, std::uint64_t expected_hash,
                                  const Lattice& lattice);

/// `iteration,merit,normalized_merit,accepted` table.
std::string merit_table(const OptimizationState& state, std::uint64_t config_hash);

}  // namespace cpd
