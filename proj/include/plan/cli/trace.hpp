#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "plan/model/plan_model.hpp"
#include "plan/train/trainer.hpp"

namespace plan::cli {

struct TraceStep {
  std::vector<int> tokens;            // the unit read at this step
  std::vector<double> alpha;          // image weights, empty without the image branch
  std::vector<double> beta;           // proposal weights, empty without the proposal branch
  std::vector<double> probabilities;  // P if the expression ended at this step
};

struct TraceBundle {
  int grid_side = 0;
  std::vector<TraceStep> steps;
  std::vector<double> final_probabilities;
  std::size_t predicted = 0;
  std::size_t target = 0;
};

/// Runs the model on every prefix d_1..d_t of the expression. The last
/// step's probabilities are those of the full instance.
TraceBundle build_trace(const model::PlanParams& params, const train::PreparedInstance& instance,
                        model::Ablation ablation, int grid_side);

/// Plain (ASCII) PGM of the weights over a g x g grid, each cell drawn as a
/// cell_px square. Intensity is round(255 * w / max w).
std::string render_pgm(const std::vector<double>& weights, int grid_side, int cell_px = 16);

/// `trace.jsonl` plus `step_XX.pgm` per step that has image weights.
/// Re-checks that every alpha/beta sums to 1 within 1e-6 before writing.
void write_trace(const std::filesystem::path& dir, const TraceBundle& bundle);

}  // namespace plan::cli
