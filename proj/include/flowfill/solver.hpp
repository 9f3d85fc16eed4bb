#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <functional>
#include <vector>

#include "flowfill/core.hpp"

namespace flowfill {

// One forward-difference residual value(base + dir) - value(base) = target.
// dir 0 = +x, dir 1 = +y.
struct GridTerm {
  int x, y;  // base pixel
  int dir;
};

// Describes a least-squares problem over a pixel grid. Values at unknown
// pixels are solved for; known pixels contribute to the right-hand side.
struct GridProblem {
  int width = 0;
  int height = 0;
  int channels = 1;
  // Unknown pixels (true = unknown).
  const MaskFrame* unknowns = nullptr;
  // Optional: pixels excluded entirely (terms touching them are dropped).
  const MaskFrame* excluded = nullptr;
  // Returns false to drop a term (edge crossing). May be empty.
  std::function<bool(const GridTerm&)> keep_term;
  // Per-term, per-channel target (0 for pure smoothness).
  std::function<double(const GridTerm&, int channel)> target;
  // Known pixel value per channel.
  std::function<double(int x, int y, int channel)> known_value;
};

// Normal equations of a GridProblem, over anchored unknowns only.
struct SparseSystem {
  Eigen::SparseMatrix<double> matrix;
  Eigen::MatrixXd rhs;                  // n x channels
  std::vector<int> unknown_index;       // width*height, -1 when not an anchored unknown
  std::vector<std::pair<int, int>> unknown_pixels;  // index -> (x, y)
  // Unknown pixels dropped from the system: zero rows and components with no
  // known anchor. Routed to the caller's fallback fill.
  std::vector<std::pair<int, int>> isolated_pixels;
};

SparseSystem assemble_grid_system(const GridProblem& problem);

struct SolveStats {
  int iterations = 0;
  double residual = 0.0;
};

// Jacobi-preconditioned CG. Throws NumericalError on non-convergence.
Eigen::MatrixXd solve_cg(const SparseSystem& system, double tolerance, int max_iterations,
                         SolveStats* stats = nullptr);

// Mean of the known values nearest (4-connected BFS distance) to the given
// region. Used to fill isolated unknown regions.
std::vector<double> nearest_known_mean(const std::vector<std::pair<int, int>>& region, int width,
                                       int height, const MaskFrame& unknowns,
                                       const std::function<double(int, int, int)>& known_value,
                                       int channels);

}  // namespace flowfill
