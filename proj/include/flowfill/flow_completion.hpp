#pragma once

#include "flowfill/core.hpp"
#include "flowfill/edges.hpp"
#include "flowfill/solver.hpp"

namespace flowfill {

// Fill missing flow with a piecewise-smooth field: minimize forward-difference
// flow gradients at non-edge pixel pairs, with known flow as Dirichlet
// boundary. A difference term is dropped when either endpoint of the pair is
// an edge pixel.
struct FlowCompletionProblem {
  const FlowField* flow = nullptr;
  const MaskFrame* mask_dilated = nullptr;  // unknowns
  const EdgeMap* edges = nullptr;           // may be null (diffusion)
  double solver_tolerance = 1e-6;
  int max_iterations = 10000;
};

struct FlowCompletionStats {
  int cg_iterations = 0;
  double residual = 0.0;
  size_t isolated_pixels = 0;  // filled from nearest known values
};

SparseSystem assemble_system(const FlowCompletionProblem& problem);

FlowField complete_flow(const FlowCompletionProblem& problem, FlowCompletionStats* stats = nullptr);

}  // namespace flowfill
