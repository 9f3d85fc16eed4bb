#pragma once

#include "flowfill/core.hpp"
#include "flowfill/neighbors.hpp"

namespace flowfill {

enum class FusionDomain { kGradient, kColor };

struct FusionConfig {
  double temperature = 0.1;  // T in w = exp(-d / T)
  FusionDomain domain = FusionDomain::kGradient;
  double solver_tolerance = 1e-6;
  int max_iterations = 10000;
};

// w_k = exp(-d_k / T), unnormalized.
std::vector<double> candidate_weights(const std::vector<Candidate>& candidates, double temperature);

Rgb fuse_color(const std::vector<Candidate>& candidates, const std::vector<double>& weights);

GradientSample fuse_gradient(const std::vector<Candidate>& candidates,
                             const std::vector<double>& weights);

// Least-squares color recovery: finite differences of the result match the
// fused gradients over unknown pixels, with known pixels as Dirichlet
// boundary. Difference terms touching `excluded` pixels (missing pixels not
// being solved this round) are dropped. Result clamped to [0,1] after the
// solve.
Frame poisson_reconstruct(const Frame& frame, const MaskFrame& unknowns, const GradientField& fused,
                          const FusionConfig& config, const MaskFrame* excluded = nullptr);

struct FillResult {
  Frame frame;
  MaskFrame remaining;           // pixels still missing afterwards
  std::vector<uint8_t> tainted;  // per filled pixel flag (w*h), 1 when any used candidate was tainted
  size_t filled = 0;
  size_t deferred = 0;  // had candidates but could not be solved this round
};

// Fuses candidates for one frame and writes the result. Gradient mode runs a
// Poisson solve; color mode writes fused colors directly. Pixels with no
// valid candidates stay missing.
FillResult fill_frame(const Frame& frame, const MaskFrame& mask,
                      const std::vector<CandidateSet>& candidate_sets, const FusionConfig& config);

}  // namespace flowfill
