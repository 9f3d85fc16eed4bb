#pragma once

#include <map>
#include <memory>
#include <string>

#include "flowfill/core.hpp"
#include "flowfill/edges.hpp"
#include "flowfill/flow.hpp"
#include "flowfill/fusion.hpp"
#include "flowfill/neighbors.hpp"

namespace flowfill {

enum class SingleImageFillMethod { kDiffusion, kExternal };

struct PipelineConfig {
  ChainConfig chain;
  FusionConfig fusion;
  EdgeStrategy edge_strategy = EdgeStrategy::kLink;
  std::shared_ptr<const FlowEstimator> estimator;  // default: pyramidal LK
  HomographyConfig homography;
  int dilation_radius = 15;
  int max_pipeline_iterations = 20;
  bool use_nonlocal = true;
  double canny_sigma = 1.0;
  double canny_low = 0.1;
  double canny_high = 0.2;
  double flow_solver_tolerance = 1e-6;
  int flow_solver_max_iterations = 10000;
  SingleImageFillMethod fallback = SingleImageFillMethod::kDiffusion;
  // Completed edge maps per (source, target) pair for the external strategy.
  const std::map<std::pair<int, int>, EdgeMap>* external_edges = nullptr;
  // External single-image fills per frame index (external fallback method).
  const std::map<int, Frame>* external_fills = nullptr;
  int threads = 1;
  std::string checkpoint_dir;  // per-iteration frame dumps when non-empty
};

// Per-pixel provenance labels in PipelineResult.
inline constexpr uint8_t kProvKnown = 0;
inline constexpr uint8_t kProvPropagated = 1;
inline constexpr uint8_t kProvFallback = 2;
inline constexpr uint8_t kProvPropagatedTainted = 3;

struct PipelineResult {
  std::vector<Frame> frames;
  std::vector<std::vector<uint8_t>> provenance;
  int iterations = 0;
  std::vector<size_t> missing_per_iteration;  // missing count at iteration start
  std::vector<size_t> fallback_per_iteration;
  size_t propagated_clean = 0;
  size_t propagated_tainted = 0;
  size_t fallback_filled = 0;
  FlowSet completed_flows;  // kept for inspection / persistence
};

PipelineResult run(const std::vector<Frame>& frames, const std::vector<MaskFrame>& masks,
                   const PipelineConfig& config);

// Frame with the most missing pixels; ties break to the lowest index.
int select_key_frame(const std::vector<MaskFrame>& masks);

Frame single_image_fill(const Frame& frame, const MaskFrame& mask, SingleImageFillMethod method,
                        const Frame* external = nullptr, double solver_tolerance = 1e-6,
                        int max_iterations = 10000);

}  // namespace flowfill
