#pragma once

#include <map>
#include <optional>
#include <string>

#include "flowfill/core.hpp"
#include "flowfill/edges.hpp"

namespace flowfill {

// Rendered test scene with exact ground truth.
struct SyntheticScene {
  std::vector<Frame> frames;  // observed content (mask areas still intact)
  std::vector<MaskFrame> masks;
  std::vector<Frame> ground_truth_frames;
  // Exact flow for all adjacent pairs and anchor pairs, both directions.
  std::map<std::pair<int, int>, FlowField> ground_truth_flows;
  // Flow-discontinuity edges per pair (empty maps when the flow is smooth).
  std::map<std::pair<int, int>, EdgeMap> ground_truth_edges;
  // visibility[t][k](p): true content of pixel (t, p) is visible at frame k.
  std::vector<std::vector<MaskFrame>> visibility;
};

// PSNR over the region (true = evaluate), channels pooled, [0,1] range.
// nullopt signals infinity (identical inputs).
std::optional<double> psnr(const Frame& a, const Frame& b, const MaskFrame& region);

// Single-scale SSIM, 11x11 Gaussian window sigma 1.5, C1=(0.01)^2, C2=(0.03)^2,
// mean over pixels and channels.
double ssim(const Frame& a, const Frame& b);

// Mean endpoint error over the region, in pixels.
double flow_epe(const FlowField& f, const FlowField& g, const MaskFrame& region);

// Stationary evaluation mask: a uniform grid of 5x4 square blocks.
MaskFrame grid_mask(int width, int height);

// Scene names: static_hole | translating_texture | two_region_flow |
// sweeping_occluder | brightness_ramp | grid_mask. Deterministic per seed.
SyntheticScene synth_scene(const std::string& name, int width, int height, int frame_count,
                           unsigned seed);

}  // namespace flowfill
