#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>

#include "flowfill/core.hpp"

namespace flowfill {

// 3x3 projective warp, normalized so the bottom-right entry is 1.
struct Homography {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};  // row-major

  static Homography identity() { return Homography{}; }

  Vec2 apply(float x, float y) const {
    double wz = m[6] * x + m[7] * y + m[8];
    return {static_cast<float>((m[0] * x + m[1] * y + m[2]) / wz),
            static_cast<float>((m[3] * x + m[4] * y + m[5]) / wz)};
  }
  Homography inverse() const;
};

// Produces flow between two equal-size frames. i/j indices let file-backed
// estimators locate precomputed fields.
class FlowEstimator {
 public:
  virtual ~FlowEstimator() = default;
  virtual FlowField estimate(const Frame& frame_i, const Frame& frame_j, int i, int j) const = 0;
  // Built-in estimators only capture small motion and want homography
  // compensation for non-local pairs; file-backed fields are used as-is.
  virtual bool wants_homography_compensation() const { return true; }
};

struct LucasKanadeConfig {
  int max_levels = 5;
  int min_level_size = 24;
  int window_radius = 2;  // 5x5 window
  int iterations_per_level = 5;
  float regularization = 1e-5f;
};

// Coarse-to-fine pyramidal local least-squares flow.
class PyramidalLKEstimator : public FlowEstimator {
 public:
  explicit PyramidalLKEstimator(LucasKanadeConfig config = {}) : config_(config) {}
  FlowField estimate(const Frame& frame_i, const Frame& frame_j, int i, int j) const override;

 private:
  LucasKanadeConfig config_;
};

// Reads flow/{source:05}_{target:05}.flo under a directory.
class FileFlowEstimator : public FlowEstimator {
 public:
  explicit FileFlowEstimator(std::string directory) : directory_(std::move(directory)) {}
  FlowField estimate(const Frame& frame_i, const Frame& frame_j, int i, int j) const override;
  bool wants_homography_compensation() const override { return false; }

 private:
  std::string directory_;
};

// In-memory map of flow fields keyed by (source, target). Used by tests and
// by synthetic scenes with exact ground-truth flow.
class MapFlowEstimator : public FlowEstimator {
 public:
  explicit MapFlowEstimator(std::map<std::pair<int, int>, FlowField> fields)
      : fields_(std::move(fields)) {}
  FlowField estimate(const Frame& frame_i, const Frame& frame_j, int i, int j) const override;
  bool wants_homography_compensation() const override { return false; }

 private:
  std::map<std::pair<int, int>, FlowField> fields_;
};

struct HomographyConfig {
  int max_features = 400;
  int patch_radius = 4;  // 9x9 descriptors
  float ratio_test = 0.8f;
  int ransac_iterations = 2000;
  double inlier_threshold = 3.0;  // pixels
  unsigned rng_seed = 7;
};

FlowField estimate_flow_adjacent(const FlowEstimator& estimator, const Frame& frame_i,
                                 const Frame& frame_j, int i, int j);

// RANSAC over corner-feature matches. The result maps frame_i coordinates to
// the matching frame_j coordinates (so warping frame_j by it aligns frame_j
// to frame_i). Throws DegenerateAlignment with < 4 inlier matches.
Homography estimate_homography(const Frame& frame_i, const Frame& frame_j,
                               const HomographyConfig& config = {});

// Per-pixel displacement p -> warp(p) - p.
FlowField homography_flow_field(const Homography& h, int width, int height);

// Homography-compensated non-local flow: estimate against the aligned frame_j
// and compose with the warp so vectors point into the unaligned frame_j.
// Falls back to plain estimation on degenerate homographies.
FlowField estimate_flow_nonlocal(const FlowEstimator& estimator, const Frame& frame_i,
                                 const Frame& frame_j, int i, int j,
                                 const HomographyConfig& config = {});

ScalarImage to_gray(const Frame& frame);

}  // namespace flowfill
