#pragma once

#include <string>
#include <utility>
#include <vector>

#include "flowfill/core.hpp"
#include "flowfill/edges.hpp"

namespace flowfill {

// Middlebury .flo: float32 magic 202021.25, int32 width, int32 height, then
// width*height interleaved (u, v) float32 pairs, all little-endian, row-major.
FlowField read_flo(const std::string& path);
// Throws DataError when the field contains non-finite components.
void write_flo(const std::string& path, const FlowField& flow);

// flow/{source:05}_{target:05}.flo naming convention.
std::string flow_pair_path(const std::string& directory, int source, int target);

Frame read_frame_png(const std::string& path);
void write_frame_png(const std::string& path, const Frame& frame);

// Nonzero = true (missing / edge).
MaskFrame read_mask_png(const std::string& path);
void write_mask_png(const std::string& path, const MaskFrame& mask);
EdgeMap read_edge_png(const std::string& path, double binarize_threshold = 0.5);
void write_edge_png(const std::string& path, const EdgeMap& edges);
void write_gray_png(const std::string& path, const ScalarImage& img);

struct SequenceSpec {
  std::string frames_dir;
  std::string masks_dir;
  // Zero-padded "{index:05}.png" naming; indices must be contiguous from the
  // first present index.
  int pad = 5;
};

std::pair<std::vector<Frame>, std::vector<MaskFrame>> read_sequence(const SequenceSpec& spec);
std::vector<Frame> read_frames_dir(const std::string& dir, int pad = 5);
void write_frames_dir(const std::string& dir, const std::vector<Frame>& frames, int pad = 5);
void write_masks_dir(const std::string& dir, const std::vector<MaskFrame>& masks, int pad = 5);

std::string frame_name(int index, int pad = 5);

}  // namespace flowfill
