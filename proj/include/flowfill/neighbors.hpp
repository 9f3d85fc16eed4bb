#pragma once

#include <map>
#include <optional>
#include <vector>

#include "flowfill/core.hpp"

namespace flowfill {

// Completed flow fields keyed by (source frame, target frame).
struct FlowSet {
  std::map<std::pair<int, int>, FlowField> fields;

  bool has(int i, int j) const { return fields.count({i, j}) != 0; }
  const FlowField& at(int i, int j) const;
  FlowField& insert(int i, int j, FlowField f);
};

enum class CandidateKind { kLocalForward, kLocalBackward, kNonLocal };

struct Candidate {
  int source_frame = -1;
  Vec2 source_position{};
  Rgb color{};
  GradientSample gradient{};
  double error_px = 0.0;  // cycle-consistency error d_k
  CandidateKind kind = CandidateKind::kLocalForward;
  int anchor = -1;  // anchor frame index for non-local candidates
  bool valid = false;
  bool gradient_valid = false;  // gradient stencil clear of missing pixels
  bool tainted = false;  // sources from fallback-derived content
};

struct CandidateSet {
  int frame = -1;
  int x = 0, y = 0;
  std::vector<Candidate> candidates;  // ordered: local fwd, local bwd, anchors ascending
};

struct ChainConfig {
  double tau = 5.0;                 // pixels
  std::vector<int> nonlocal_anchors;  // default: first, middle, last
  int max_chain_length = -1;        // default: sequence length
};

// Immutable per-iteration view of the sequence.
struct SequenceView {
  const std::vector<Frame>* frames = nullptr;
  const std::vector<MaskFrame>* masks = nullptr;
  const std::vector<GradientField>* gradients = nullptr;
  // Per-frame provenance: 0 original, 1 propagated, 2 fallback, 3 propagated
  // from tainted sources. May be null (everything counts as untainted).
  const std::vector<std::vector<uint8_t>>* provenance = nullptr;
  const FlowSet* flows = nullptr;
};

// Forward-backward consistency error at p, with the backward flow
// bilinearly sampled at p + f_ij(p). Un-squared Euclidean norm, in pixels.
// nullopt when the sample point leaves the field.
std::optional<double> cycle_error(const FlowField& f_ij, const FlowField& f_ji, Vec2 p);

enum class ChainDirection { kForward, kBackward };

std::optional<Candidate> trace_chain(const SequenceView& seq, int frame, Vec2 start,
                                     ChainDirection direction, const ChainConfig& config);

std::vector<Candidate> nonlocal_candidates(const SequenceView& seq, int frame, Vec2 pixel,
                                           const ChainConfig& config);

CandidateSet gather_candidates(const SequenceView& seq, int frame, int x, int y,
                               const ChainConfig& config, bool use_nonlocal = true);

std::vector<int> default_anchors(int frame_count);

}  // namespace flowfill
