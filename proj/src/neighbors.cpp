#include "flowfill/neighbors.hpp"

#include <algorithm>
#include <cmath>

#include "flowfill/errors.hpp"

namespace flowfill {

const FlowField& FlowSet::at(int i, int j) const {
  auto it = fields.find({i, j});
  if (it == fields.end())
    throw DataError("missing flow field for pair (" + std::to_string(i) + ", " + std::to_string(j) +
                    ")");
  return it->second;
}

FlowField& FlowSet::insert(int i, int j, FlowField f) {
  f.source_frame = i;
  f.target_frame = j;
  return fields[{i, j}] = std::move(f);
}

std::vector<int> default_anchors(int frame_count) {
  std::vector<int> a{0, frame_count / 2, frame_count - 1};
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

std::optional<double> cycle_error(const FlowField& f_ij, const FlowField& f_ji, Vec2 p) {
  auto f = bilinear_sample(f_ij, p.x, p.y);
  if (!f) return std::nullopt;
  auto b = bilinear_sample(f_ji, p.x + f->x, p.y + f->y);
  if (!b) return std::nullopt;
  return std::hypot(f->x + b->x, f->y + b->y);
}

namespace {

bool footprint_tainted(const std::vector<uint8_t>& prov, int width, int height, float x, float y) {
  int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  int x1 = std::min(x0 + 1, width - 1), y1 = std::min(y0 + 1, height - 1);
  auto bad = [&](int xx, int yy) {
    uint8_t v = prov[static_cast<size_t>(yy) * width + xx];
    return v >= 2;
  };
  return bad(x0, y0) || bad(x1, y0) || bad(x0, y1) || bad(x1, y1);
}

// Forward-difference gradients at the 4 bilinear taps also read each tap's
// right and bottom neighbors; a missing pixel anywhere in that stencil would
// leak a spurious step into the sampled gradient.
bool gradient_stencil_known(const MaskFrame& mask, float x, float y) {
  int x0 = static_cast<int>(std::floor(x)), y0 = static_cast<int>(std::floor(y));
  if (x0 < 0 || y0 < 0) return false;
  int x1 = std::min(x0 + 2, mask.width - 1), y1 = std::min(y0 + 2, mask.height - 1);
  for (int yy = y0; yy <= y1; ++yy)
    for (int xx = x0; xx <= x1; ++xx)
      if (mask.at(xx, yy)) return false;
  return true;
}

Candidate make_candidate(const SequenceView& seq, int landing_frame, Vec2 pos, double err,
                         CandidateKind kind, int anchor) {
  const Frame& frame = (*seq.frames)[landing_frame];
  Candidate c;
  c.source_frame = landing_frame;
  c.source_position = pos;
  c.kind = kind;
  c.anchor = anchor;
  c.error_px = err;
  auto color = bilinear_sample(frame, pos.x, pos.y);
  auto grad = bilinear_sample((*seq.gradients)[landing_frame], pos.x, pos.y);
  if (color) c.color = *color;
  if (grad) c.gradient = *grad;
  c.valid = color.has_value();
  c.gradient_valid =
      grad.has_value() && gradient_stencil_known((*seq.masks)[landing_frame], pos.x, pos.y);
  if (seq.provenance)
    c.tainted = footprint_tainted((*seq.provenance)[landing_frame], frame.width, frame.height,
                                  pos.x, pos.y);
  return c;
}

}  // namespace

std::optional<Candidate> trace_chain(const SequenceView& seq, int frame, Vec2 start,
                                     ChainDirection direction, const ChainConfig& config) {
  const int n = static_cast<int>(seq.frames->size());
  const int step = direction == ChainDirection::kForward ? 1 : -1;
  const int max_hops = config.max_chain_length > 0 ? config.max_chain_length : n;

  Vec2 q = start;
  int k = frame;
  double max_err = 0.0;
  for (int hop = 0; hop < max_hops; ++hop) {
    int next = k + step;
    if (next < 0 || next >= n) return std::nullopt;  // sequence end, still missing
    const FlowField& fwd = seq.flows->at(k, next);
    const FlowField& bwd = seq.flows->at(next, k);
    auto err = cycle_error(fwd, bwd, q);
    if (!err || *err > config.tau) return std::nullopt;
    max_err = std::max(max_err, *err);
    auto f = bilinear_sample(fwd, q.x, q.y);
    q = {q.x + f->x, q.y + f->y};
    k = next;
    if (footprint_known((*seq.masks)[k], q.x, q.y)) {
      CandidateKind kind = direction == ChainDirection::kForward ? CandidateKind::kLocalForward
                                                                 : CandidateKind::kLocalBackward;
      Candidate c = make_candidate(seq, k, q, max_err, kind, -1);
      if (!c.valid) return std::nullopt;
      return c;
    }
  }
  return std::nullopt;
}

std::vector<Candidate> nonlocal_candidates(const SequenceView& seq, int frame, Vec2 pixel,
                                           const ChainConfig& config) {
  std::vector<int> anchors = config.nonlocal_anchors;
  if (anchors.empty()) anchors = default_anchors(static_cast<int>(seq.frames->size()));
  std::sort(anchors.begin(), anchors.end());

  std::vector<Candidate> out;
  for (int a : anchors) {
    if (a == frame) continue;  // self-pair excluded
    const FlowField& f_ia = seq.flows->at(frame, a);
    const FlowField& f_ai = seq.flows->at(a, frame);
    auto err = cycle_error(f_ia, f_ai, pixel);
    if (!err || *err > config.tau) continue;
    auto f = bilinear_sample(f_ia, pixel.x, pixel.y);
    Vec2 pos{pixel.x + f->x, pixel.y + f->y};
    if (!footprint_known((*seq.masks)[a], pos.x, pos.y)) continue;
    Candidate c = make_candidate(seq, a, pos, *err, CandidateKind::kNonLocal, a);
    if (c.valid) out.push_back(c);
  }
  return out;
}

CandidateSet gather_candidates(const SequenceView& seq, int frame, int x, int y,
                               const ChainConfig& config, bool use_nonlocal) {
  CandidateSet set;
  set.frame = frame;
  set.x = x;
  set.y = y;
  Vec2 p{static_cast<float>(x), static_cast<float>(y)};
  if (auto c = trace_chain(seq, frame, p, ChainDirection::kForward, config)) set.candidates.push_back(*c);
  if (auto c = trace_chain(seq, frame, p, ChainDirection::kBackward, config)) set.candidates.push_back(*c);
  if (use_nonlocal) {
    for (Candidate& c : nonlocal_candidates(seq, frame, p, config)) set.candidates.push_back(c);
  }
  return set;
}

}  // namespace flowfill
