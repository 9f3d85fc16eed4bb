#include "flowfill/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "flowfill/errors.hpp"
#include "flowfill/solver.hpp"

namespace flowfill {

std::vector<double> candidate_weights(const std::vector<Candidate>& candidates, double temperature) {
  std::vector<double> w;
  w.reserve(candidates.size());
  for (const Candidate& c : candidates) w.push_back(std::exp(-c.error_px / temperature));
  return w;
}

Rgb fuse_color(const std::vector<Candidate>& candidates, const std::vector<double>& weights) {
  if (candidates.empty()) throw DataError("fuse_color: empty candidate set");
  double sum = 0.0;
  std::array<double, 3> acc{0, 0, 0};
  for (size_t k = 0; k < candidates.size(); ++k) {
    sum += weights[k];
    for (int c = 0; c < 3; ++c) acc[c] += weights[k] * candidates[k].color[c];
  }
  Rgb out;
  for (int c = 0; c < 3; ++c) out[c] = static_cast<float>(acc[c] / sum);
  return out;
}

GradientSample fuse_gradient(const std::vector<Candidate>& candidates,
                             const std::vector<double>& weights) {
  if (candidates.empty()) throw DataError("fuse_gradient: empty candidate set");
  double sum = 0.0;
  std::array<double, 3> ax{0, 0, 0}, ay{0, 0, 0};
  for (size_t k = 0; k < candidates.size(); ++k) {
    sum += weights[k];
    for (int c = 0; c < 3; ++c) {
      ax[c] += weights[k] * candidates[k].gradient.gx[c];
      ay[c] += weights[k] * candidates[k].gradient.gy[c];
    }
  }
  GradientSample out;
  for (int c = 0; c < 3; ++c) {
    out.gx[c] = static_cast<float>(ax[c] / sum);
    out.gy[c] = static_cast<float>(ay[c] / sum);
  }
  return out;
}

namespace {

Frame poisson_solve(const Frame& frame, const MaskFrame& unknowns, const GradientField& fused,
                    const FusionConfig& config, const MaskFrame* excluded,
                    std::vector<std::pair<int, int>>* isolated_out) {
  GridProblem g;
  g.width = frame.width;
  g.height = frame.height;
  g.channels = 3;
  g.unknowns = &unknowns;
  g.excluded = excluded;
  g.target = [&fused](const GridTerm& t, int c) {
    return t.dir == 0 ? static_cast<double>(fused.gx_at(t.x, t.y, c))
                      : static_cast<double>(fused.gy_at(t.x, t.y, c));
  };
  g.known_value = [&frame](int x, int y, int c) { return static_cast<double>(frame.at(x, y, c)); };

  SparseSystem sys = assemble_grid_system(g);
  Eigen::MatrixXd sol = solve_cg(sys, config.solver_tolerance, config.max_iterations);

  Frame out = frame;
  for (size_t i = 0; i < sys.unknown_pixels.size(); ++i) {
    auto [x, y] = sys.unknown_pixels[i];
    for (int c = 0; c < 3; ++c)
      out.at(x, y, c) = std::clamp(static_cast<float>(sol(i, c)), 0.f, 1.f);
  }
  if (isolated_out) {
    *isolated_out = sys.isolated_pixels;
  } else if (!sys.isolated_pixels.empty()) {
    auto known_value = [&frame](int x, int y, int c) { return static_cast<double>(frame.at(x, y, c)); };
    std::vector<double> mean = nearest_known_mean(sys.isolated_pixels, frame.width, frame.height,
                                                  unknowns, known_value, 3);
    for (auto [x, y] : sys.isolated_pixels)
      for (int c = 0; c < 3; ++c) out.at(x, y, c) = std::clamp(static_cast<float>(mean[c]), 0.f, 1.f);
  }
  return out;
}

}  // namespace

Frame poisson_reconstruct(const Frame& frame, const MaskFrame& unknowns, const GradientField& fused,
                          const FusionConfig& config, const MaskFrame* excluded) {
  return poisson_solve(frame, unknowns, fused, config, excluded, nullptr);
}

FillResult fill_frame(const Frame& frame, const MaskFrame& mask,
                      const std::vector<CandidateSet>& candidate_sets, const FusionConfig& config) {
  const int w = frame.width, h = frame.height;
  FillResult result;
  result.frame = frame;
  result.remaining = mask;
  result.tainted.assign(static_cast<size_t>(w) * h, 0);

  struct Fused {
    int x, y;
    Rgb color;
    GradientSample grad;
    bool has_grad;
    bool tainted;
  };
  std::vector<Fused> fused;
  for (const CandidateSet& set : candidate_sets) {
    std::vector<Candidate> valid;
    for (const Candidate& c : set.candidates)
      if (c.valid) valid.push_back(c);
    if (valid.empty()) continue;
    std::vector<double> weights = candidate_weights(valid, config.temperature);
    Fused f;
    f.x = set.x;
    f.y = set.y;
    f.color = fuse_color(valid, weights);
    // Gradients come only from candidates whose sampling stencil avoided
    // missing pixels; the others would inject hole-boundary steps.
    std::vector<Candidate> with_grad;
    for (const Candidate& c : valid)
      if (c.gradient_valid) with_grad.push_back(c);
    f.has_grad = !with_grad.empty();
    if (f.has_grad)
      f.grad = fuse_gradient(with_grad, candidate_weights(with_grad, config.temperature));
    f.tainted = std::any_of(valid.begin(), valid.end(), [](const Candidate& c) { return c.tainted; });
    fused.push_back(f);
  }
  if (fused.empty()) return result;

  if (config.domain == FusionDomain::kColor) {
    for (const Fused& f : fused) {
      for (int c = 0; c < 3; ++c) result.frame.at(f.x, f.y, c) = f.color[c];
      result.remaining.at(f.x, f.y) = 0;
      result.tainted[static_cast<size_t>(f.y) * w + f.x] = f.tainted;
      ++result.filled;
    }
    return result;
  }

  // Gradient domain: Poisson solve over the pixels that have usable fused
  // gradients; the rest stay missing until a later round (or fallback).
  MaskFrame unknowns(w, h);
  GradientField targets(w, h);
  for (const Fused& f : fused) {
    if (!f.has_grad) continue;
    unknowns.at(f.x, f.y) = 1;
    for (int c = 0; c < 3; ++c) {
      targets.gx_at(f.x, f.y, c) = f.grad.gx[c];
      targets.gy_at(f.x, f.y, c) = f.grad.gy[c];
    }
  }
  MaskFrame excluded(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (mask.at(x, y) && !unknowns.at(x, y)) excluded.at(x, y) = 1;

  // Cross-boundary terms based at a known pixel take the unknown neighbor's
  // fused gradient as target.
  for (const Fused& f : fused) {
    if (!f.has_grad) continue;
    if (f.x > 0 && !mask.at(f.x - 1, f.y))
      for (int c = 0; c < 3; ++c) targets.gx_at(f.x - 1, f.y, c) = f.grad.gx[c];
    if (f.y > 0 && !mask.at(f.x, f.y - 1))
      for (int c = 0; c < 3; ++c) targets.gy_at(f.x, f.y - 1, c) = f.grad.gy[c];
  }

  std::vector<std::pair<int, int>> deferred;
  result.frame = poisson_solve(frame, unknowns, targets, config, &excluded, &deferred);

  std::vector<char> was_deferred(static_cast<size_t>(w) * h, 0);
  for (auto [x, y] : deferred) was_deferred[static_cast<size_t>(y) * w + x] = 1;
  for (const Fused& f : fused) {
    if (!f.has_grad) continue;
    if (was_deferred[static_cast<size_t>(f.y) * w + f.x]) {
      ++result.deferred;
      continue;
    }
    result.remaining.at(f.x, f.y) = 0;
    result.tainted[static_cast<size_t>(f.y) * w + f.x] = f.tainted;
    ++result.filled;
  }
  return result;
}

}  // namespace flowfill
