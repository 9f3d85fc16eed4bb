#include "flowfill/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <set>
#include <thread>

#include "flowfill/errors.hpp"
#include "flowfill/flow_completion.hpp"
#include "flowfill/io.hpp"

namespace fs = std::filesystem;

namespace flowfill {

namespace {

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  int workers = std::min(threads, n);
  for (int t = 0; t < workers; ++t) {
    pool.emplace_back([&] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::vector<std::pair<int, int>> flow_pair_schedule(int n, const std::vector<int>& anchors,
                                                    bool use_nonlocal) {
  std::set<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < n; ++i) {
    pairs.insert({i, i + 1});
    pairs.insert({i + 1, i});
  }
  if (use_nonlocal) {
    for (int i = 0; i < n; ++i)
      for (int a : anchors) {
        if (a == i) continue;
        pairs.insert({i, a});
        pairs.insert({a, i});
      }
  }
  return {pairs.begin(), pairs.end()};
}

}  // namespace

int select_key_frame(const std::vector<MaskFrame>& masks) {
  int best = -1;
  size_t best_count = 0;
  for (size_t i = 0; i < masks.size(); ++i) {
    size_t c = masks[i].count();
    if (c > best_count) {
      best_count = c;
      best = static_cast<int>(i);
    }
  }
  if (best < 0) throw DataError("select_key_frame: no missing pixels");
  return best;
}

Frame single_image_fill(const Frame& frame, const MaskFrame& mask, SingleImageFillMethod method,
                        const Frame* external, double solver_tolerance, int max_iterations) {
  if (mask.count() == 0) throw DataError("single_image_fill: empty mask");
  if (method == SingleImageFillMethod::kExternal) {
    if (!external) throw DataError("single_image_fill: external fill frame missing");
    if (external->width != frame.width || external->height != frame.height)
      throw DataError("single_image_fill: external fill has wrong dimensions");
    Frame out = frame;
    for (int y = 0; y < frame.height; ++y)
      for (int x = 0; x < frame.width; ++x)
        if (mask.at(x, y))
          for (int c = 0; c < 3; ++c) out.at(x, y, c) = external->at(x, y, c);
    return out;
  }
  // Diffusion: harmonic fill (zero target gradients, known boundary).
  FusionConfig cfg;
  cfg.solver_tolerance = solver_tolerance;
  cfg.max_iterations = max_iterations;
  GradientField zeros(frame.width, frame.height);
  return poisson_reconstruct(frame, mask, zeros, cfg);
}

PipelineResult run(const std::vector<Frame>& frames, const std::vector<MaskFrame>& masks,
                   const PipelineConfig& config) {
  const int n = static_cast<int>(frames.size());
  if (n < 2) throw DataError("pipeline: need at least 2 frames");
  if (masks.size() != frames.size()) throw DataError("pipeline: frame/mask count mismatch");
  for (int i = 0; i < n; ++i) {
    if (frames[i].width != frames[0].width || frames[i].height != frames[0].height)
      throw DataError("pipeline: frame dimensions are not constant");
    if (masks[i].width != frames[i].width || masks[i].height != frames[i].height)
      throw DataError("pipeline: mask dimensions do not match frame " + std::to_string(i));
  }
  const int w = frames[0].width, h = frames[0].height;

  PipelineResult result;
  result.frames = frames;
  result.provenance.assign(n, std::vector<uint8_t>(static_cast<size_t>(w) * h, kProvKnown));

  size_t total_missing = 0;
  for (const MaskFrame& m : masks) total_missing += m.count();
  if (total_missing == 0) return result;  // nothing to do

  // Missing pixels are blacked out for estimation and as solver placeholders.
  std::vector<MaskFrame> cur_masks = masks;
  for (int i = 0; i < n; ++i)
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (cur_masks[i].at(x, y))
          for (int c = 0; c < 3; ++c) result.frames[i].at(x, y, c) = 0.f;

  std::shared_ptr<const FlowEstimator> estimator = config.estimator;
  if (!estimator) estimator = std::make_shared<PyramidalLKEstimator>();

  std::vector<int> anchors = config.chain.nonlocal_anchors;
  if (anchors.empty()) anchors = default_anchors(n);

  std::vector<MaskFrame> dilated(n);
  for (int i = 0; i < n; ++i) dilated[i] = dilate_mask(cur_masks[i], config.dilation_radius);

  // Flow estimation and edge-guided completion, once up front over the
  // original masks.
  auto pairs = flow_pair_schedule(n, anchors, config.use_nonlocal);
  std::vector<FlowField> completed(pairs.size());
  parallel_for(static_cast<int>(pairs.size()), config.threads, [&](int k) {
    auto [i, j] = pairs[k];
    FlowField raw = std::abs(i - j) == 1
                        ? estimate_flow_adjacent(*estimator, result.frames[i], result.frames[j], i, j)
                        : estimate_flow_nonlocal(*estimator, result.frames[i], result.frames[j], i, j,
                                                 config.homography);
    // Flow is untrustworthy wherever either endpoint frame has a hole: the
    // estimator saw blacked-out content there. Complete over the union.
    MaskFrame unknown = dilated[i];
    for (size_t p = 0; p < unknown.data.size(); ++p)
      unknown.data[p] = unknown.data[p] || dilated[j].data[p];
    EdgeMap edges = canny(flow_magnitude(raw), config.canny_sigma, config.canny_low, config.canny_high);
    edges = suppress_hole_edges(edges, unknown);
    const EdgeMap* external = nullptr;
    if (config.edge_strategy == EdgeStrategy::kExternal) {
      if (!config.external_edges || !config.external_edges->count({i, j}))
        throw DataError("missing external edge map for pair (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      external = &config.external_edges->at({i, j});
    }
    edges = complete_edges(edges, unknown, config.edge_strategy, external);

    FlowCompletionProblem problem;
    problem.flow = &raw;
    problem.mask_dilated = &unknown;
    problem.edges = &edges;
    problem.solver_tolerance = config.flow_solver_tolerance;
    problem.max_iterations = config.flow_solver_max_iterations;
    completed[k] = complete_flow(problem);
  });
  for (size_t k = 0; k < pairs.size(); ++k)
    result.completed_flows.insert(pairs[k].first, pairs[k].second, std::move(completed[k]));

  ChainConfig chain = config.chain;
  if (chain.nonlocal_anchors.empty()) chain.nonlocal_anchors = anchors;

  for (int iter = 1; iter <= config.max_pipeline_iterations; ++iter) {
    result.iterations = iter;
    size_t missing_at_start = 0;
    for (const MaskFrame& m : cur_masks) missing_at_start += m.count();
    result.missing_per_iteration.push_back(missing_at_start);

    // Propagation over an immutable snapshot of this iteration's state.
    const std::vector<Frame> snap_frames = result.frames;
    const std::vector<MaskFrame> snap_masks = cur_masks;
    const std::vector<std::vector<uint8_t>> snap_prov = result.provenance;
    std::vector<GradientField> grads(n);
    parallel_for(n, config.threads, [&](int i) { grads[i] = finite_diff(snap_frames[i]); });

    SequenceView view;
    view.frames = &snap_frames;
    view.masks = &snap_masks;
    view.gradients = &grads;
    view.provenance = &snap_prov;
    view.flows = &result.completed_flows;

    std::vector<FillResult> fills(n);
    std::vector<char> has_fill(n, 0);
    parallel_for(n, config.threads, [&](int i) {
      if (snap_masks[i].count() == 0) return;
      std::vector<CandidateSet> sets;
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (snap_masks[i].at(x, y))
            sets.push_back(gather_candidates(view, i, x, y, chain, config.use_nonlocal));
      fills[i] = fill_frame(snap_frames[i], snap_masks[i], sets, config.fusion);
      has_fill[i] = 1;
    });
    for (int i = 0; i < n; ++i) {
      if (!has_fill[i]) continue;
      result.frames[i] = std::move(fills[i].frame);
      cur_masks[i] = std::move(fills[i].remaining);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          size_t idx = static_cast<size_t>(y) * w + x;
          if (snap_masks[i].at(x, y) && !cur_masks[i].at(x, y)) {
            bool tainted = fills[i].tainted[idx] != 0;
            result.provenance[i][idx] = tainted ? kProvPropagatedTainted : kProvPropagated;
            if (tainted)
              ++result.propagated_tainted;
            else
              ++result.propagated_clean;
          }
        }
    }

    size_t missing = 0;
    for (const MaskFrame& m : cur_masks) missing += m.count();
    if (!config.checkpoint_dir.empty()) {
      char sub[32];
      std::snprintf(sub, sizeof(sub), "iter_%02d", iter);
      write_frames_dir((fs::path(config.checkpoint_dir) / sub).string(), result.frames);
    }
    result.fallback_per_iteration.push_back(0);
    if (missing == 0) break;

    // Key-frame single-image fallback: guarantees forward progress.
    int key = select_key_frame(cur_masks);
    const Frame* external = nullptr;
    if (config.fallback == SingleImageFillMethod::kExternal) {
      if (!config.external_fills || !config.external_fills->count(key))
        throw DataError("missing external single-image fill for frame " + std::to_string(key));
      external = &config.external_fills->at(key);
    }
    size_t key_missing = cur_masks[key].count();
    result.frames[key] = single_image_fill(result.frames[key], cur_masks[key], config.fallback,
                                           external, config.fusion.solver_tolerance,
                                           config.fusion.max_iterations);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (cur_masks[key].at(x, y)) {
          result.provenance[key][static_cast<size_t>(y) * w + x] = kProvFallback;
          cur_masks[key].at(x, y) = 0;
        }
    result.fallback_filled += key_missing;
    result.fallback_per_iteration.back() = key_missing;

    if (missing == key_missing) {
      // Everything left was on the key frame; done.
      break;
    }
    if (iter == config.max_pipeline_iterations) {
      size_t left = 0;
      for (const MaskFrame& m : cur_masks) left += m.count();
      if (left > 0)
        throw NumericalError("pipeline: iteration budget exhausted with " + std::to_string(left) +
                             " missing pixels remaining");
    }
  }
  return result;
}

}  // namespace flowfill
