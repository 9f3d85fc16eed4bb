#include "flowfill/flow_completion.hpp"

#include <map>

#include "flowfill/errors.hpp"

namespace flowfill {

namespace {

GridProblem to_grid_problem(const FlowCompletionProblem& p) {
  const FlowField& flow = *p.flow;
  GridProblem g;
  g.width = flow.width;
  g.height = flow.height;
  g.channels = 2;
  g.unknowns = p.mask_dilated;
  if (p.edges) {
    const EdgeMap* edges = p.edges;
    g.keep_term = [edges](const GridTerm& t) {
      int nx = t.x + (t.dir == 0 ? 1 : 0);
      int ny = t.y + (t.dir == 1 ? 1 : 0);
      return !edges->at(t.x, t.y) && !edges->at(nx, ny);
    };
  }
  g.known_value = [&flow](int x, int y, int c) {
    Vec2 v = flow.at(x, y);
    return c == 0 ? v.x : v.y;
  };
  return g;
}

}  // namespace

SparseSystem assemble_system(const FlowCompletionProblem& problem) {
  if (!problem.flow || !problem.mask_dilated) throw DataError("complete_flow: missing inputs");
  if (problem.mask_dilated->width != problem.flow->width ||
      problem.mask_dilated->height != problem.flow->height)
    throw DataError("complete_flow: mask dimensions do not match flow");
  if (problem.mask_dilated->count() == problem.mask_dilated->data.size())
    throw DataError("complete_flow: no known pixel");
  return assemble_grid_system(to_grid_problem(problem));
}

FlowField complete_flow(const FlowCompletionProblem& problem, FlowCompletionStats* stats) {
  SparseSystem sys = assemble_system(problem);

  SolveStats solve_stats;
  Eigen::MatrixXd solution = solve_cg(sys, problem.solver_tolerance, problem.max_iterations, &solve_stats);

  FlowField out = *problem.flow;
  for (size_t i = 0; i < sys.unknown_pixels.size(); ++i) {
    auto [x, y] = sys.unknown_pixels[i];
    out.set(x, y, {static_cast<float>(solution(i, 0)), static_cast<float>(solution(i, 1))});
  }

  // Isolated regions (enclosed by edges): mean of nearest known values,
  // grouped by 4-connected component.
  if (!sys.isolated_pixels.empty()) {
    const int w = out.width, h = out.height;
    std::vector<int> comp(static_cast<size_t>(w) * h, -1);
    std::vector<std::vector<std::pair<int, int>>> comps;
    std::vector<char> isolated(static_cast<size_t>(w) * h, 0);
    for (auto [x, y] : sys.isolated_pixels) isolated[static_cast<size_t>(y) * w + x] = 1;
    for (auto [sx, sy] : sys.isolated_pixels) {
      if (comp[static_cast<size_t>(sy) * w + sx] >= 0) continue;
      int id = static_cast<int>(comps.size());
      comps.emplace_back();
      std::vector<std::pair<int, int>> stack{{sx, sy}};
      comp[static_cast<size_t>(sy) * w + sx] = id;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        comps[id].emplace_back(x, y);
        const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
          int nx = x + dx[k], ny = y + dy[k];
          if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
          size_t idx = static_cast<size_t>(ny) * w + nx;
          if (isolated[idx] && comp[idx] < 0) {
            comp[idx] = id;
            stack.emplace_back(nx, ny);
          }
        }
      }
    }
    auto known_value = [&](int x, int y, int c) {
      Vec2 v = problem.flow->at(x, y);
      return static_cast<double>(c == 0 ? v.x : v.y);
    };
    for (const auto& region : comps) {
      std::vector<double> mean =
          nearest_known_mean(region, w, h, *problem.mask_dilated, known_value, 2);
      for (auto [x, y] : region)
        out.set(x, y, {static_cast<float>(mean[0]), static_cast<float>(mean[1])});
    }
  }

  if (stats) {
    stats->cg_iterations = solve_stats.iterations;
    stats->residual = solve_stats.residual;
    stats->isolated_pixels = sys.isolated_pixels.size();
  }
  return out;
}

}  // namespace flowfill
