#include "flowfill/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <deque>
#include <numeric>

#include "flowfill/errors.hpp"

namespace flowfill {

namespace {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

constexpr int kDx[2] = {1, 0};
constexpr int kDy[2] = {0, 1};

}  // namespace

SparseSystem assemble_grid_system(const GridProblem& p) {
  const int w = p.width, h = p.height;
  const MaskFrame& unk = *p.unknowns;

  auto is_unknown = [&](int x, int y) { return unk.at(x, y) != 0; };
  auto is_excluded = [&](int x, int y) { return p.excluded && p.excluded->at(x, y) != 0; };

  // Provisional indices over all unknown pixels.
  std::vector<int> prov(static_cast<size_t>(w) * h, -1);
  std::vector<std::pair<int, int>> unknown_pixels;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (is_unknown(x, y)) {
        prov[static_cast<size_t>(y) * w + x] = static_cast<int>(unknown_pixels.size());
        unknown_pixels.emplace_back(x, y);
      }
  const int n_all = static_cast<int>(unknown_pixels.size());

  auto term_kept = [&](int x, int y, int dir, int& nx, int& ny) {
    nx = x + kDx[dir];
    ny = y + kDy[dir];
    if (nx >= w || ny >= h) return false;
    bool ua = is_unknown(x, y), ub = is_unknown(nx, ny);
    if (!ua && !ub) return false;
    if (is_excluded(x, y) || is_excluded(nx, ny)) return false;
    if (p.keep_term && !p.keep_term(GridTerm{x, y, dir})) return false;
    return true;
  };

  // Connectivity + anchoring pass.
  UnionFind uf(n_all);
  std::vector<char> anchored(n_all, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int dir = 0; dir < 2; ++dir) {
        int nx, ny;
        if (!term_kept(x, y, dir, nx, ny)) continue;
        int ia = prov[static_cast<size_t>(y) * w + x];
        int ib = prov[static_cast<size_t>(ny) * w + nx];
        if (ia >= 0 && ib >= 0)
          uf.unite(ia, ib);
        else if (ia >= 0)
          anchored[ia] = 1;
        else
          anchored[ib] = 1;
      }
    }
  }
  std::vector<char> comp_anchored(n_all, 0);
  for (int i = 0; i < n_all; ++i)
    if (anchored[i]) comp_anchored[uf.find(i)] = 1;

  SparseSystem sys;
  sys.unknown_index.assign(static_cast<size_t>(w) * h, -1);
  for (int i = 0; i < n_all; ++i) {
    auto [x, y] = unknown_pixels[i];
    if (comp_anchored[uf.find(i)]) {
      sys.unknown_index[static_cast<size_t>(y) * w + x] = static_cast<int>(sys.unknown_pixels.size());
      sys.unknown_pixels.emplace_back(x, y);
    } else {
      sys.isolated_pixels.emplace_back(x, y);
    }
  }
  const int n = static_cast<int>(sys.unknown_pixels.size());
  const int ch = p.channels;

  std::vector<Eigen::Triplet<double>> trips;
  sys.rhs = Eigen::MatrixXd::Zero(n, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int dir = 0; dir < 2; ++dir) {
        int nx, ny;
        if (!term_kept(x, y, dir, nx, ny)) continue;
        int ia = sys.unknown_index[static_cast<size_t>(y) * w + x];
        int ib = sys.unknown_index[static_cast<size_t>(ny) * w + nx];
        if (ia < 0 && ib < 0) continue;  // both ended up isolated
        GridTerm term{x, y, dir};
        if (ia >= 0 && ib >= 0) {
          trips.emplace_back(ia, ia, 1.0);
          trips.emplace_back(ib, ib, 1.0);
          trips.emplace_back(ia, ib, -1.0);
          trips.emplace_back(ib, ia, -1.0);
          for (int c = 0; c < ch; ++c) {
            double t = p.target ? p.target(term, c) : 0.0;
            sys.rhs(ia, c) -= t;
            sys.rhs(ib, c) += t;
          }
        } else if (ia >= 0) {  // neighbor known
          trips.emplace_back(ia, ia, 1.0);
          for (int c = 0; c < ch; ++c) {
            double t = p.target ? p.target(term, c) : 0.0;
            sys.rhs(ia, c) += p.known_value(nx, ny, c) - t;
          }
        } else {  // base known
          trips.emplace_back(ib, ib, 1.0);
          for (int c = 0; c < ch; ++c) {
            double t = p.target ? p.target(term, c) : 0.0;
            sys.rhs(ib, c) += p.known_value(x, y, c) + t;
          }
        }
      }
    }
  }
  sys.matrix.resize(n, n);
  sys.matrix.setFromTriplets(trips.begin(), trips.end());
  return sys;
}

Eigen::MatrixXd solve_cg(const SparseSystem& system, double tolerance, int max_iterations,
                         SolveStats* stats) {
  const int n = static_cast<int>(system.unknown_pixels.size());
  Eigen::MatrixXd out(n, system.rhs.cols());
  if (n == 0) return out;

  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                           Eigen::DiagonalPreconditioner<double>>
      cg;
  cg.setTolerance(tolerance);
  cg.setMaxIterations(max_iterations);
  cg.compute(system.matrix);
  for (int c = 0; c < system.rhs.cols(); ++c) {
    out.col(c) = cg.solve(system.rhs.col(c));
    if (cg.info() != Eigen::Success) {
      throw NumericalError("conjugate gradient did not converge: residual " +
                           std::to_string(cg.error()) + " after " + std::to_string(cg.iterations()) +
                           " iterations");
    }
    if (stats) {
      stats->iterations = std::max(stats->iterations, static_cast<int>(cg.iterations()));
      stats->residual = std::max(stats->residual, cg.error());
    }
  }
  return out;
}

std::vector<double> nearest_known_mean(const std::vector<std::pair<int, int>>& region, int width,
                                       int height, const MaskFrame& unknowns,
                                       const std::function<double(int, int, int)>& known_value,
                                       int channels) {
  std::vector<char> visited(static_cast<size_t>(width) * height, 0);
  std::deque<std::pair<int, int>> frontier;
  for (auto [x, y] : region) {
    visited[static_cast<size_t>(y) * width + x] = 1;
    frontier.emplace_back(x, y);
  }
  std::vector<double> acc(channels, 0.0);
  while (!frontier.empty()) {
    std::deque<std::pair<int, int>> next;
    int found = 0;
    for (auto [x, y] : frontier) {
      const int dx[4] = {1, -1, 0, 0}, dy[4] = {0, 0, 1, -1};
      for (int k = 0; k < 4; ++k) {
        int nx = x + dx[k], ny = y + dy[k];
        if (nx < 0 || nx >= width || ny < 0 || ny >= height) continue;
        size_t idx = static_cast<size_t>(ny) * width + nx;
        if (visited[idx]) continue;
        visited[idx] = 1;
        if (!unknowns.at(nx, ny)) {
          ++found;
          for (int c = 0; c < channels; ++c) acc[c] += known_value(nx, ny, c);
        } else {
          next.emplace_back(nx, ny);
        }
      }
    }
    if (found > 0) {
      for (double& v : acc) v /= found;
      return acc;
    }
    frontier = std::move(next);
  }
  return std::vector<double>(channels, 0.0);  // no known pixel anywhere
}

}  // namespace flowfill
