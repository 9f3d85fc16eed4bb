#include "flowfill/edges.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include "flowfill/errors.hpp"

namespace flowfill {

namespace {

ScalarImage gaussian_blur(const ScalarImage& img, double sigma) {
  int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<float> kernel(2 * radius + 1);
  float sum = 0.f;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)));
    sum += kernel[i + radius];
  }
  for (float& k : kernel) k /= sum;

  auto reflect = [](int i, int n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return std::clamp(i, 0, n - 1);
  };

  ScalarImage tmp(img.width, img.height), out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      float acc = 0.f;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * img.at(reflect(x + i, img.width), y);
      tmp.at(x, y) = acc;
    }
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      float acc = 0.f;
      for (int i = -radius; i <= radius; ++i) acc += kernel[i + radius] * tmp.at(x, reflect(y + i, img.height));
      out.at(x, y) = acc;
    }
  return out;
}

}  // namespace

EdgeMap canny(const ScalarImage& magnitude, double sigma, double low, double high) {
  if (magnitude.width <= 0 || magnitude.height <= 0 || magnitude.data.empty())
    throw DataError("canny: empty raster");
  const int w = magnitude.width, h = magnitude.height;

  // A flat raster has no edges; without this, float rounding in the blur
  // produces ulp-level gradients that the relative thresholds then amplify.
  auto [lo_it, hi_it] = std::minmax_element(magnitude.data.begin(), magnitude.data.end());
  if (*hi_it - *lo_it <= 0.f) return EdgeMap(w, h);

  ScalarImage blurred = gaussian_blur(magnitude, sigma);

  // Sobel with reflected borders.
  auto reflect = [](int i, int n) { return i < 0 ? 1 : (i >= n ? n - 2 : i); };
  auto px = [&](int x, int y) { return blurred.at(std::clamp(reflect(x, w), 0, w - 1), std::clamp(reflect(y, h), 0, h - 1)); };
  ScalarImage mag(w, h);
  std::vector<float> gx(static_cast<size_t>(w) * h), gy(static_cast<size_t>(w) * h);
  float max_mag = 0.f;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float sx = -px(x - 1, y - 1) + px(x + 1, y - 1) - 2 * px(x - 1, y) + 2 * px(x + 1, y) -
                 px(x - 1, y + 1) + px(x + 1, y + 1);
      float sy = -px(x - 1, y - 1) - 2 * px(x, y - 1) - px(x + 1, y - 1) + px(x - 1, y + 1) +
                 2 * px(x, y + 1) + px(x + 1, y + 1);
      size_t i = static_cast<size_t>(y) * w + x;
      gx[i] = sx;
      gy[i] = sy;
      mag.at(x, y) = std::hypot(sx, sy);
      max_mag = std::max(max_mag, mag.at(x, y));
    }
  if (max_mag <= 0.f) return EdgeMap(w, h);
  const float tl = static_cast<float>(low) * max_mag;
  const float th = static_cast<float>(high) * max_mag;

  // Non-maximum suppression along the quantized gradient direction.
  EdgeMap strong(w, h), weak(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float m = mag.at(x, y);
      if (m < tl) continue;
      size_t i = static_cast<size_t>(y) * w + x;
      float angle = std::atan2(gy[i], gx[i]);
      float deg = angle * 180.f / static_cast<float>(M_PI);
      if (deg < 0) deg += 180.f;
      int dx1, dy1;
      if (deg < 22.5f || deg >= 157.5f) {
        dx1 = 1; dy1 = 0;
      } else if (deg < 67.5f) {
        dx1 = 1; dy1 = 1;
      } else if (deg < 112.5f) {
        dx1 = 0; dy1 = 1;
      } else {
        dx1 = -1; dy1 = 1;
      }
      auto m_at = [&](int xx, int yy) {
        return (xx >= 0 && xx < w && yy >= 0 && yy < h) ? mag.at(xx, yy) : 0.f;
      };
      if (m >= m_at(x + dx1, y + dy1) && m > m_at(x - dx1, y - dy1)) {
        if (m >= th)
          strong.at(x, y) = 1;
        else
          weak.at(x, y) = 1;
      }
    }

  // Hysteresis: keep weak pixels 8-connected to strong ones.
  EdgeMap out = strong;
  std::deque<std::pair<int, int>> q;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (strong.at(x, y)) q.emplace_back(x, y);
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop_front();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        int nx = x + dx, ny = y + dy;
        if (nx < 0 || nx >= w || ny < 0 || ny >= h) continue;
        if (weak.at(nx, ny) && !out.at(nx, ny)) {
          out.at(nx, ny) = 1;
          q.emplace_back(nx, ny);
        }
      }
  }
  return out;
}

EdgeMap suppress_hole_edges(const EdgeMap& edges, const MaskFrame& mask) {
  if (edges.width != mask.width || edges.height != mask.height)
    throw DataError("suppress_hole_edges: dimension mismatch");
  EdgeMap out = edges;
  for (int y = 0; y < edges.height; ++y)
    for (int x = 0; x < edges.width; ++x)
      if (mask.at(x, y)) out.at(x, y) = 0;
  return out;
}

namespace {

struct Endpoint {
  int x, y;
  float dx, dy;  // outgoing direction (away from its single neighbor)
};

int edge_neighbor_count(const EdgeMap& e, int x, int y, int* nx_out = nullptr, int* ny_out = nullptr) {
  int n = 0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      if (dx == 0 && dy == 0) continue;
      int nx = x + dx, ny = y + dy;
      if (nx < 0 || nx >= e.width || ny < 0 || ny >= e.height) continue;
      if (e.at(nx, ny)) {
        ++n;
        if (nx_out) {
          *nx_out = nx;
          *ny_out = ny;
        }
      }
    }
  return n;
}

bool near_mask_boundary(const MaskFrame& mask, int x, int y, int dist) {
  // Outside-the-mask pixel within `dist` of a masked pixel.
  for (int dy = -dist; dy <= dist; ++dy)
    for (int dx = -dist; dx <= dist; ++dx) {
      int nx = x + dx, ny = y + dy;
      if (!mask.in_bounds(nx, ny)) continue;
      if (mask.at(nx, ny)) return true;
    }
  return false;
}

}  // namespace

EdgeMap complete_edges(const EdgeMap& edges, const MaskFrame& mask, EdgeStrategy strategy,
                       const EdgeMap* external) {
  if (edges.width != mask.width || edges.height != mask.height)
    throw DataError("complete_edges: dimension mismatch");
  if (strategy == EdgeStrategy::kNone) return edges;

  if (strategy == EdgeStrategy::kExternal) {
    if (!external) throw DataError("complete_edges: external strategy without an external edge map");
    if (external->width != edges.width || external->height != edges.height)
      throw DataError("complete_edges: external edge map dimensions do not match");
    EdgeMap out = edges;
    for (int y = 0; y < edges.height; ++y)
      for (int x = 0; x < edges.width; ++x)
        if (mask.at(x, y) && external->at(x, y)) out.at(x, y) = 1;
    return out;
  }

  // kLink: connect mutually nearest compatible endpoints through the mask.
  std::vector<Endpoint> eps;
  for (int y = 0; y < edges.height; ++y)
    for (int x = 0; x < edges.width; ++x) {
      if (!edges.at(x, y) || mask.at(x, y)) continue;
      int nx = 0, ny = 0;
      if (edge_neighbor_count(edges, x, y, &nx, &ny) != 1) continue;
      if (!near_mask_boundary(mask, x, y, 2)) continue;
      float dx = static_cast<float>(x - nx), dy = static_cast<float>(y - ny);
      float n = std::hypot(dx, dy);
      eps.push_back({x, y, dx / n, dy / n});
    }

  struct Pair {
    int a, b;
    float dist;
  };
  std::vector<Pair> pairs;
  const float cos45 = std::cos(45.0f * static_cast<float>(M_PI) / 180.f);
  for (size_t i = 0; i < eps.size(); ++i)
    for (size_t j = i + 1; j < eps.size(); ++j) {
      float vx = static_cast<float>(eps[j].x - eps[i].x);
      float vy = static_cast<float>(eps[j].y - eps[i].y);
      float d = std::hypot(vx, vy);
      if (d <= 0.f) continue;
      // Each endpoint's outgoing direction must point toward the other within 45 degrees.
      if ((eps[i].dx * vx + eps[i].dy * vy) / d < cos45) continue;
      if ((eps[j].dx * -vx + eps[j].dy * -vy) / d < cos45) continue;
      pairs.push_back({static_cast<int>(i), static_cast<int>(j), d});
    }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    return std::tie(a.a, a.b) < std::tie(b.a, b.b);
  });

  EdgeMap out = edges;
  std::vector<char> used(eps.size(), 0);
  for (const Pair& p : pairs) {
    if (used[p.a] || used[p.b]) continue;
    used[p.a] = used[p.b] = 1;
    // Bresenham between the endpoints; only mask pixels are written.
    int x0 = eps[p.a].x, y0 = eps[p.a].y, x1 = eps[p.b].x, y1 = eps[p.b].y;
    int dx = std::abs(x1 - x0), dy = -std::abs(y1 - y0);
    int sx = x0 < x1 ? 1 : -1, sy = y0 < y1 ? 1 : -1;
    int err = dx + dy;
    int x = x0, y = y0;
    while (true) {
      if (mask.at(x, y)) out.at(x, y) = 1;
      if (x == x1 && y == y1) break;
      int e2 = 2 * err;
      if (e2 >= dy) {
        err += dy;
        x += sx;
      }
      if (e2 <= dx) {
        err += dx;
        y += sy;
      }
    }
  }
  return out;
}

}  // namespace flowfill
