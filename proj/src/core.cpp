#include "flowfill/core.hpp"

#include <algorithm>
#include <cmath>

namespace flowfill {

namespace {

struct Taps {
  int x0, y0, x1, y1;
  float fx, fy;
};

inline std::optional<Taps> taps_for(int width, int height, float x, float y) {
  if (!(x >= 0.f && y >= 0.f && x <= width - 1 && y <= height - 1)) return std::nullopt;
  Taps t;
  t.x0 = static_cast<int>(std::floor(x));
  t.y0 = static_cast<int>(std::floor(y));
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.fx = x - t.x0;
  t.fy = y - t.y0;
  return t;
}

inline float lerp2(float v00, float v10, float v01, float v11, float fx, float fy) {
  float a = v00 + (v10 - v00) * fx;
  float b = v01 + (v11 - v01) * fx;
  return a + (b - a) * fy;
}

}  // namespace

std::optional<Vec2> bilinear_sample(const FlowField& field, float x, float y) {
  auto t = taps_for(field.width, field.height, x, y);
  if (!t) return std::nullopt;
  Vec2 v00 = field.at(t->x0, t->y0), v10 = field.at(t->x1, t->y0);
  Vec2 v01 = field.at(t->x0, t->y1), v11 = field.at(t->x1, t->y1);
  return Vec2{lerp2(v00.x, v10.x, v01.x, v11.x, t->fx, t->fy),
              lerp2(v00.y, v10.y, v01.y, v11.y, t->fx, t->fy)};
}

std::optional<Rgb> bilinear_sample(const Frame& frame, float x, float y) {
  auto t = taps_for(frame.width, frame.height, x, y);
  if (!t) return std::nullopt;
  Rgb out;
  for (int c = 0; c < 3; ++c) {
    out[c] = lerp2(frame.at(t->x0, t->y0, c), frame.at(t->x1, t->y0, c), frame.at(t->x0, t->y1, c),
                   frame.at(t->x1, t->y1, c), t->fx, t->fy);
  }
  return out;
}

std::optional<float> bilinear_sample(const ScalarImage& img, float x, float y) {
  auto t = taps_for(img.width, img.height, x, y);
  if (!t) return std::nullopt;
  return lerp2(img.at(t->x0, t->y0), img.at(t->x1, t->y0), img.at(t->x0, t->y1), img.at(t->x1, t->y1),
               t->fx, t->fy);
}

std::optional<GradientSample> bilinear_sample(const GradientField& grad, float x, float y) {
  auto t = taps_for(grad.width, grad.height, x, y);
  if (!t) return std::nullopt;
  GradientSample out;
  for (int c = 0; c < 3; ++c) {
    out.gx[c] = lerp2(grad.gx_at(t->x0, t->y0, c), grad.gx_at(t->x1, t->y0, c), grad.gx_at(t->x0, t->y1, c),
                      grad.gx_at(t->x1, t->y1, c), t->fx, t->fy);
    out.gy[c] = lerp2(grad.gy_at(t->x0, t->y0, c), grad.gy_at(t->x1, t->y0, c), grad.gy_at(t->x0, t->y1, c),
                      grad.gy_at(t->x1, t->y1, c), t->fx, t->fy);
  }
  return out;
}

bool footprint_known(const MaskFrame& mask, float x, float y) {
  auto t = taps_for(mask.width, mask.height, x, y);
  if (!t) return false;
  return !mask.at(t->x0, t->y0) && !mask.at(t->x1, t->y0) && !mask.at(t->x0, t->y1) &&
         !mask.at(t->x1, t->y1);
}

GradientField finite_diff(const Frame& frame) {
  GradientField g(frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y) {
    for (int x = 0; x < frame.width; ++x) {
      for (int c = 0; c < 3; ++c) {
        if (x + 1 < frame.width) g.gx_at(x, y, c) = frame.at(x + 1, y, c) - frame.at(x, y, c);
        if (y + 1 < frame.height) g.gy_at(x, y, c) = frame.at(x, y + 1, c) - frame.at(x, y, c);
      }
    }
  }
  return g;
}

MaskFrame dilate_mask(const MaskFrame& mask, int radius) {
  if (radius <= 0) return mask;
  // Precompute disk offsets once.
  std::vector<std::pair<int, int>> disk;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx)
      if (dx * dx + dy * dy <= radius * radius) disk.emplace_back(dx, dy);

  MaskFrame out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(x, y)) continue;
      for (auto [dx, dy] : disk) {
        int nx = x + dx, ny = y + dy;
        if (mask.in_bounds(nx, ny)) out.at(nx, ny) = 1;
      }
    }
  }
  return out;
}

ScalarImage flow_magnitude(const FlowField& flow) {
  ScalarImage out(flow.width, flow.height);
  for (int y = 0; y < flow.height; ++y) {
    for (int x = 0; x < flow.width; ++x) {
      Vec2 v = flow.at(x, y);
      out.at(x, y) = std::hypot(v.x, v.y);
    }
  }
  return out;
}

}  // namespace flowfill
