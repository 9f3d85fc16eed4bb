#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

namespace flowfill {

struct Vec2 {
  float x = 0.f;
  float y = 0.f;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }

using Rgb = std::array<float, 3>;

// RGB frame, row-major, samples in [0,1].
struct Frame {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // width * height * 3

  Frame() = default;
  Frame(int w, int h, float fill = 0.f) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, fill) {}

  float& at(int x, int y, int c) { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  float at(int x, int y, int c) const { return data[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  Rgb rgb(int x, int y) const { return {at(x, y, 0), at(x, y, 1), at(x, y, 2)}; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Binary missing-pixel mask, true = missing.
struct MaskFrame {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // width * height

  MaskFrame() = default;
  MaskFrame(int w, int h, bool fill = false)
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill ? 1 : 0) {}

  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }

  size_t count() const {
    size_t n = 0;
    for (uint8_t v : data) n += (v != 0);
    return n;
  }
};

// Dense per-pixel displacement between two frames. Invalid flow is tracked by
// separate validity masks, never by NaN inside data.
struct FlowField {
  int width = 0;
  int height = 0;
  std::vector<float> data;  // width * height * 2, interleaved (u, v)
  int source_frame = -1;
  int target_frame = -1;

  FlowField() = default;
  FlowField(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 2, 0.f) {}

  Vec2 at(int x, int y) const {
    size_t i = (static_cast<size_t>(y) * width + x) * 2;
    return {data[i], data[i + 1]};
  }
  void set(int x, int y, Vec2 v) {
    size_t i = (static_cast<size_t>(y) * width + x) * 2;
    data[i] = v.x;
    data[i + 1] = v.y;
  }
  bool in_bounds(int x, int y) const { return x >= 0 && x < width && y >= 0 && y < height; }
};

// Forward-difference color gradients. gx at the last column and gy at the last
// row are defined as 0.
struct GradientField {
  int width = 0;
  int height = 0;
  std::vector<float> gx;  // width * height * 3
  std::vector<float> gy;

  GradientField() = default;
  GradientField(int w, int h)
      : width(w), height(h), gx(static_cast<size_t>(w) * h * 3, 0.f), gy(static_cast<size_t>(w) * h * 3, 0.f) {}

  float& gx_at(int x, int y, int c) { return gx[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  float gx_at(int x, int y, int c) const { return gx[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  float& gy_at(int x, int y, int c) { return gy[(static_cast<size_t>(y) * width + x) * 3 + c]; }
  float gy_at(int x, int y, int c) const { return gy[(static_cast<size_t>(y) * width + x) * 3 + c]; }
};

// Single-channel raster (flow magnitude, luminance, ...).
struct ScalarImage {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  ScalarImage() = default;
  ScalarImage(int w, int h, float fill = 0.f) : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  float& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  float at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
};

// Bilinear interpolation of the 4 surrounding samples. Returns nullopt when
// any tap falls outside [0, width-1] x [0, height-1].
std::optional<Vec2> bilinear_sample(const FlowField& field, float x, float y);
std::optional<Rgb> bilinear_sample(const Frame& frame, float x, float y);
std::optional<float> bilinear_sample(const ScalarImage& img, float x, float y);

// Samples gx and gy of all channels at once; nullopt on out-of-bounds taps.
struct GradientSample {
  Rgb gx;
  Rgb gy;
};
std::optional<GradientSample> bilinear_sample(const GradientField& grad, float x, float y);

// True iff all 4 bilinear taps at (x, y) are in bounds and known (mask false).
bool footprint_known(const MaskFrame& mask, float x, float y);

GradientField finite_diff(const Frame& frame);

// Euclidean-disk dilation.
MaskFrame dilate_mask(const MaskFrame& mask, int radius);

ScalarImage flow_magnitude(const FlowField& flow);

}  // namespace flowfill
