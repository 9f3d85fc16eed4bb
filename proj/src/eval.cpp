#include "flowfill/eval.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "flowfill/errors.hpp"
#include "flowfill/neighbors.hpp"

namespace flowfill {

std::optional<double> psnr(const Frame& a, const Frame& b, const MaskFrame& region) {
  if (a.width != b.width || a.height != b.height || region.width != a.width ||
      region.height != a.height)
    throw DataError("psnr: dimension mismatch");
  double se = 0.0;
  size_t n = 0;
  for (int y = 0; y < a.height; ++y)
    for (int x = 0; x < a.width; ++x) {
      if (!region.at(x, y)) continue;
      for (int c = 0; c < 3; ++c) {
        double d = a.at(x, y, c) - b.at(x, y, c);
        se += d * d;
      }
      n += 3;
    }
  if (n == 0) throw DataError("psnr: empty region");
  double mse = se / n;
  if (mse <= 0.0) return std::nullopt;
  return 10.0 * std::log10(1.0 / mse);
}

namespace {

// Separable Gaussian with truncated, renormalized windows at the borders.
void gaussian_11(const std::vector<double>& src, std::vector<double>& dst, int w, int h) {
  constexpr int kRadius = 5;
  static const std::vector<double> kKernel = [] {
    std::vector<double> k(2 * kRadius + 1);
    double sum = 0.0;
    for (int i = -kRadius; i <= kRadius; ++i) {
      k[i + kRadius] = std::exp(-0.5 * i * i / (1.5 * 1.5));
      sum += k[i + kRadius];
    }
    for (double& v : k) v /= sum;
    return k;
  }();
  std::vector<double> tmp(static_cast<size_t>(w) * h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, wsum = 0.0;
      for (int i = -kRadius; i <= kRadius; ++i) {
        int xx = x + i;
        if (xx < 0 || xx >= w) continue;
        acc += kKernel[i + kRadius] * src[static_cast<size_t>(y) * w + xx];
        wsum += kKernel[i + kRadius];
      }
      tmp[static_cast<size_t>(y) * w + x] = acc / wsum;
    }
  dst.assign(static_cast<size_t>(w) * h, 0.0);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double acc = 0.0, wsum = 0.0;
      for (int i = -kRadius; i <= kRadius; ++i) {
        int yy = y + i;
        if (yy < 0 || yy >= h) continue;
        acc += kKernel[i + kRadius] * tmp[static_cast<size_t>(yy) * w + x];
        wsum += kKernel[i + kRadius];
      }
      dst[static_cast<size_t>(y) * w + x] = acc / wsum;
    }
}

}  // namespace

double ssim(const Frame& a, const Frame& b) {
  if (a.width != b.width || a.height != b.height) throw DataError("ssim: dimension mismatch");
  if (std::min(a.width, a.height) < 11) throw DataError("ssim: image smaller than the 11x11 window");
  constexpr double kC1 = 0.01 * 0.01, kC2 = 0.03 * 0.03;
  const int w = a.width, h = a.height;
  const size_t n = static_cast<size_t>(w) * h;

  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<double> xa(n), xb(n), xaa(n), xbb(n), xab(n);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        size_t i = static_cast<size_t>(y) * w + x;
        xa[i] = a.at(x, y, c);
        xb[i] = b.at(x, y, c);
        xaa[i] = xa[i] * xa[i];
        xbb[i] = xb[i] * xb[i];
        xab[i] = xa[i] * xb[i];
      }
    std::vector<double> ma, mb, maa, mbb, mab;
    gaussian_11(xa, ma, w, h);
    gaussian_11(xb, mb, w, h);
    gaussian_11(xaa, maa, w, h);
    gaussian_11(xbb, mbb, w, h);
    gaussian_11(xab, mab, w, h);
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) {
      double va = maa[i] - ma[i] * ma[i];
      double vb = mbb[i] - mb[i] * mb[i];
      double cov = mab[i] - ma[i] * mb[i];
      double num = (2 * ma[i] * mb[i] + kC1) * (2 * cov + kC2);
      double den = (ma[i] * ma[i] + mb[i] * mb[i] + kC1) * (va + vb + kC2);
      acc += num / den;
    }
    total += acc / static_cast<double>(n);
  }
  return total / 3.0;
}

double flow_epe(const FlowField& f, const FlowField& g, const MaskFrame& region) {
  if (f.width != g.width || f.height != g.height || region.width != f.width ||
      region.height != f.height)
    throw DataError("flow_epe: dimension mismatch");
  double acc = 0.0;
  size_t n = 0;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x) {
      if (!region.at(x, y)) continue;
      Vec2 d = f.at(x, y) - g.at(x, y);
      acc += std::hypot(d.x, d.y);
      ++n;
    }
  if (n == 0) throw DataError("flow_epe: empty region");
  return acc / n;
}

MaskFrame grid_mask(int width, int height) {
  constexpr int kCols = 5, kRows = 4;
  MaskFrame m(width, height);
  int cell_w = width / kCols, cell_h = height / kRows;
  int side = std::min(cell_w, cell_h) / 3;
  for (int r = 0; r < kRows; ++r)
    for (int c = 0; c < kCols; ++c) {
      int cx = c * cell_w + cell_w / 2, cy = r * cell_h + cell_h / 2;
      for (int dy = 0; dy < side; ++dy)
        for (int dx = 0; dx < side; ++dx) {
          int x = cx - side / 2 + dx, y = cy - side / 2 + dy;
          if (m.in_bounds(x, y)) m.at(x, y) = 1;
        }
    }
  return m;
}

namespace {

// Band-limited seeded value noise in [-1, 1].
ScalarImage value_noise(int width, int height, int cell, int octaves, unsigned seed) {
  ScalarImage out(width, height, 0.f);
  std::mt19937 rng(seed);
  float amplitude = 1.f, total = 0.f;
  for (int o = 0; o < octaves; ++o) {
    int c = std::max(2, cell >> o);
    int gw = width / c + 2, gh = height / c + 2;
    std::vector<float> lattice(static_cast<size_t>(gw) * gh);
    std::uniform_real_distribution<float> dist(-1.f, 1.f);
    for (float& v : lattice) v = dist(rng);
    auto lat = [&](int gx, int gy) { return lattice[static_cast<size_t>(gy) * gw + gx]; };
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        float fx = static_cast<float>(x) / c, fy = static_cast<float>(y) / c;
        int gx = static_cast<int>(fx), gy = static_cast<int>(fy);
        float tx = fx - gx, ty = fy - gy;
        // smoothstep interpolation
        tx = tx * tx * (3.f - 2.f * tx);
        ty = ty * ty * (3.f - 2.f * ty);
        float a = lat(gx, gy) + (lat(gx + 1, gy) - lat(gx, gy)) * tx;
        float b = lat(gx, gy + 1) + (lat(gx + 1, gy + 1) - lat(gx, gy + 1)) * tx;
        out.at(x, y) += amplitude * (a + (b - a) * ty);
      }
    total += amplitude;
    amplitude *= 0.5f;
  }
  for (float& v : out.data) v /= total;
  return out;
}

Frame texture_frame(int width, int height, unsigned seed, float amplitude, float base = 0.45f,
                    int cell = 12) {
  Frame f(width, height);
  for (int c = 0; c < 3; ++c) {
    ScalarImage n = value_noise(width, height, cell, 3, seed + 101 * c);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        f.at(x, y, c) = std::clamp(base + amplitude * n.at(x, y), 0.02f, 0.98f);
  }
  return f;
}

std::vector<std::pair<int, int>> scene_pairs(int frame_count) {
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i + 1 < frame_count; ++i) {
    pairs.emplace_back(i, i + 1);
    pairs.emplace_back(i + 1, i);
  }
  for (int i = 0; i < frame_count; ++i)
    for (int a : default_anchors(frame_count)) {
      if (a == i || std::abs(a - i) == 1) continue;
      pairs.emplace_back(i, a);
      pairs.emplace_back(a, i);
    }
  return pairs;
}

FlowField constant_flow(int width, int height, float u, float v, int i, int j) {
  FlowField f(width, height);
  for (size_t k = 0; k < f.data.size(); k += 2) {
    f.data[k] = u;
    f.data[k + 1] = v;
  }
  f.source_frame = i;
  f.target_frame = j;
  return f;
}

void fill_visibility_translating(SyntheticScene& scene, int vx, int vy) {
  const int t_count = static_cast<int>(scene.frames.size());
  const int w = scene.frames[0].width, h = scene.frames[0].height;
  scene.visibility.assign(t_count, std::vector<MaskFrame>(t_count, MaskFrame(w, h)));
  for (int t = 0; t < t_count; ++t)
    for (int k = 0; k < t_count; ++k) {
      MaskFrame& vis = scene.visibility[t][k];
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          int qx = x + vx * (k - t), qy = y + vy * (k - t);
          vis.at(x, y) = vis.in_bounds(qx, qy) && !scene.masks[k].at(qx, qy);
        }
    }
}

SyntheticScene translating_scene(int width, int height, int frame_count, unsigned seed, int vx,
                                 float amplitude, bool gain_ramp,
                                 const std::vector<MaskFrame>& masks) {
  SyntheticScene scene;
  const int margin = std::abs(vx) * (frame_count - 1);
  Frame big = texture_frame(width + margin, height, seed, amplitude);
  for (int t = 0; t < frame_count; ++t) {
    float gain = gain_ramp ? 1.f + 0.01f * t : 1.f;
    Frame f(width, height);
    int off = vx >= 0 ? margin - vx * t : -vx * t;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        for (int c = 0; c < 3; ++c) f.at(x, y, c) = gain * big.at(x + off, y, c);
    scene.frames.push_back(f);
    scene.ground_truth_frames.push_back(std::move(f));
  }
  scene.masks = masks;
  for (auto [i, j] : scene_pairs(frame_count)) {
    scene.ground_truth_flows[{i, j}] =
        constant_flow(width, height, static_cast<float>(vx * (j - i)), 0.f, i, j);
    scene.ground_truth_edges[{i, j}] = EdgeMap(width, height);
  }
  fill_visibility_translating(scene, vx, 0);
  return scene;
}

SyntheticScene sweeping_occluder_scene(int width, int height, int frame_count, unsigned seed) {
  // Static textured background with a stationary block hole. Two fast
  // textured bars sweep left-to-right across the hole region, one early and
  // one late. Where a bar covers the hole it stays visible (nothing to fill
  // there), so temporal chains that try to cross a transit meet the bar's
  // large motion head-on and fail the consistency check, while the first and
  // last frames remain reachable in a single non-local hop.
  const int bar_width = std::max(8, width / 8);
  const int bar_speed = 8;  // > tau: meeting a bar kills a chain
  SyntheticScene scene;
  Frame bg = texture_frame(width, height, seed, 0.35f);
  // The bars match the background's brightness statistics; the barrier works
  // through their motion, not their appearance.
  Frame bar_tex = texture_frame(width, height, seed + 7, 0.35f, 0.45f, 6);

  const int side = std::min(width, height) / 4;
  const int hole_x0 = (width - side) / 2, hole_x1 = (width + side) / 2;
  const int hole_y0 = (height - side) / 2, hole_y1 = (height + side) / 2;

  // Bar A crosses the hole in the first third of the sequence, bar B in the
  // last third. Start offsets put each bar's leading edge at the hole's left
  // side at the target frame.
  const int ta = frame_count / 4;
  // B must fully clear the hole before the final frame so every hole pixel is
  // visible there.
  const int clear_frames = (side + bar_width + bar_speed - 1) / bar_speed;
  const int tb = std::min((3 * frame_count) / 4, frame_count - 1 - clear_frames);
  const int ax0 = hole_x0 - bar_width - bar_speed * ta;
  const int bx0 = hole_x0 - bar_width - bar_speed * tb;
  auto bar_left = [&](int x0, int t) { return x0 + bar_speed * t; };
  auto in_bar = [&](int t, int x) {
    int ra = x - bar_left(ax0, t);
    int rb = x - bar_left(bx0, t);
    return (ra >= 0 && ra < bar_width) || (rb >= 0 && rb < bar_width);
  };
  auto bar_rel = [&](int t, int x) {
    int ra = x - bar_left(ax0, t);
    if (ra >= 0 && ra < bar_width) return ra;
    return x - bar_left(bx0, t);
  };

  for (int t = 0; t < frame_count; ++t) {
    Frame f = bg;
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x)
        if (in_bar(t, x))
          for (int c = 0; c < 3; ++c) f.at(x, y, c) = bar_tex.at(bar_rel(t, x), y, c);
    scene.frames.push_back(f);
    scene.ground_truth_frames.push_back(std::move(f));
  }

  // The hole is masked in all interior frames except where a bar covers it;
  // the bars are foreground and stay in place.
  scene.masks.assign(frame_count, MaskFrame(width, height));
  for (int t = 1; t + 1 < frame_count; ++t)
    for (int y = hole_y0; y < hole_y1; ++y)
      for (int x = hole_x0; x < hole_x1; ++x)
        if (!in_bar(t, x)) scene.masks[t].at(x, y) = 1;

  for (auto [i, j] : scene_pairs(frame_count)) {
    FlowField flow(width, height);
    EdgeMap edges(width, height);
    float disp = static_cast<float>(bar_speed * (j - i));
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        if (in_bar(i, x)) {
          flow.set(x, y, {disp, 0.f});
        } else if ((x + 1 < width && in_bar(i, x + 1)) || (x > 0 && in_bar(i, x - 1))) {
          // Flow edges sit on the background side of each bar boundary, the
          // same side the detector marks.
          edges.at(x, y) = 1;
        }
      }
    flow.source_frame = i;
    flow.target_frame = j;
    scene.ground_truth_flows[{i, j}] = std::move(flow);
    scene.ground_truth_edges[{i, j}] = std::move(edges);
  }

  // True content of a background pixel is visible wherever no bar or mask
  // covers its (static) position; bar content travels with the bar.
  const int t_count = frame_count;
  scene.visibility.assign(t_count, std::vector<MaskFrame>(t_count, MaskFrame(width, height)));
  for (int t = 0; t < t_count; ++t)
    for (int k = 0; k < t_count; ++k) {
      MaskFrame& vis = scene.visibility[t][k];
      for (int y = 0; y < height; ++y)
        for (int x = 0; x < width; ++x) {
          if (in_bar(t, x)) {
            int qx = x + bar_speed * (k - t);
            vis.at(x, y) = qx >= 0 && qx < width && in_bar(k, qx) && !scene.masks[k].at(qx, y);
          } else {
            vis.at(x, y) = !in_bar(k, x) && !scene.masks[k].at(x, y);
          }
        }
    }
  return scene;
}

SyntheticScene two_region_scene(int width, int height, int frame_count, unsigned seed) {
  // Flow-completion testbed: piecewise-constant flow split by a vertical
  // motion boundary, with a hole straddling it.
  SyntheticScene scene;
  Frame tex = texture_frame(width, height, seed, 0.35f);
  const int split = width / 2;
  const int side = std::min(width, height) / 3;
  MaskFrame hole(width, height);
  for (int y = (height - side) / 2; y < (height + side) / 2; ++y)
    for (int x = split - side / 2; x < split + side / 2; ++x)
      if (hole.in_bounds(x, y)) hole.at(x, y) = 1;

  for (int t = 0; t < frame_count; ++t) {
    scene.frames.push_back(tex);
    scene.ground_truth_frames.push_back(tex);
    scene.masks.push_back(hole);
  }
  for (auto [i, j] : scene_pairs(frame_count)) {
    FlowField flow(width, height);
    EdgeMap edges(width, height);
    for (int y = 0; y < height; ++y)
      for (int x = 0; x < width; ++x) {
        if (x < split) flow.set(x, y, {10.f * (j > i ? 1.f : -1.f), 0.f});
        if (x == split) edges.at(x, y) = 1;
      }
    flow.source_frame = i;
    flow.target_frame = j;
    scene.ground_truth_flows[{i, j}] = std::move(flow);
    scene.ground_truth_edges[{i, j}] = std::move(edges);
  }
  fill_visibility_translating(scene, 0, 0);
  return scene;
}

}  // namespace

SyntheticScene synth_scene(const std::string& name, int width, int height, int frame_count,
                           unsigned seed) {
  if (width < 32 || height < 32) throw DataError("synth_scene: size must be at least 32x32");
  if (frame_count < 3) throw DataError("synth_scene: need at least 3 frames");

  if (name == "translating_texture") {
    return translating_scene(width, height, frame_count, seed, 2, 0.4f, false,
                             std::vector<MaskFrame>(frame_count, grid_mask(width, height)));
  }
  if (name == "brightness_ramp") {
    // Gentle texture so gradient-domain errors stay within quantization.
    return translating_scene(width, height, frame_count, seed, 2, 0.03f, true,
                             std::vector<MaskFrame>(frame_count, grid_mask(width, height)));
  }
  if (name == "grid_mask") {
    return translating_scene(width, height, frame_count, seed, 0, 0.4f, false,
                             std::vector<MaskFrame>(frame_count, grid_mask(width, height)));
  }
  if (name == "static_hole") {
    const int side = std::min(width, height) / 3;
    MaskFrame hole(width, height);
    for (int y = (height - side) / 2; y < (height + side) / 2; ++y)
      for (int x = (width - side) / 2; x < (width + side) / 2; ++x) hole.at(x, y) = 1;
    std::vector<MaskFrame> masks(frame_count, MaskFrame(width, height));
    for (int t = frame_count / 3; t < 2 * frame_count / 3; ++t) masks[t] = hole;
    return translating_scene(width, height, frame_count, seed, 0, 0.4f, false, masks);
  }
  if (name == "two_region_flow") return two_region_scene(width, height, frame_count, seed);
  if (name == "sweeping_occluder") return sweeping_occluder_scene(width, height, frame_count, seed);
  throw DataError("synth_scene: unknown scene name: " + name);
}

}  // namespace flowfill
