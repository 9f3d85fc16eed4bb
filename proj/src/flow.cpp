#include "flowfill/flow.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>

#include "flowfill/errors.hpp"
#include "flowfill/io.hpp"

namespace flowfill {

ScalarImage to_gray(const Frame& frame) {
  ScalarImage g(frame.width, frame.height);
  for (int y = 0; y < frame.height; ++y)
    for (int x = 0; x < frame.width; ++x)
      g.at(x, y) = 0.299f * frame.at(x, y, 0) + 0.587f * frame.at(x, y, 1) + 0.114f * frame.at(x, y, 2);
  return g;
}

namespace {

ScalarImage downsample2(const ScalarImage& img) {
  // 5-tap binomial then decimate.
  static const float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
  auto reflect = [](int i, int n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return std::clamp(i, 0, n - 1);
  };
  ScalarImage tmp(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      float acc = 0.f;
      for (int i = -2; i <= 2; ++i) acc += k[i + 2] * img.at(reflect(x + i, img.width), y);
      tmp.at(x, y) = acc;
    }
  ScalarImage blurred(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      float acc = 0.f;
      for (int i = -2; i <= 2; ++i) acc += k[i + 2] * tmp.at(x, reflect(y + i, img.height));
      blurred.at(x, y) = acc;
    }
  ScalarImage out((img.width + 1) / 2, (img.height + 1) / 2);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) out.at(x, y) = blurred.at(std::min(2 * x, img.width - 1), std::min(2 * y, img.height - 1));
  return out;
}

ScalarImage box_sum(const ScalarImage& img, int radius) {
  // Truncated box sums via per-row / per-column prefix sums.
  const int w = img.width, h = img.height;
  ScalarImage tmp(w, h), out(w, h);
  std::vector<float> prefix(std::max(w, h) + 1);
  for (int y = 0; y < h; ++y) {
    prefix[0] = 0.f;
    for (int x = 0; x < w; ++x) prefix[x + 1] = prefix[x] + img.at(x, y);
    for (int x = 0; x < w; ++x) {
      int lo = std::max(0, x - radius), hi = std::min(w - 1, x + radius);
      tmp.at(x, y) = prefix[hi + 1] - prefix[lo];
    }
  }
  for (int x = 0; x < w; ++x) {
    prefix[0] = 0.f;
    for (int y = 0; y < h; ++y) prefix[y + 1] = prefix[y] + tmp.at(x, y);
    for (int y = 0; y < h; ++y) {
      int lo = std::max(0, y - radius), hi = std::min(h - 1, y + radius);
      out.at(x, y) = prefix[hi + 1] - prefix[lo];
    }
  }
  return out;
}

void median_filter_flow(FlowField& flow) {
  // 3x3 component-wise median, a standard outlier cleanup between LK sweeps.
  const int w = flow.width, h = flow.height;
  FlowField src = flow;
  float u[9], v[9];
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy)
        for (int dx = -1; dx <= 1; ++dx) {
          int xx = x + dx, yy = y + dy;
          if (xx < 0 || xx >= w || yy < 0 || yy >= h) continue;
          Vec2 f = src.at(xx, yy);
          u[n] = f.x;
          v[n] = f.y;
          ++n;
        }
      std::nth_element(u, u + n / 2, u + n);
      std::nth_element(v, v + n / 2, v + n);
      flow.set(x, y, {u[n / 2], v[n / 2]});
    }
}

void lk_refine(const ScalarImage& a, const ScalarImage& b, FlowField& flow,
               const LucasKanadeConfig& cfg) {
  const int w = a.width, h = a.height;
  ScalarImage warped(w, h);
  ScalarImage pxx(w, h), pxy(w, h), pyy(w, h), pxt(w, h), pyt(w, h);
  for (int iter = 0; iter < cfg.iterations_per_level; ++iter) {
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        Vec2 f = flow.at(x, y);
        auto s = bilinear_sample(b, x + f.x, y + f.y);
        warped.at(x, y) = s ? *s : a.at(x, y);
      }
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        auto avg = [&](int xx, int yy) {
          xx = std::clamp(xx, 0, w - 1);
          yy = std::clamp(yy, 0, h - 1);
          return 0.5f * (a.at(xx, yy) + warped.at(xx, yy));
        };
        float ix = 0.5f * (avg(x + 1, y) - avg(x - 1, y));
        float iy = 0.5f * (avg(x, y + 1) - avg(x, y - 1));
        float it = warped.at(x, y) - a.at(x, y);
        pxx.at(x, y) = ix * ix;
        pxy.at(x, y) = ix * iy;
        pyy.at(x, y) = iy * iy;
        pxt.at(x, y) = ix * it;
        pyt.at(x, y) = iy * it;
      }
    const int r = cfg.window_radius;
    ScalarImage sxx = box_sum(pxx, r), sxy = box_sum(pxy, r), syy = box_sum(pyy, r),
                sxt = box_sum(pxt, r), syt = box_sum(pyt, r);
    const float lam = cfg.regularization * static_cast<float>((2 * r + 1) * (2 * r + 1));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        float axx = sxx.at(x, y) + lam, ayy = syy.at(x, y) + lam, axy = sxy.at(x, y);
        float det = axx * ayy - axy * axy;
        if (det <= 1e-12f) continue;
        float bx = -sxt.at(x, y), by = -syt.at(x, y);
        float du = (ayy * bx - axy * by) / det;
        float dv = (axx * by - axy * bx) / det;
        du = std::clamp(du, -4.f, 4.f);
        dv = std::clamp(dv, -4.f, 4.f);
        Vec2 f = flow.at(x, y);
        flow.set(x, y, {f.x + du, f.y + dv});
      }
    median_filter_flow(flow);
  }
}

FlowField upsample_flow(const FlowField& coarse, int width, int height) {
  FlowField out(width, height);
  const float sx = static_cast<float>(coarse.width) / width;
  const float sy = static_cast<float>(coarse.height) / height;
  const float rx = static_cast<float>(width) / coarse.width;
  const float ry = static_cast<float>(height) / coarse.height;
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      float cx = std::min((x + 0.5f) * sx - 0.5f, coarse.width - 1.f);
      float cy = std::min((y + 0.5f) * sy - 0.5f, coarse.height - 1.f);
      auto v = bilinear_sample(coarse, std::max(cx, 0.f), std::max(cy, 0.f));
      out.set(x, y, {v->x * rx, v->y * ry});
    }
  return out;
}

}  // namespace

FlowField PyramidalLKEstimator::estimate(const Frame& frame_i, const Frame& frame_j, int i,
                                         int j) const {
  if (frame_i.width != frame_j.width || frame_i.height != frame_j.height)
    throw DataError("flow estimation: frame dimensions differ");
  std::vector<ScalarImage> pyr_a{to_gray(frame_i)}, pyr_b{to_gray(frame_j)};
  while (static_cast<int>(pyr_a.size()) < config_.max_levels) {
    const ScalarImage& top = pyr_a.back();
    if (std::min(top.width, top.height) / 2 < config_.min_level_size) break;
    pyr_a.push_back(downsample2(pyr_a.back()));
    pyr_b.push_back(downsample2(pyr_b.back()));
  }

  FlowField flow(pyr_a.back().width, pyr_a.back().height);
  for (int level = static_cast<int>(pyr_a.size()) - 1; level >= 0; --level) {
    if (flow.width != pyr_a[level].width || flow.height != pyr_a[level].height)
      flow = upsample_flow(flow, pyr_a[level].width, pyr_a[level].height);
    lk_refine(pyr_a[level], pyr_b[level], flow, config_);
  }
  flow.source_frame = i;
  flow.target_frame = j;
  return flow;
}

FlowField FileFlowEstimator::estimate(const Frame& frame_i, const Frame& frame_j, int i,
                                      int j) const {
  std::string path = flow_pair_path(directory_, i, j);
  FlowField f;
  try {
    f = read_flo(path);
  } catch (const DataError& e) {
    throw DataError("file-backed flow estimator: missing or invalid field for pair (" +
                    std::to_string(i) + ", " + std::to_string(j) + "): " + e.what());
  }
  if (f.width != frame_i.width || f.height != frame_i.height)
    throw DataError("file-backed flow field " + path + " has wrong dimensions");
  f.source_frame = i;
  f.target_frame = j;
  return f;
}

FlowField MapFlowEstimator::estimate(const Frame&, const Frame&, int i, int j) const {
  auto it = fields_.find({i, j});
  if (it == fields_.end())
    throw DataError("no flow field for pair (" + std::to_string(i) + ", " + std::to_string(j) + ")");
  FlowField f = it->second;
  f.source_frame = i;
  f.target_frame = j;
  return f;
}

FlowField estimate_flow_adjacent(const FlowEstimator& estimator, const Frame& frame_i,
                                 const Frame& frame_j, int i, int j) {
  if (frame_i.width != frame_j.width || frame_i.height != frame_j.height)
    throw DataError("estimate_flow_adjacent: frame dimensions differ");
  return estimator.estimate(frame_i, frame_j, i, j);
}

Homography Homography::inverse() const {
  Eigen::Matrix3d mat;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) mat(r, c) = m[r * 3 + c];
  Eigen::Matrix3d inv = mat.inverse();
  Homography out;
  double scale = inv(2, 2) != 0.0 ? inv(2, 2) : 1.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.m[r * 3 + c] = inv(r, c) / scale;
  return out;
}

namespace {

struct Corner {
  int x, y;
  float response;
};

ScalarImage blur3(const ScalarImage& img, double sigma) {
  // Small local Gaussian used for the structure tensor.
  int radius = std::max(1, static_cast<int>(std::ceil(2.0 * sigma)));
  std::vector<float> k(2 * radius + 1);
  float sum = 0.f;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = static_cast<float>(std::exp(-0.5 * i * i / (sigma * sigma)));
    sum += k[i + radius];
  }
  for (float& v : k) v /= sum;
  auto reflect = [](int i, int n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * n - 2 - i;
    return std::clamp(i, 0, n - 1);
  };
  ScalarImage tmp(img.width, img.height), out(img.width, img.height);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      float acc = 0.f;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * img.at(reflect(x + i, img.width), y);
      tmp.at(x, y) = acc;
    }
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      float acc = 0.f;
      for (int i = -radius; i <= radius; ++i) acc += k[i + radius] * tmp.at(x, reflect(y + i, img.height));
      out.at(x, y) = acc;
    }
  return out;
}

std::vector<Corner> harris_corners(const ScalarImage& gray, const HomographyConfig& cfg) {
  const int w = gray.width, h = gray.height;
  ScalarImage ix(w, h), iy(w, h);
  auto px = [&](int x, int y) { return gray.at(std::clamp(x, 0, w - 1), std::clamp(y, 0, h - 1)); };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      ix.at(x, y) = 0.5f * (px(x + 1, y) - px(x - 1, y));
      iy.at(x, y) = 0.5f * (px(x, y + 1) - px(x, y - 1));
    }
  ScalarImage xx(w, h), xy(w, h), yy(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      xx.at(x, y) = ix.at(x, y) * ix.at(x, y);
      xy.at(x, y) = ix.at(x, y) * iy.at(x, y);
      yy.at(x, y) = iy.at(x, y) * iy.at(x, y);
    }
  xx = blur3(xx, 2.0);
  xy = blur3(xy, 2.0);
  yy = blur3(yy, 2.0);
  ScalarImage r(w, h);
  float rmax = 0.f;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      float det = xx.at(x, y) * yy.at(x, y) - xy.at(x, y) * xy.at(x, y);
      float tr = xx.at(x, y) + yy.at(x, y);
      r.at(x, y) = det - 0.06f * tr * tr;
      rmax = std::max(rmax, r.at(x, y));
    }
  std::vector<Corner> corners;
  if (rmax <= 0.f) return corners;
  const float thresh = 0.005f * rmax;
  const int margin = cfg.patch_radius + 1;
  for (int y = margin; y < h - margin; ++y)
    for (int x = margin; x < w - margin; ++x) {
      float v = r.at(x, y);
      if (v < thresh) continue;
      bool is_max = true;
      for (int dy = -2; dy <= 2 && is_max; ++dy)
        for (int dx = -2; dx <= 2; ++dx) {
          if (r.at(std::clamp(x + dx, 0, w - 1), std::clamp(y + dy, 0, h - 1)) > v) {
            is_max = false;
            break;
          }
        }
      if (is_max) corners.push_back({x, y, v});
    }
  std::sort(corners.begin(), corners.end(), [](const Corner& a, const Corner& b) {
    if (a.response != b.response) return a.response > b.response;
    return std::tie(a.y, a.x) < std::tie(b.y, b.x);
  });
  if (static_cast<int>(corners.size()) > cfg.max_features) corners.resize(cfg.max_features);
  return corners;
}

std::vector<float> patch_descriptor(const ScalarImage& gray, int cx, int cy, int radius) {
  std::vector<float> d;
  d.reserve((2 * radius + 1) * (2 * radius + 1));
  float mean = 0.f;
  for (int dy = -radius; dy <= radius; ++dy)
    for (int dx = -radius; dx <= radius; ++dx) {
      d.push_back(gray.at(cx + dx, cy + dy));
      mean += d.back();
    }
  mean /= d.size();
  float norm = 0.f;
  for (float& v : d) {
    v -= mean;
    norm += v * v;
  }
  norm = std::sqrt(std::max(norm, 1e-12f));
  for (float& v : d) v /= norm;
  return d;
}

Homography fit_homography_dlt(const std::vector<std::pair<Vec2, Vec2>>& pairs) {
  // Hartley-normalized DLT.
  auto normalize = [](const std::vector<Vec2>& pts, Eigen::Matrix3d& t) {
    double mx = 0, my = 0;
    for (const Vec2& p : pts) {
      mx += p.x;
      my += p.y;
    }
    mx /= pts.size();
    my /= pts.size();
    double dist = 0;
    for (const Vec2& p : pts) dist += std::hypot(p.x - mx, p.y - my);
    dist /= pts.size();
    double s = dist > 1e-9 ? std::sqrt(2.0) / dist : 1.0;
    t << s, 0, -s * mx, 0, s, -s * my, 0, 0, 1;
  };
  std::vector<Vec2> src, dst;
  for (const auto& [a, b] : pairs) {
    src.push_back(a);
    dst.push_back(b);
  }
  Eigen::Matrix3d ts, td;
  normalize(src, ts);
  normalize(dst, td);

  Eigen::MatrixXd a(2 * pairs.size(), 9);
  for (size_t k = 0; k < pairs.size(); ++k) {
    double x = ts(0, 0) * src[k].x + ts(0, 2);
    double y = ts(1, 1) * src[k].y + ts(1, 2);
    double u = td(0, 0) * dst[k].x + td(0, 2);
    double v = td(1, 1) * dst[k].y + td(1, 2);
    a.row(2 * k) << -x, -y, -1, 0, 0, 0, u * x, u * y, u;
    a.row(2 * k + 1) << 0, 0, 0, -x, -y, -1, v * x, v * y, v;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  Eigen::VectorXd hv = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << hv(0), hv(1), hv(2), hv(3), hv(4), hv(5), hv(6), hv(7), hv(8);
  Eigen::Matrix3d hm = td.inverse() * hn * ts;
  if (std::abs(hm.determinant()) < 1e-12) throw DegenerateAlignment("homography fit is singular");
  Homography out;
  double scale = hm(2, 2) != 0.0 ? hm(2, 2) : 1.0;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.m[r * 3 + c] = hm(r, c) / scale;
  return out;
}

}  // namespace

Homography estimate_homography(const Frame& frame_i, const Frame& frame_j,
                               const HomographyConfig& cfg) {
  if (frame_i.width != frame_j.width || frame_i.height != frame_j.height)
    throw DataError("estimate_homography: frame dimensions differ");
  ScalarImage ga = to_gray(frame_i), gb = to_gray(frame_j);
  std::vector<Corner> ca = harris_corners(ga, cfg), cb = harris_corners(gb, cfg);
  if (ca.size() < 4 || cb.size() < 4)
    throw DegenerateAlignment("not enough corner features for alignment");

  std::vector<std::vector<float>> da, db;
  for (const Corner& c : ca) da.push_back(patch_descriptor(ga, c.x, c.y, cfg.patch_radius));
  for (const Corner& c : cb) db.push_back(patch_descriptor(gb, c.x, c.y, cfg.patch_radius));

  std::vector<std::pair<Vec2, Vec2>> matches;
  for (size_t i = 0; i < da.size(); ++i) {
    float best = -2.f, second = -2.f;
    size_t best_j = 0;
    for (size_t j = 0; j < db.size(); ++j) {
      float dot = 0.f;
      for (size_t k = 0; k < da[i].size(); ++k) dot += da[i][k] * db[j][k];
      if (dot > best) {
        second = best;
        best = dot;
        best_j = j;
      } else if (dot > second) {
        second = dot;
      }
    }
    // Ratio test on descriptor distances (unit descriptors: d^2 = 2 - 2 dot).
    float d1 = std::sqrt(std::max(0.f, 2.f - 2.f * best));
    float d2 = std::sqrt(std::max(0.f, 2.f - 2.f * second));
    if (d2 <= 1e-9f || d1 < cfg.ratio_test * d2) {
      matches.push_back({{static_cast<float>(ca[i].x), static_cast<float>(ca[i].y)},
                         {static_cast<float>(cb[best_j].x), static_cast<float>(cb[best_j].y)}});
    }
  }
  if (matches.size() < 4) throw DegenerateAlignment("fewer than 4 usable feature matches");

  std::mt19937 rng(cfg.rng_seed);
  std::uniform_int_distribution<size_t> pick(0, matches.size() - 1);
  size_t best_count = 0;
  std::vector<char> best_inliers;
  for (int it = 0; it < cfg.ransac_iterations; ++it) {
    size_t idx[4];
    idx[0] = pick(rng);
    idx[1] = pick(rng);
    idx[2] = pick(rng);
    idx[3] = pick(rng);
    if (idx[0] == idx[1] || idx[0] == idx[2] || idx[0] == idx[3] || idx[1] == idx[2] ||
        idx[1] == idx[3] || idx[2] == idx[3])
      continue;
    std::vector<std::pair<Vec2, Vec2>> sample{matches[idx[0]], matches[idx[1]], matches[idx[2]],
                                              matches[idx[3]]};
    Homography h;
    try {
      h = fit_homography_dlt(sample);
    } catch (const DegenerateAlignment&) {
      continue;
    }
    std::vector<char> inliers(matches.size(), 0);
    size_t count = 0;
    for (size_t k = 0; k < matches.size(); ++k) {
      Vec2 p = h.apply(matches[k].first.x, matches[k].first.y);
      float err = std::hypot(p.x - matches[k].second.x, p.y - matches[k].second.y);
      if (err < cfg.inlier_threshold) {
        inliers[k] = 1;
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_inliers = std::move(inliers);
    }
  }
  if (best_count < 4) throw DegenerateAlignment("RANSAC found fewer than 4 inlier matches");
  std::vector<std::pair<Vec2, Vec2>> inlier_pairs;
  for (size_t k = 0; k < matches.size(); ++k)
    if (best_inliers[k]) inlier_pairs.push_back(matches[k]);
  return fit_homography_dlt(inlier_pairs);
}

FlowField homography_flow_field(const Homography& h, int width, int height) {
  FlowField out(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      Vec2 p = h.apply(static_cast<float>(x), static_cast<float>(y));
      out.set(x, y, {p.x - x, p.y - y});
    }
  return out;
}

FlowField estimate_flow_nonlocal(const FlowEstimator& estimator, const Frame& frame_i,
                                 const Frame& frame_j, int i, int j,
                                 const HomographyConfig& config) {
  if (frame_i.width != frame_j.width || frame_i.height != frame_j.height)
    throw DataError("estimate_flow_nonlocal: frame dimensions differ");
  if (!estimator.wants_homography_compensation()) return estimator.estimate(frame_i, frame_j, i, j);

  Homography h;
  bool aligned_ok = true;
  try {
    h = estimate_homography(frame_i, frame_j, config);
  } catch (const DegenerateAlignment&) {
    aligned_ok = false;  // fall back to an identity warp
  }
  if (!aligned_ok) return estimator.estimate(frame_i, frame_j, i, j);

  Frame aligned(frame_i.width, frame_i.height);
  for (int y = 0; y < frame_i.height; ++y)
    for (int x = 0; x < frame_i.width; ++x) {
      Vec2 p = h.apply(static_cast<float>(x), static_cast<float>(y));
      auto s = bilinear_sample(frame_j, p.x, p.y);
      if (s)
        for (int c = 0; c < 3; ++c) aligned.at(x, y, c) = (*s)[c];
    }

  FlowField residual = estimator.estimate(frame_i, aligned, i, j);
  FlowField out(frame_i.width, frame_i.height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x) {
      Vec2 f = residual.at(x, y);
      Vec2 p = h.apply(x + f.x, y + f.y);
      out.set(x, y, {p.x - x, p.y - y});
    }
  out.source_frame = i;
  out.target_frame = j;
  return out;
}

}  // namespace flowfill
