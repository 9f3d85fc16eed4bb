#pragma once

#include <optional>
#include <string>

#include "flowfill/core.hpp"

namespace flowfill {

struct EdgeMap {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // true = edge

  EdgeMap() = default;
  EdgeMap(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h, 0) {}

  uint8_t& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  uint8_t at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }

  size_t count() const {
    size_t n = 0;
    for (uint8_t v : data) n += (v != 0);
    return n;
  }
};

// Canny on a scalar raster. Thresholds are fractions of the per-raster maximum
// gradient magnitude. Defaults follow sigma=1, low=0.1, high=0.2.
EdgeMap canny(const ScalarImage& magnitude, double sigma = 1.0, double low = 0.1, double high = 0.2);

// Clears edge pixels inside the mask.
EdgeMap suppress_hole_edges(const EdgeMap& edges, const MaskFrame& mask);

enum class EdgeStrategy { kNone, kLink, kExternal };

// Completes edges across the mask. For kExternal the caller supplies the
// external map (loaded from file or passed in-memory); it is unioned with the
// input over the mask region only. Edge pixels outside the mask are never
// modified.
EdgeMap complete_edges(const EdgeMap& edges, const MaskFrame& mask, EdgeStrategy strategy,
                       const EdgeMap* external = nullptr);

}  // namespace flowfill
