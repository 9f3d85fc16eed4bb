#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <queue>

#include "flowfill/edges.hpp"
#include "flowfill/errors.hpp"

using namespace flowfill;

TEST_CASE("canny: constant raster yields no edges") {
  ScalarImage img(20, 20, 3.7f);
  EdgeMap e = canny(img);
  CHECK(e.count() == 0);
}

TEST_CASE("canny: vertical step becomes a single thin vertical line") {
  const int w = 24, h = 20;
  ScalarImage img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = x < w / 2 ? 0.f : 10.f;
  EdgeMap e = canny(img, 1.0, 0.1, 0.2);
  CHECK(e.count() >= static_cast<size_t>(h - 2));
  CHECK(e.count() <= static_cast<size_t>(h + 2));
  // Every edge pixel sits on one column near the step, one per row.
  for (int y = 0; y < h; ++y) {
    int row_count = 0;
    for (int x = 0; x < w; ++x)
      if (e.at(x, y)) {
        ++row_count;
        CHECK(std::abs(x - w / 2) <= 1);
      }
    CHECK(row_count <= 1);
  }
}

TEST_CASE("canny: deterministic on repeated calls") {
  ScalarImage img(16, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 16; ++x) img.at(x, y) = static_cast<float>((x * 7 + y * 3) % 5);
  EdgeMap a = canny(img);
  EdgeMap b = canny(img);
  CHECK(a.data == b.data);
}

TEST_CASE("suppress_hole_edges: empty mask is the identity") {
  EdgeMap e(10, 10);
  e.at(3, 3) = 1;
  e.at(7, 2) = 1;
  MaskFrame m(10, 10);
  EdgeMap out = suppress_hole_edges(e, m);
  CHECK(out.data == e.data);
}

TEST_CASE("suppress_hole_edges: all-true mask clears everything") {
  EdgeMap e(6, 6);
  for (auto& v : e.data) v = 1;
  MaskFrame m(6, 6, true);
  CHECK(suppress_hole_edges(e, m).count() == 0);
}

TEST_CASE("suppress_hole_edges: matches the per-pixel set-difference oracle") {
  const int w = 12, h = 12;
  EdgeMap e(w, h);
  for (int y = 0; y < h; ++y) e.at(5, y) = 1;  // vertical line
  MaskFrame m(w, h);
  for (int y = 4; y < 8; ++y)
    for (int x = 3; x < 8; ++x) m.at(x, y) = 1;  // square hole crossing the line
  EdgeMap out = suppress_hole_edges(e, m);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      CHECK(static_cast<bool>(out.at(x, y)) == (e.at(x, y) && !m.at(x, y)));
}

TEST_CASE("complete_edges: strategy none returns the input verbatim") {
  EdgeMap e(8, 8);
  e.at(1, 1) = 1;
  MaskFrame m(8, 8, true);
  EdgeMap out = complete_edges(e, m, EdgeStrategy::kNone);
  CHECK(out.data == e.data);
}

TEST_CASE("complete_edges: link reconnects a straight edge through a hole") {
  const int w = 21, h = 15;
  EdgeMap e(w, h);
  MaskFrame m(w, h);
  for (int x = 7; x < 14; ++x)
    for (int y = 4; y < 11; ++y) m.at(x, y) = 1;
  for (int x = 0; x < w; ++x)
    if (!m.at(x, 7)) e.at(x, 7) = 1;  // horizontal edge interrupted by the hole

  EdgeMap out = complete_edges(e, m, EdgeStrategy::kLink);

  // Added pixels all lie inside the mask; pixels outside are untouched.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      if (!m.at(x, y)) CHECK(out.at(x, y) == e.at(x, y));
    }

  // Flood fill over 8-connected edge pixels: both sides must now connect.
  std::vector<char> seen(static_cast<size_t>(w) * h, 0);
  std::queue<std::pair<int, int>> q;
  q.push({0, 7});
  seen[7 * w] = 1;
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop();
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        int nx = x + dx, ny = y + dy;
        if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
        size_t i = static_cast<size_t>(ny) * w + nx;
        if (!seen[i] && out.at(nx, ny)) {
          seen[i] = 1;
          q.push({nx, ny});
        }
      }
  }
  CHECK(seen[7 * static_cast<size_t>(w) + (w - 1)]);
}

TEST_CASE("complete_edges: external unions inside the mask only") {
  const int w = 10, h = 10;
  EdgeMap e(w, h);
  e.at(0, 0) = 1;
  MaskFrame m(w, h);
  for (int y = 3; y < 7; ++y)
    for (int x = 3; x < 7; ++x) m.at(x, y) = 1;
  EdgeMap ext(w, h);
  ext.at(4, 4) = 1;  // inside mask: adopted
  ext.at(9, 9) = 1;  // outside mask: ignored
  EdgeMap out = complete_edges(e, m, EdgeStrategy::kExternal, &ext);
  CHECK(out.at(0, 0));
  CHECK(out.at(4, 4));
  CHECK(!out.at(9, 9));
  // Never modifies edge pixels outside the mask.
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (!m.at(x, y)) CHECK(out.at(x, y) == e.at(x, y));
}

TEST_CASE("complete_edges: external requires a correctly sized map") {
  EdgeMap e(8, 8);
  MaskFrame m(8, 8, true);
  EdgeMap wrong(4, 4);
  CHECK_THROWS_AS(complete_edges(e, m, EdgeStrategy::kExternal, &wrong), DataError);
  CHECK_THROWS_AS(complete_edges(e, m, EdgeStrategy::kExternal, nullptr), DataError);
}
