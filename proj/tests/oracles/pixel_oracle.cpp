// SPDX-License-Identifier: Apache-2.0
#include "pixel_oracle.hpp"

#include <algorithm>
#include <limits>

namespace fusecost::oracle {

namespace {

struct Plane {
  std::int64_t w = 0, h = 0;
  std::vector<std::int64_t> row_stamp, col_stamp;  // tile that last produced the pixel, -1 if never
  std::vector<char> need;
  std::vector<std::int64_t> touched;
  Plane(std::int64_t w_, std::int64_t h_)
      : w(w_), h(h_), row_stamp(static_cast<std::size_t>(w_ * h_), -1),
        col_stamp(static_cast<std::size_t>(w_ * h_), -1), need(static_cast<std::size_t>(w_ * h_), 0) {}
  void mark(std::int64_t x, std::int64_t y) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    const auto i = static_cast<std::size_t>(y * w + x);
    if (!need[i]) {
      need[i] = 1;
      touched.push_back(static_cast<std::int64_t>(i));
    }
  }
  Region box() const {
    if (touched.empty()) return Region{};
    Region r{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(), -1, -1};
    for (auto i : touched) {
      const std::int64_t x = i % w, y = i / w;
      r.x0 = std::min(r.x0, x);
      r.y0 = std::min(r.y0, y);
      r.x1 = std::max(r.x1, x);
      r.y1 = std::max(r.y1, y);
    }
    return r;
  }
  void clear() {
    for (auto i : touched) need[static_cast<std::size_t>(i)] = 0;
    touched.clear();
  }
};

}  // namespace

std::vector<std::vector<PixelMap>> replay(const StackGeometry& geom, OverlapMode mode, const TileGrid& grid) {
  const auto& maps = geom.maps();
  std::vector<Plane> planes;
  for (const FeatureMap& m : maps) planes.emplace_back(m.width, m.height);
  std::vector<std::vector<PixelMap>> out;
  out.reserve(static_cast<std::size_t>(grid.count()));

  for (std::int64_t r = 0; r < grid.rows; ++r)
    for (std::int64_t c = 0; c < grid.cols; ++c) {
      std::vector<PixelMap> res(maps.size());
      auto available = [&](const Plane& p, std::size_t i) {
        switch (mode) {
          case OverlapMode::FullyRecompute: return false;
          case OverlapMode::HCachedVRecompute: return p.row_stamp[i] == r && p.col_stamp[i] < c;
          case OverlapMode::FullyCached: return p.row_stamp[i] >= 0;
        }
        return false;
      };
      // Fresh pixels of one map; stamps them and fills the result entry.
      auto settle = [&](std::size_t m, const Region& needed) {
        PixelMap& pm = res[m];
        pm.required = needed;
        if (needed.empty()) return;
        Plane& p = planes[m];
        std::vector<std::int64_t> fresh;
        for (std::int64_t y = needed.y0; y <= needed.y1; ++y)
          for (std::int64_t x = needed.x0; x <= needed.x1; ++x) {
            const auto i = static_cast<std::size_t>(y * p.w + x);
            if (available(p, i)) {
              if (p.row_stamp[i] < r)
                pm.from_above += static_cast<std::uint64_t>(maps[m].channels);
              else
                pm.from_left += static_cast<std::uint64_t>(maps[m].channels);
            } else {
              fresh.push_back(static_cast<std::int64_t>(i));
            }
          }
        if (fresh.empty()) return;
        Region b{std::numeric_limits<std::int64_t>::max(), std::numeric_limits<std::int64_t>::max(), -1, -1};
        for (auto i : fresh) {
          const std::int64_t x = i % p.w, y = i / p.w;
          b.x0 = std::min(b.x0, x);
          b.y0 = std::min(b.y0, y);
          b.x1 = std::max(b.x1, x);
          b.y1 = std::max(b.y1, y);
        }
        pm.fresh = b;
        pm.fresh_is_box = static_cast<std::int64_t>(fresh.size()) == b.area();
        for (auto i : fresh) {
          p.row_stamp[static_cast<std::size_t>(i)] = r;
          p.col_stamp[static_cast<std::size_t>(i)] = c;
        }
      };

      const std::size_t fin = geom.final_map();
      for (std::size_t li = geom.layer_count(); li-- > 0;) {
        const std::size_t om = geom.output_map(li);
        settle(om, om == fin ? grid.tile(c, r) : planes[om].box());
        const Region f = res[om].fresh;
        if (f.empty()) continue;
        const Layer& l = geom.layer(li);
        for (std::size_t im : geom.input_maps(li))
          for (std::int64_t y = f.y0; y <= f.y1; ++y)
            for (std::int64_t x = f.x0; x <= f.x1; ++x)
              for (std::int64_t fy = 0; fy < l.FY; ++fy)
                for (std::int64_t fx = 0; fx < l.FX; ++fx)
                  planes[im].mark(x * l.stride_x - l.pad_left + fx, y * l.stride_y - l.pad_top + fy);
      }
      for (std::size_t m = 0; m < maps.size(); ++m)
        if (maps[m].is_source()) settle(m, planes[m].box());
      for (Plane& p : planes) p.clear();
      out.push_back(std::move(res));
    }
  return out;
}

}  // namespace fusecost::oracle
