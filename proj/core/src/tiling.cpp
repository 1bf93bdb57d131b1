// SPDX-License-Identifier: Apache-2.0
#include "fusecost/tiling.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <sstream>

#include "fusecost/error.hpp"

namespace fusecost {

std::string_view to_string(OverlapMode m) {
  switch (m) {
    case OverlapMode::FullyRecompute: return "fully-recompute";
    case OverlapMode::HCachedVRecompute: return "h-cached-v-recompute";
    case OverlapMode::FullyCached: return "fully-cached";
  }
  return "?";
}

OverlapMode overlap_mode_from_int(int m) {
  if (m < 0 || m > 2) throw ValidationError("overlap mode must be 0, 1 or 2, got " + std::to_string(m));
  return static_cast<OverlapMode>(m);
}

std::string to_string(const Region& r) {
  if (r.empty()) return "[]";
  std::ostringstream os;
  os << '[' << r.x0 << ',' << r.x1 << "]x[" << r.y0 << ',' << r.y1 << ']';
  return os.str();
}

Region merge_branch_cache(const std::vector<Region>& regions) {
  Region out;
  bool any = false;
  for (const Region& r : regions) {
    if (r.empty()) continue;
    if (!any) {
      out = r;
      any = true;
      continue;
    }
    out.x0 = std::min(out.x0, r.x0);
    out.y0 = std::min(out.y0, r.y0);
    out.x1 = std::max(out.x1, r.x1);
    out.y1 = std::max(out.y1, r.y1);
  }
  return out;
}

Region TileGrid::tile(std::int64_t col, std::int64_t row) const {
  Region r;
  r.x0 = col * tx;
  r.y0 = row * ty;
  r.x1 = std::min(width, r.x0 + tx) - 1;
  r.y1 = std::min(height, r.y0 + ty) - 1;
  return r;
}

TileGrid tile_grid(std::int64_t width, std::int64_t height, std::int64_t tx, std::int64_t ty) {
  if (tx < 1 || tx > width)
    throw ValidationError("tile width " + std::to_string(tx) + " outside [1, " + std::to_string(width) + "]");
  if (ty < 1 || ty > height)
    throw ValidationError("tile height " + std::to_string(ty) + " outside [1, " + std::to_string(height) + "]");
  TileGrid g;
  g.width = width;
  g.height = height;
  g.tx = tx;
  g.ty = ty;
  g.cols = ceil_div(width, tx);
  g.rows = ceil_div(height, ty);
  return g;
}

std::vector<Region> tile_regions(const TileGrid& grid) {
  std::vector<Region> out;
  out.reserve(static_cast<std::size_t>(grid.count()));
  for (std::int64_t r = 0; r < grid.rows; ++r)
    for (std::int64_t c = 0; c < grid.cols; ++c) out.push_back(grid.tile(c, r));
  return out;
}

StackGeometry::StackGeometry(const WorkloadGraph& g, const Stack& stack) : g_(&g), stack_(stack) {
  for (int id : stack_.layer_ids) layers_.push_back(&g.layer(id));
  std::map<int, std::size_t> by_id;
  auto add_map = [&](int id, int producer, std::int64_t w, std::int64_t h, std::int64_t ch, int bits) {
    FeatureMap m;
    m.id = id;
    m.producer = producer;
    m.width = w;
    m.height = h;
    m.channels = ch;
    m.bits = bits;
    by_id[id] = maps_.size();
    maps_.push_back(std::move(m));
  };
  // Entering maps first, ordered by map id.
  std::map<int, std::tuple<std::int64_t, std::int64_t, std::int64_t, int>> sources;
  for (const Layer* l : layers_) {
    if (l->predecessors.empty()) {
      sources[-1 - l->id] = {l->input_width(), l->input_height(), l->C, l->act_bits};
      continue;
    }
    for (int p : l->predecessors)
      if (!stack_.contains(p)) {
        const Layer& pl = g.layer(p);
        sources[p] = {pl.OX, pl.OY, pl.K, pl.act_bits};
      }
  }
  for (auto& [id, v] : sources) add_map(id, -1, std::get<0>(v), std::get<1>(v), std::get<2>(v), std::get<3>(v));
  for (const Layer* l : layers_) add_map(l->id, l->id, l->OX, l->OY, l->K, l->act_bits);

  for (const Layer* l : layers_) {
    out_map_.push_back(by_id.at(l->id));
    std::vector<std::size_t> ins;
    if (l->predecessors.empty()) ins.push_back(by_id.at(-1 - l->id));
    for (int p : l->predecessors) ins.push_back(by_id.at(p));
    for (std::size_t m : ins) maps_[m].consumers.push_back(l->id);
    in_maps_.push_back(std::move(ins));
  }
}

int StackGeometry::phase_stride(std::size_t map, int axis) const {
  int s = 1;
  for (int id : maps_[map].consumers) {
    const Layer& l = g_->layer(id);
    s = std::max(s, axis == 0 ? l.stride_x : l.stride_y);
  }
  return s;
}

namespace {

struct Interval {
  std::int64_t lo = std::numeric_limits<std::int64_t>::max();
  std::int64_t hi = std::numeric_limits<std::int64_t>::min();
  bool empty() const { return hi < lo; }
  std::int64_t size() const { return empty() ? 0 : hi - lo + 1; }
  void hull(const Interval& o) {
    if (o.empty()) return;
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
  }
};

Interval clip(std::int64_t lo, std::int64_t hi, std::int64_t extent) {
  Interval r;
  r.lo = std::max<std::int64_t>(lo, 0);
  r.hi = std::min<std::int64_t>(hi, extent - 1);
  if (r.hi < r.lo) return Interval{};
  return r;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) { return a / b - ((a % b != 0) && ((a < 0) != (b < 0))); }

// Bounding box of the in-range input positions read by outputs [a, b]. With a
// kernel narrower than the stride the edge windows can fall wholly in padding.
Interval window(std::int64_t a, std::int64_t b, std::int64_t s, std::int64_t pad, std::int64_t k,
                std::int64_t extent) {
  const std::int64_t first = std::max(a, -floor_div(k - 1 - pad, s));
  const std::int64_t last = std::min(b, floor_div(extent - 1 + pad, s));
  if (last < first) return Interval{};
  return clip(first * s - pad, last * s - pad + k - 1, extent);
}

// Size of the union of two intervals.
std::int64_t union_size(const Interval& a, const Interval& b) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  std::int64_t ov = std::max<std::int64_t>(0, std::min(a.hi, b.hi) - std::max(a.lo, b.lo) + 1);
  return a.size() + b.size() - ov;
}

struct Pass {
  std::vector<Interval> req, fresh;
};

struct AxisData {
  Interval req, fresh;
  std::int64_t cached = 0;  // positions of req available from the previous tile along this axis
  std::int64_t store = 0;   // freshly produced positions the next tile along this axis needs
  std::int64_t live = 0;    // positions held for the previous and next tile together
  std::int64_t phase = 0;
};

using AxisProfile = std::vector<AxisData>;

class AxisSolver {
 public:
  AxisSolver(const StackGeometry& geom, int axis, std::int64_t extent, std::int64_t tile, bool cached)
      : geom_(geom), axis_(axis), extent_(extent), tile_(tile), cached_(cached), count_(ceil_div(extent, tile)) {}

  std::int64_t count() const { return count_; }

  Pass pass(std::int64_t index, const Pass* prev) const {
    const auto& maps = geom_.maps();
    Pass p;
    p.req.assign(maps.size(), Interval{});
    p.fresh.assign(maps.size(), Interval{});
    const std::size_t fin = geom_.final_map();
    p.req[fin].lo = index * tile_;
    p.req[fin].hi = std::min(extent_, (index + 1) * tile_) - 1;
    p.fresh[fin] = p.req[fin];
    for (std::size_t li = geom_.layer_count(); li-- > 0;) {
      const std::size_t om = geom_.output_map(li);
      if (om != fin) p.fresh[om] = carve(p.req[om], prev ? &prev->req[om] : nullptr);
      const Interval f = p.fresh[om];
      if (f.empty()) continue;
      const Layer& l = geom_.layer(li);
      const std::int64_t s = axis_ == 0 ? l.stride_x : l.stride_y;
      const std::int64_t pad = axis_ == 0 ? l.pad_left : l.pad_top;
      const std::int64_t k = axis_ == 0 ? l.FX : l.FY;
      for (std::size_t im : geom_.input_maps(li)) {
        const std::int64_t ext = axis_ == 0 ? maps[im].width : maps[im].height;
        p.req[im].hull(window(f.lo, f.hi, s, pad, k, ext));
      }
    }
    for (std::size_t m = 0; m < maps.size(); ++m)
      if (maps[m].is_source()) p.fresh[m] = carve(p.req[m], prev ? &prev->req[m] : nullptr);
    return p;
  }

  AxisProfile profile(std::int64_t index) const {
    std::optional<Pass> prev, next;
    if (cached_ && index > 0) prev = pass(index - 1, nullptr);
    Pass cur = pass(index, prev ? &*prev : nullptr);
    if (cached_ && index + 1 < count_) next = pass(index + 1, &cur);
    AxisProfile out(geom_.maps().size());
    for (std::size_t m = 0; m < out.size(); ++m) {
      AxisData& a = out[m];
      a.req = cur.req[m];
      a.fresh = cur.fresh[m];
      if (!a.req.empty()) a.phase = a.req.lo % geom_.phase_stride(m, axis_);
      if (m == geom_.final_map() || !cached_) continue;
      Interval back;  // part of req kept from the previous tile
      if (prev && !a.req.empty()) back = clip(a.req.lo, std::min(a.req.hi, prev->req[m].hi), a.req.hi + 1);
      a.cached = back.size();
      Interval fwd;  // part of req the next tile reuses
      if (next && !a.req.empty() && !next->req[m].empty())
        fwd = clip(std::max(a.req.lo, next->req[m].lo), a.req.hi, a.req.hi + 1);
      if (!fwd.empty() && !a.fresh.empty())
        a.store = std::max<std::int64_t>(0, std::min(fwd.hi, a.fresh.hi) - std::max(fwd.lo, a.fresh.lo) + 1);
      a.live = union_size(back, fwd);
    }
    return out;
  }

 private:
  Interval carve(const Interval& req, const Interval* prev_req) const {
    if (!cached_ || prev_req == nullptr || prev_req->empty() || req.empty()) return req;
    Interval f = req;
    f.lo = std::max(req.lo, prev_req->hi + 1);
    if (f.lo > f.hi) return Interval{};
    return f;
  }

  const StackGeometry& geom_;
  int axis_;
  std::int64_t extent_, tile_;
  bool cached_;
  std::int64_t count_;
};

Region make_region(const Interval& x, const Interval& y) {
  if (x.empty() || y.empty()) return Region{};
  return Region{x.lo, y.lo, x.hi, y.hi};
}

std::vector<std::int64_t> row_widths(const StackGeometry& geom, const AxisProfile& first, const AxisProfile& last) {
  std::vector<std::int64_t> w(geom.maps().size());
  for (std::size_t m = 0; m < w.size(); ++m) {
    Interval h = first[m].req;
    h.hull(last[m].req);
    w[m] = h.size();
  }
  return w;
}

TileAttr combine(const StackGeometry& geom, const AxisProfile& xp, const AxisProfile& yp,
                 const std::vector<std::int64_t>& row_width, std::int64_t col, std::int64_t row,
                 const TileGrid& grid) {
  TileAttr t;
  t.col = col;
  t.row = row;
  t.first_col = col == 0;
  t.first_row = row == 0;
  t.last_col = col + 1 == grid.cols;
  t.last_row = row + 1 == grid.rows;
  t.opens_stack = col == 0 && row == 0;
  const auto& maps = geom.maps();
  t.maps.resize(maps.size());
  for (std::size_t m = 0; m < maps.size(); ++m) {
    const AxisData& x = xp[m];
    const AxisData& y = yp[m];
    const auto ch = static_cast<std::uint64_t>(maps[m].channels);
    MapTileData& d = t.maps[m];
    d.required = make_region(x.req, y.req);
    d.fresh = make_region(x.fresh, y.fresh);
    d.phase_x = x.phase;
    d.phase_y = y.phase;
    if (d.required.empty()) continue;
    const auto fy = static_cast<std::uint64_t>(y.fresh.size());
    const auto fx = static_cast<std::uint64_t>(x.fresh.size());
    d.from_left = static_cast<std::uint64_t>(x.cached) * fy * ch;
    d.from_above = static_cast<std::uint64_t>(y.cached) * static_cast<std::uint64_t>(x.req.size()) * ch;
    d.to_left = static_cast<std::uint64_t>(x.store) * fy * ch;
    d.to_above = static_cast<std::uint64_t>(y.store) * fx * ch;
    d.live_left = static_cast<std::uint64_t>(x.live) * fy * ch;
    d.live_row = static_cast<std::uint64_t>(y.live) * static_cast<std::uint64_t>(row_width[m]) * ch;
  }
  return t;
}

std::vector<std::int64_t> axis_key(const AxisProfile& p) {
  std::vector<std::int64_t> k;
  k.reserve(p.size() * 6);
  for (const AxisData& a : p) {
    k.push_back(a.req.size());
    k.push_back(a.fresh.size());
    k.push_back(a.cached);
    k.push_back(a.store);
    k.push_back(a.live);
    k.push_back(a.phase);
  }
  return k;
}

struct AxisClass {
  std::vector<std::int64_t> members;  // indices in ascending order (first two are enough)
  std::int64_t count = 0;
  AxisProfile profile;
};

std::vector<AxisClass> classify(const AxisSolver& solver) {
  std::vector<AxisClass> classes;
  std::map<std::vector<std::int64_t>, std::size_t> index;
  for (std::int64_t i = 0; i < solver.count(); ++i) {
    AxisProfile p = solver.profile(i);
    auto key = axis_key(p);
    auto [it, inserted] = index.emplace(std::move(key), classes.size());
    if (inserted) classes.push_back(AxisClass{{}, 0, std::move(p)});
    AxisClass& c = classes[it->second];
    if (c.members.size() < 2) c.members.push_back(i);
    ++c.count;
  }
  return classes;
}

}  // namespace

std::vector<std::int64_t> TileAttr::signature() const {
  std::vector<std::int64_t> s;
  s.reserve(1 + maps.size() * 12);
  s.push_back(opens_stack ? 1 : 0);
  for (const MapTileData& d : maps) {
    s.push_back(d.required.width());
    s.push_back(d.required.height());
    s.push_back(d.fresh.width());
    s.push_back(d.fresh.height());
    for (std::uint64_t v : {d.from_left, d.from_above, d.to_left, d.to_above, d.live_left, d.live_row})
      s.push_back(static_cast<std::int64_t>(v));
    s.push_back(d.phase_x);
    s.push_back(d.phase_y);
  }
  return s;
}

TileAttr backcalc(const StackGeometry& geom, OverlapMode mode, const TileGrid& grid, std::int64_t col,
                  std::int64_t row) {
  if (col < 0 || col >= grid.cols || row < 0 || row >= grid.rows) throw Error("tile position outside the grid");
  AxisSolver xs(geom, 0, grid.width, grid.tx, caches_horizontally(mode));
  AxisSolver ys(geom, 1, grid.height, grid.ty, caches_vertically(mode));
  const AxisProfile xp = xs.profile(col);
  const AxisProfile yp = ys.profile(row);
  const auto widths = row_widths(geom, xs.profile(0), xs.profile(grid.cols - 1));
  return combine(geom, xp, yp, widths, col, row, grid);
}

std::vector<TileType> identify_tile_types(const StackGeometry& geom, OverlapMode mode, const TileGrid& grid) {
  AxisSolver xs(geom, 0, grid.width, grid.tx, caches_horizontally(mode));
  AxisSolver ys(geom, 1, grid.height, grid.ty, caches_vertically(mode));
  const auto xc = classify(xs);
  const auto yc = classify(ys);
  // Column 0 always lands in the first x class; the last column's profile is
  // needed for the row-cache width.
  const AxisProfile last_col = xs.profile(grid.cols - 1);
  const auto widths = row_widths(geom, xc.front().profile, last_col);

  std::vector<TileType> types;
  std::map<std::vector<std::int64_t>, std::size_t> by_sig;
  auto add = [&](TileAttr attr, std::uint64_t mult) {
    if (mult == 0) return;
    auto [it, inserted] = by_sig.emplace(attr.signature(), types.size());
    if (inserted) {
      types.push_back(TileType{std::move(attr), mult});
      return;
    }
    TileType& t = types[it->second];
    t.multiplicity += mult;
    if (std::tie(attr.row, attr.col) < std::tie(t.attr.row, t.attr.col)) t.attr = std::move(attr);
  };
  for (std::size_t cy = 0; cy < yc.size(); ++cy) {
    for (std::size_t cx = 0; cx < xc.size(); ++cx) {
      const AxisClass& X = xc[cx];
      const AxisClass& Y = yc[cy];
      auto count = static_cast<std::uint64_t>(X.count * Y.count);
      std::int64_t c0 = X.members[0], r0 = Y.members[0];
      if (c0 == 0 && r0 == 0) {
        add(combine(geom, X.profile, Y.profile, widths, 0, 0, grid), 1);
        if (count > 1) {
          std::int64_t c = X.members.size() > 1 ? X.members[1] : 0;
          std::int64_t r = X.members.size() > 1 ? 0 : Y.members[1];
          add(combine(geom, X.profile, Y.profile, widths, c, r, grid), count - 1);
        }
        continue;
      }
      add(combine(geom, X.profile, Y.profile, widths, c0, r0, grid), count);
    }
  }
  std::sort(types.begin(), types.end(), [](const TileType& a, const TileType& b) {
    return std::tie(a.attr.row, a.attr.col) < std::tie(b.attr.row, b.attr.col);
  });
  return types;
}

std::uint64_t tile_macs(const StackGeometry& geom, const TileAttr& attr) {
  std::uint64_t total = 0;
  for (std::size_t li = 0; li < geom.layer_count(); ++li) {
    const Layer& l = geom.layer(li);
    const Region& f = attr.maps[geom.output_map(li)].fresh;
    total += static_cast<std::uint64_t>(f.area() * l.K * l.macs_per_output());
  }
  return total;
}

std::uint64_t mac_count(const StackGeometry& geom, OverlapMode mode, const TileGrid& grid) {
  std::uint64_t total = 0;
  for (const TileType& t : identify_tile_types(geom, mode, grid)) total += t.multiplicity * tile_macs(geom, t.attr);
  return total;
}

}  // namespace fusecost
