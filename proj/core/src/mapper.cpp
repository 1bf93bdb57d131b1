// SPDX-License-Identifier: Apache-2.0
#include "fusecost/mapper.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "fusecost/error.hpp"

namespace fusecost {

LayerInstance LayerInstance::from_layer(const Layer& l, std::int64_t ox, std::int64_t oy) {
  LayerInstance li;
  li.kind = l.kind;
  const bool cw = l.kind != LayerKind::Conv;
  li.bounds = {l.K, cw ? 1 : l.C, ox, oy, l.FX, l.FY};
  li.stride_x = l.stride_x;
  li.stride_y = l.stride_y;
  li.input_bits = l.act_bits;
  li.output_bits = l.act_bits;
  li.weight_bits = l.weight_bits;
  li.input_operands = l.kind == LayerKind::Add ? static_cast<int>(l.predecessors.size()) : 1;
  return li;
}

std::uint64_t LayerInstance::mac_count() const {
  std::uint64_t m = 1;
  for (auto b : bounds) m *= static_cast<std::uint64_t>(b);
  return m;
}

std::string LayerInstance::key() const {
  std::ostringstream os;
  os << static_cast<int>(kind);
  for (auto b : bounds) os << ',' << b;
  os << ',' << stride_x << ',' << stride_y << ',' << input_bits << ',' << output_bits << ',' << weight_bits << ','
     << input_operands;
  return os.str();
}

std::string_view to_string(Target t) {
  switch (t) {
    case Target::Energy: return "energy";
    case Target::Latency: return "latency";
    case Target::EDP: return "edp";
    case Target::Weighted: return "weighted";
  }
  return "?";
}

std::optional<Target> target_from_string(std::string_view s) {
  for (Target t : {Target::Energy, Target::Latency, Target::EDP, Target::Weighted})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

double Objective::score(double e, double l) const {
  switch (target) {
    case Target::Energy: return e;
    case Target::Latency: return l;
    case Target::EDP: return e * l;
    case Target::Weighted: return energy_weight * e + latency_weight * l;
  }
  return e;
}

DimArray effective_spatial(const LayerInstance& layer, const Accelerator& acc) {
  DimArray su{};
  for (LoopDim d : kLoopDims)
    su[index(d)] = std::min<std::int64_t>(acc.spatial().factor(d), layer.bounds[index(d)]);
  return su;
}

DimArray temporal_bounds(const LayerInstance& layer, const DimArray& spatial) {
  DimArray t{};
  for (std::size_t d = 0; d < kNumDims; ++d) t[d] = ceil_div(layer.bounds[d], spatial[d]);
  return t;
}

namespace {

std::vector<std::int64_t> prime_factors(std::int64_t n) {
  std::vector<std::int64_t> out;
  for (std::int64_t p = 2; p * p <= n; ++p)
    while (n % p == 0) {
      out.push_back(p);
      n /= p;
    }
  if (n > 1) out.push_back(n);
  return out;
}

std::vector<Loop> flatten(const std::array<std::vector<std::int64_t>, kNumDims>& f) {
  std::vector<Loop> out;
  for (std::size_t d = 0; d < kNumDims; ++d)
    for (auto v : f[d]) out.push_back(Loop{kLoopDims[d], v});
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

std::vector<std::vector<Loop>> factorization_chain(const DimArray& temporal, int lpf_limit) {
  if (lpf_limit < 1) throw ValidationError("lpf_limit must be >= 1");
  std::array<std::vector<std::int64_t>, kNumDims> f;
  std::size_t total = 0;
  for (std::size_t d = 0; d < kNumDims; ++d) {
    f[d] = prime_factors(temporal[d]);
    total += f[d].size();
  }
  auto merge_once = [&]() {
    std::size_t best = kNumDims;
    std::int64_t best_prod = 0;
    for (std::size_t d = 0; d < kNumDims; ++d) {
      if (f[d].size() < 2) continue;
      std::int64_t prod = f[d][0] * f[d][1];
      if (best == kNumDims || prod < best_prod) {
        best = d;
        best_prod = prod;
      }
    }
    if (best == kNumDims) return false;
    auto& v = f[best];
    v.erase(v.begin(), v.begin() + 2);
    v.insert(std::upper_bound(v.begin(), v.end(), best_prod), best_prod);
    --total;
    return true;
  };
  while (total > static_cast<std::size_t>(lpf_limit) && merge_once()) {
  }
  std::vector<std::vector<Loop>> chain{flatten(f)};
  while (merge_once()) chain.push_back(flatten(f));
  return chain;
}

namespace {

constexpr std::size_t kMaxLoops = 48;
constexpr std::size_t kMaxChain = 12;

using Cuts = std::array<std::array<int, kMaxChain>, 3>;

std::uint64_t words_for(std::uint64_t elements, int bits, std::uint32_t wl) {
  std::uint64_t b = elements * static_cast<std::uint64_t>(bits);
  return (b + wl - 1) / wl;
}

std::int64_t distinct_sum(std::int64_t a, std::int64_t m, std::int64_t b, std::int64_t q) {
  // |{a*t + b*u : 0 <= t < m, 0 <= u < q}| for a, b >= 1
  if (m <= 1 || q <= 1) return m * q;
  const std::int64_t g = std::gcd(a, b);
  a /= g;
  b /= g;
  if (a > b * (q - 1)) return m * q;
  if (b > a * (m - 1)) return m * q;
  if (b == 1) return a * (m - 1) + q;
  if (a == 1) return b * (q - 1) + m;
  const std::int64_t span = a * (m - 1) + b * (q - 1) + 1;
  std::vector<char> seen(static_cast<std::size_t>(span), 0);
  std::int64_t n = 0;
  for (std::int64_t t = 0; t < m; ++t)
    for (std::int64_t u = 0; u < q; ++u) {
      auto& s = seen[static_cast<std::size_t>(a * t + b * u)];
      if (!s) {
        s = 1;
        ++n;
      }
    }
  return n;
}

class Model {
 public:
  Model(const LayerInstance& layer, const Accelerator& acc) : layer_(layer), acc_(acc) {
    for (auto b : layer.bounds)
      if (b < 1) throw ValidationError("layer instance bounds must be >= 1");
    su_ = effective_spatial(layer, acc);
    t_ = temporal_bounds(layer, su_);
    npe_ = 1;
    for (auto s : su_) npe_ *= s;
    bits_[index(Operand::W)] = layer.weight_bits;
    bits_[index(Operand::I)] = layer.input_bits;
    bits_[index(Operand::O)] = layer.output_bits;
    for (Operand op : kOperands) {
      chain_[index(op)] = acc.chain(op);
      if (chain_[index(op)].size() > kMaxChain) throw ValidationError("memory chain too deep");
      for (int lv : chain_[index(op)]) phys_.push_back(lv);
    }
    std::sort(phys_.begin(), phys_.end());
    phys_.erase(std::unique(phys_.begin(), phys_.end()), phys_.end());
  }

  const DimArray& spatial() const { return su_; }
  const DimArray& temporal() const { return t_; }

  bool allocate(const Loop* loops, int n, Cuts& cuts) const {
    prepare(loops, n);
    std::array<int, 3> cur{0, 0, 0};
    for (int lv : phys_) {
      const MemoryLevel& m = acc_.level(lv);
      std::array<int, 3> pos{-1, -1, -1};
      std::array<bool, 3> top{};
      std::array<int, 3> c{};
      bool lowest_here = false;
      for (Operand op : kOperands) {
        const auto o = index(op);
        const auto& ch = chain_[o];
        auto it = std::find(ch.begin(), ch.end(), lv);
        if (it == ch.end()) continue;
        pos[o] = static_cast<int>(it - ch.begin());
        top[o] = pos[o] + 1 == static_cast<int>(ch.size());
        c[o] = top[o] ? n : cur[o];
        if (pos[o] == 0 && !top[o]) lowest_here = true;
      }
      auto occupancy = [&]() {
        std::uint64_t s = 0;
        for (std::size_t o = 0; o < 3; ++o)
          if (pos[o] >= 0) s += fp_bits(o, c[o], m.per_pe);
        return s;
      };
      if (!m.offchip) {
        if (lowest_here && occupancy() > m.capacity_bits) return false;
        bool progressed = true;
        while (progressed) {
          progressed = false;
          for (std::size_t o = 0; o < 3; ++o) {
            if (pos[o] < 0 || top[o] || c[o] >= n) continue;
            ++c[o];
            if (occupancy() <= m.capacity_bits) {
              progressed = true;
            } else {
              --c[o];
            }
          }
        }
      }
      for (std::size_t o = 0; o < 3; ++o)
        if (pos[o] >= 0) {
          cuts[o][static_cast<std::size_t>(pos[o])] = c[o];
          cur[o] = c[o];
        }
    }
    return true;
  }

  // Energy and latency of a prepared ordering. Fills `out` when given.
  void evaluate(const Loop* loops, int n, const Cuts& cuts, double& energy, double& latency, LayerCost* out) const {
    const std::size_t nl = acc_.levels().size();
    std::array<std::array<AccessCount, 3>, kMaxChain * 3> acc_buf{};
    auto& access = acc_buf;  // indexed by global level
    if (nl > access.size()) throw ValidationError("too many memory levels");

    const std::uint64_t macs = layer_.mac_count();
    double prep = 0;
    for (Operand op : kOperands) {
      const auto o = index(op);
      if (op == Operand::W && !layer_.has_weights()) continue;
      const auto& ch = chain_[o];
      const int bits = bits_[o];
      {
        const MemoryLevel& low = acc_.level(ch[0]);
        const std::uint64_t per = std::max<std::uint64_t>(1, words_for(1, bits, low.word_length_bits));
        auto& a = access[static_cast<std::size_t>(ch[0])][o];
        std::uint64_t reads = macs * (op == Operand::I ? static_cast<std::uint64_t>(layer_.input_operands) : 1);
        a.read_elements += reads;
        a.read_words += reads * per;
        if (op == Operand::O) {
          a.write_elements += macs;
          a.write_words += macs * per;
        }
      }
      for (std::size_t b = 0; b + 1 < ch.size(); ++b) {
        const int p = cuts[o][b];
        const MemoryLevel& low = acc_.level(ch[b]);
        const MemoryLevel& up = acc_.level(ch[b + 1]);
        const std::uint64_t loads = load_count(loops, n, o, p);
        const std::uint64_t u = fp_union_[o][static_cast<std::size_t>(p)];
        const std::uint64_t pe = fp_pe_[o][static_cast<std::size_t>(p)];
        const std::uint64_t low_elems = low.per_pe ? pe * npe_ : u;
        const std::uint64_t low_words =
            low.per_pe ? words_for(pe, bits, low.word_length_bits) * npe_ : words_for(u, bits, low.word_length_bits);
        const std::uint64_t up_words = words_for(u, bits, up.word_length_bits);
        auto& lo = access[static_cast<std::size_t>(ch[b])][o];
        auto& hi = access[static_cast<std::size_t>(ch[b + 1])][o];
        if (op == Operand::O) {
          const std::uint64_t back = loads - distinct_outputs(loops, n, p);
          hi.write_elements += loads * u;
          hi.write_words += loads * up_words;
          hi.read_elements += back * u;
          hi.read_words += back * up_words;
          lo.read_elements += loads * low_elems;
          lo.read_words += loads * low_words;
          lo.write_elements += back * low_elems;
          lo.write_words += back * low_words;
          prep += static_cast<double>(u) * bits /
                  std::min(low.ports[static_cast<std::size_t>(low.read_port())].bw_bits_per_cycle,
                           up.ports[static_cast<std::size_t>(up.write_port())].bw_bits_per_cycle);
        } else {
          hi.read_elements += loads * u;
          hi.read_words += loads * up_words;
          lo.write_elements += loads * low_elems;
          lo.write_words += loads * low_words;
          prep += static_cast<double>(u) * bits /
                  std::min(up.ports[static_cast<std::size_t>(up.read_port())].bw_bits_per_cycle,
                           low.ports[static_cast<std::size_t>(low.write_port())].bw_bits_per_cycle);
        }
      }
    }

    double mem_energy = 0;
    double demand = 0;
    for (std::size_t v = 0; v < nl; ++v) {
      const MemoryLevel& m = acc_.level(static_cast<int>(v));
      std::array<double, 8> port_bits{};
      for (std::size_t o = 0; o < 3; ++o) {
        AccessCount& a = access[v][o];
        a.energy_pJ = static_cast<double>(a.read_words) * m.read_energy_pJ +
                      static_cast<double>(a.write_words) * m.write_energy_pJ;
        mem_energy += a.energy_pJ;
        port_bits[static_cast<std::size_t>(m.read_port()) % 8] +=
            static_cast<double>(a.read_words) * m.word_length_bits;
        port_bits[static_cast<std::size_t>(m.write_port()) % 8] +=
            static_cast<double>(a.write_words) * m.word_length_bits;
      }
      for (std::size_t pi = 0; pi < m.ports.size() && pi < 8; ++pi)
        demand = std::max(demand, port_bits[pi] / m.ports[pi].bw_bits_per_cycle);
    }
    double ideal = 1;
    for (auto t : t_) ideal *= static_cast<double>(t);
    const double mac_energy = static_cast<double>(macs) * acc_.unit_mac_energy_pJ();
    energy = mac_energy + mem_energy;
    const double compute = std::max(ideal, demand);
    latency = compute + prep;
    if (out) {
      out->energy_pJ = energy;
      out->mac_energy_pJ = mac_energy;
      out->latency_cycles = latency;
      out->ideal_cycles = ideal;
      out->stall_cycles = compute - ideal;
      out->prep_cycles = prep;
      out->macs = macs;
      out->spatial_utilization = static_cast<double>(macs) / (ideal * static_cast<double>(acc_.mac_count()));
      out->access.assign(access.begin(), access.begin() + static_cast<std::ptrdiff_t>(nl));
    }
  }

  std::uint64_t fp_bits(std::size_t o, int cut, bool per_pe) const {
    const auto p = static_cast<std::size_t>(cut);
    if (!per_pe) return fp_union_[o][p] * static_cast<std::uint64_t>(bits_[o]);
    // Addends reach a PE one after the other.
    std::uint64_t e = fp_pe_[o][p];
    if (o == index(Operand::I)) e /= static_cast<std::uint64_t>(layer_.input_operands);
    return e * static_cast<std::uint64_t>(bits_[o]);
  }

  void prepare(const Loop* loops, int n) const {
    if (static_cast<std::size_t>(n) >= kMaxLoops) throw ValidationError("too many loops");
    DimArray tp{1, 1, 1, 1, 1, 1};
    for (int p = 0; p <= n; ++p) {
      footprints(tp, static_cast<std::size_t>(p));
      if (p == n) break;
      const auto d = index(loops[p].dim);
      unit_[static_cast<std::size_t>(p)] = su_[d] * tp[d];
      tp[d] *= loops[p].factor;
    }
    suffix_[static_cast<std::size_t>(n)] = 1;
    for (int j = n - 1; j >= 0; --j)
      suffix_[static_cast<std::size_t>(j)] = suffix_[static_cast<std::size_t>(j) + 1] * loops[j].factor;
  }

 private:
  void footprints(const DimArray& tp, std::size_t p) const {
    DimArray ext{};
    for (std::size_t d = 0; d < kNumDims; ++d) ext[d] = std::min(layer_.bounds[d], su_[d] * tp[d]);
    const auto K = index(LoopDim::K), C = index(LoopDim::C), OX = index(LoopDim::OX), OY = index(LoopDim::OY),
               FX = index(LoopDim::FX), FY = index(LoopDim::FY);
    auto as_u = [](std::int64_t v) { return static_cast<std::uint64_t>(v); };
    const std::size_t w = index(Operand::W), i = index(Operand::I), o = index(Operand::O);
    fp_union_[w][p] = layer_.has_weights() ? as_u(ext[K] * ext[C] * ext[FX] * ext[FY]) : 0;
    fp_pe_[w][p] = layer_.has_weights() ? as_u(tp[K] * tp[C] * tp[FX] * tp[FY]) : 0;
    fp_union_[o][p] = as_u(ext[K] * ext[OX] * ext[OY]);
    fp_pe_[o][p] = as_u(tp[K] * tp[OX] * tp[OY]);
    const std::int64_t ch = layer_.channelwise() ? ext[K] : ext[C];
    const std::int64_t ch_pe = layer_.channelwise() ? tp[K] : tp[C];
    auto window = [](std::int64_t o_ext, std::int64_t f_ext, std::int64_t s) {
      return f_ext >= s ? (o_ext - 1) * s + f_ext : o_ext * f_ext;
    };
    const std::int64_t xs = window(ext[OX], ext[FX], layer_.stride_x);
    const std::int64_t ys = window(ext[OY], ext[FY], layer_.stride_y);
    const std::int64_t xs_pe = distinct_sum(layer_.stride_x * su_[OX], tp[OX], su_[FX], tp[FX]);
    const std::int64_t ys_pe = distinct_sum(layer_.stride_y * su_[OY], tp[OY], su_[FY], tp[FY]);
    const auto n_in = as_u(layer_.input_operands);
    fp_union_[i][p] = as_u(ch * xs * ys) * n_in;
    fp_pe_[i][p] = as_u(ch_pe * xs_pe * ys_pe) * n_in;
  }

  bool shifts(std::size_t o, const DimArray& d) const {
    const auto K = index(LoopDim::K), C = index(LoopDim::C), OX = index(LoopDim::OX), OY = index(LoopDim::OY),
               FX = index(LoopDim::FX), FY = index(LoopDim::FY);
    switch (static_cast<Operand>(o)) {
      case Operand::W: return d[K] != 0 || d[C] != 0 || d[FX] != 0 || d[FY] != 0;
      case Operand::O: return d[K] != 0 || d[OX] != 0 || d[OY] != 0;
      case Operand::I:
        return (layer_.channelwise() ? d[K] : d[C]) != 0 || layer_.stride_x * d[OX] + d[FX] != 0 ||
               layer_.stride_y * d[OY] + d[FY] != 0;
    }
    return true;
  }

 public:
  std::uint64_t load_count(const Loop* loops, int n, std::size_t o, int p) const {
    std::uint64_t loads = 1;
    for (int j = p; j < n; ++j) {
      if (loops[j].factor == 1) continue;
      DimArray d{};
      d[index(loops[j].dim)] += unit_[static_cast<std::size_t>(j)];
      for (int i = p; i < j; ++i)
        d[index(loops[i].dim)] -= (loops[i].factor - 1) * unit_[static_cast<std::size_t>(i)];
      if (shifts(o, d))
        loads += static_cast<std::uint64_t>((loops[j].factor - 1) * suffix_[static_cast<std::size_t>(j) + 1]);
    }
    return loads;
  }

  std::uint64_t distinct_outputs(const Loop* loops, int n, int p) const {
    std::uint64_t d = 1;
    for (int j = p; j < n; ++j) {
      LoopDim dim = loops[j].dim;
      if (dim == LoopDim::K || dim == LoopDim::OX || dim == LoopDim::OY) d *= static_cast<std::uint64_t>(loops[j].factor);
    }
    return d;
  }

  const std::vector<int>& chain(std::size_t o) const { return chain_[o]; }
  std::uint64_t pe_count() const { return npe_; }

 private:
  const LayerInstance& layer_;
  const Accelerator& acc_;
  DimArray su_{}, t_{};
  std::uint64_t npe_ = 1;
  std::array<int, 3> bits_{};
  std::array<std::vector<int>, 3> chain_;
  std::vector<int> phys_;
  mutable std::array<std::array<std::uint64_t, kMaxLoops + 1>, 3> fp_union_{}, fp_pe_{};
  mutable std::array<std::int64_t, kMaxLoops + 1> unit_{}, suffix_{};
};

Cuts to_cuts(const TemporalMapping& m) {
  Cuts c{};
  for (std::size_t o = 0; o < 3; ++o)
    for (std::size_t k = 0; k < m.cuts[o].size() && k < kMaxChain; ++k) c[o][k] = m.cuts[o][k];
  return c;
}

void check_shape(const TemporalMapping& m, const LayerInstance& layer, const Accelerator& acc, const Model& model) {
  DimArray prod{1, 1, 1, 1, 1, 1};
  for (const Loop& l : m.loops) {
    if (l.factor < 1) throw ValidationError("loop factor must be >= 1");
    prod[index(l.dim)] *= l.factor;
  }
  if (prod != model.temporal())
    throw ValidationError("mapping loop factors do not cover the temporal bounds of layer " + layer.key());
  for (Operand op : kOperands) {
    const auto& cuts = m.cuts[index(op)];
    if (cuts.size() != acc.chain(op).size())
      throw ValidationError("mapping has the wrong number of " + std::string(to_string(op)) + " boundaries");
    for (std::size_t k = 0; k < cuts.size(); ++k) {
      if (cuts[k] < 0 || cuts[k] > static_cast<int>(m.loops.size()) || (k > 0 && cuts[k] < cuts[k - 1]))
        throw ValidationError("mapping boundaries must be non-decreasing within the loop nest");
    }
    if (cuts.back() != static_cast<int>(m.loops.size()))
      throw ValidationError("top level must hold the whole loop nest");
  }
}

}  // namespace

std::string to_string(const TemporalMapping& m, const Accelerator& acc) {
  std::ostringstream os;
  os << "spatial:";
  for (LoopDim d : kLoopDims)
    if (m.spatial[index(d)] > 1) os << ' ' << to_string(d) << m.spatial[index(d)];
  os << " | loops (inner->outer):";
  for (const Loop& l : m.loops) os << ' ' << to_string(l.dim) << l.factor;
  for (Operand op : kOperands) {
    os << " | " << to_string(op) << ':';
    const auto& ch = acc.chain(op);
    for (std::size_t k = 0; k < ch.size() && k < m.cuts[index(op)].size(); ++k)
      os << ' ' << acc.level(ch[k]).name << '@' << m.cuts[index(op)][k];
  }
  return os.str();
}

std::optional<TemporalMapping> allocate_loops(const std::vector<Loop>& ordering, const LayerInstance& layer,
                                              const Accelerator& capped) {
  Model model(layer, capped);
  Cuts cuts{};
  if (!model.allocate(ordering.data(), static_cast<int>(ordering.size()), cuts)) return std::nullopt;
  TemporalMapping m;
  m.loops = ordering;
  m.spatial = model.spatial();
  for (Operand op : kOperands) {
    const auto o = index(op);
    m.cuts[o].assign(cuts[o].begin(), cuts[o].begin() + static_cast<std::ptrdiff_t>(capped.chain(op).size()));
  }
  return m;
}

std::vector<std::string> audit_mapping(const TemporalMapping& mapping, const LayerInstance& layer,
                                       const Accelerator& capped) {
  std::vector<std::string> issues;
  Model model(layer, capped);
  try {
    check_shape(mapping, layer, capped, model);
  } catch (const ValidationError& e) {
    issues.emplace_back(e.what());
    return issues;
  }
  const int n = static_cast<int>(mapping.loops.size());
  model.prepare(mapping.loops.data(), n);
  for (std::size_t lv = 0; lv < capped.levels().size(); ++lv) {
    const MemoryLevel& m = capped.level(static_cast<int>(lv));
    if (m.offchip) continue;
    std::uint64_t total = 0;
    bool placed_here = false;
    bool present = false;
    for (Operand op : kOperands) {
      const auto o = index(op);
      int pos = capped.chain_position(op, static_cast<int>(lv));
      if (pos < 0) continue;
      present = true;
      const auto& cuts = mapping.cuts[o];
      const bool top = pos + 1 == static_cast<int>(cuts.size());
      const int cut = cuts[static_cast<std::size_t>(pos)];
      total += model.fp_bits(o, cut, m.per_pe);
      if (!top && (pos == 0 || cut > cuts[static_cast<std::size_t>(pos) - 1])) placed_here = true;
    }
    if (present && placed_here && total > m.capacity_bits)
      issues.push_back("level " + m.name + " footprint " + std::to_string(total) + " bits exceeds capacity " +
                       std::to_string(m.capacity_bits));
  }
  return issues;
}

LayerCost evaluate_mapping(const TemporalMapping& mapping, const LayerInstance& layer, const Accelerator& capped) {
  auto issues = audit_mapping(mapping, layer, capped);
  if (!issues.empty()) throw CapacityError("illegal mapping: " + issues.front());
  Model model(layer, capped);
  const int n = static_cast<int>(mapping.loops.size());
  model.prepare(mapping.loops.data(), n);
  LayerCost cost;
  double e = 0, l = 0;
  model.evaluate(mapping.loops.data(), n, to_cuts(mapping), e, l, &cost);
  return cost;
}

SearchResult search_mapping(const LayerInstance& layer, const Accelerator& capped, int lpf_limit,
                            const Objective& objective) {
  Model model(layer, capped);
  const auto chain = factorization_chain(model.temporal(), lpf_limit);
  SearchResult best;
  bool found = false;
  double best_score = 0;
  Cuts cuts{}, best_cuts{};
  std::vector<Loop> best_loops;
  for (std::vector<Loop> ord : chain) {
    std::sort(ord.begin(), ord.end());
    const int n = static_cast<int>(ord.size());
    do {
      ++best.evaluated;
      if (!model.allocate(ord.data(), n, cuts)) continue;
      double e = 0, l = 0;
      model.evaluate(ord.data(), n, cuts, e, l, nullptr);
      const double s = objective.score(e, l);
      if (!found || s < best_score || (s == best_score && ord < best_loops)) {
        found = true;
        best_score = s;
        best_loops = ord;
        best_cuts = cuts;
      }
    } while (std::next_permutation(ord.begin(), ord.end()));
  }
  if (!found) throw CapacityError("no legal temporal mapping for layer " + layer.key());
  best.mapping.loops = best_loops;
  best.mapping.spatial = model.spatial();
  for (Operand op : kOperands) {
    const auto o = index(op);
    best.mapping.cuts[o].assign(best_cuts[o].begin(),
                                best_cuts[o].begin() + static_cast<std::ptrdiff_t>(capped.chain(op).size()));
  }
  model.prepare(best_loops.data(), static_cast<int>(best_loops.size()));
  double e = 0, l = 0;
  model.evaluate(best_loops.data(), static_cast<int>(best_loops.size()), best_cuts, e, l, &best.cost);
  return best;
}

}  // namespace fusecost
