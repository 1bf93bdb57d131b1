// SPDX-License-Identifier: Apache-2.0
#include "loop_sim.hpp"

#include <algorithm>
#include <set>

#include "fusecost/accelerator.hpp"

namespace fusecost::oracle {

namespace {

using Key = std::vector<std::int64_t>;

struct Nest {
  const LayerInstance& layer;
  const TemporalMapping& m;
  DimArray su{};

  // Coordinates of one point: spatial offsets plus a digit per loop.
  DimArray coords(const DimArray& spatial_pos, const std::vector<std::int64_t>& digits) const {
    DimArray idx = spatial_pos;
    DimArray weight = su;
    for (std::size_t j = 0; j < m.loops.size(); ++j) {
      const auto d = index(m.loops[j].dim);
      idx[d] += weight[d] * digits[j];
      weight[d] *= m.loops[j].factor;
    }
    return idx;
  }

  std::vector<Key> elements(Operand op, const DimArray& c) const {
    const auto K = c[index(LoopDim::K)], C = c[index(LoopDim::C)], OX = c[index(LoopDim::OX)],
               OY = c[index(LoopDim::OY)], FX = c[index(LoopDim::FX)], FY = c[index(LoopDim::FY)];
    switch (op) {
      case Operand::W:
        if (!layer.has_weights()) return {};
        return {{K, C, FX, FY}};
      case Operand::O: return {{K, OX, OY}};
      case Operand::I: {
        std::vector<Key> out;
        const auto ch = layer.channelwise() ? K : C;
        for (int s = 0; s < layer.input_operands; ++s)
          out.push_back({s, ch, OX * layer.stride_x + FX, OY * layer.stride_y + FY});
        return out;
      }
    }
    return {};
  }
};

// Iterates all digit vectors over loops [lo, hi), innermost fastest.
template <class F>
void for_digits(const TemporalMapping& m, std::size_t lo, std::size_t hi, std::vector<std::int64_t>& digits, F&& f) {
  for (std::size_t j = lo; j < hi; ++j) digits[j] = 0;
  while (true) {
    f();
    std::size_t j = lo;
    for (; j < hi; ++j) {
      if (++digits[j] < m.loops[j].factor) break;
      digits[j] = 0;
    }
    if (j == hi) return;
  }
}

template <class F>
void for_spatial(const DimArray& su, F&& f) {
  DimArray pos{};
  while (true) {
    f(pos);
    std::size_t d = 0;
    for (; d < pos.size(); ++d) {
      if (++pos[d] < su[d]) break;
      pos[d] = 0;
    }
    if (d == pos.size()) return;
  }
}

std::uint64_t words(std::uint64_t elements, int bits, std::uint32_t wl) {
  return (elements * static_cast<std::uint64_t>(bits) + wl - 1) / wl;
}

}  // namespace

std::vector<std::array<AccessCount, 3>> simulate_transfers(const TemporalMapping& mapping, const LayerInstance& layer,
                                                           const Accelerator& capped) {
  Nest nest{layer, mapping, mapping.spatial};
  const std::size_t n = mapping.loops.size();
  std::vector<std::array<AccessCount, 3>> acc(capped.levels().size());
  std::uint64_t npe = 1;
  for (auto s : nest.su) npe *= static_cast<std::uint64_t>(s);

  for (Operand op : kOperands) {
    const auto o = index(op);
    const auto& chain = capped.chain(op);
    const int bits = op == Operand::W ? layer.weight_bits : op == Operand::I ? layer.input_bits : layer.output_bits;
    if (op == Operand::W && !layer.has_weights()) continue;

    // Innermost level: one access per MAC and per operand element it touches.
    {
      const MemoryLevel& low = capped.level(chain[0]);
      const std::uint64_t per = std::max<std::uint64_t>(1, words(1, bits, low.word_length_bits));
      std::vector<std::int64_t> digits(n, 0);
      std::uint64_t touches = 0, macs = 0;
      for_digits(mapping, 0, n, digits, [&] {
        for_spatial(nest.su, [&](const DimArray& pos) {
          ++macs;
          touches += nest.elements(op, nest.coords(pos, digits)).size();
        });
      });
      AccessCount& a = acc[static_cast<std::size_t>(chain[0])][o];
      a.read_elements += touches;
      a.read_words += touches * per;
      if (op == Operand::O) {
        a.write_elements += macs;
        a.write_words += macs * per;
      }
    }

    for (std::size_t b = 0; b + 1 < chain.size(); ++b) {
      const auto p = static_cast<std::size_t>(mapping.cuts[o][b]);
      const MemoryLevel& low = capped.level(chain[b]);
      const MemoryLevel& up = capped.level(chain[b + 1]);
      AccessCount& lo = acc[static_cast<std::size_t>(chain[b])][o];
      AccessCount& hi = acc[static_cast<std::size_t>(chain[b + 1])][o];

      std::vector<std::int64_t> digits(n, 0);
      std::set<Key> prev;
      bool have_prev = false;
      std::set<std::set<Key>> seen;
      std::uint64_t prev_low_elems = 0, prev_low_words = 0;
      auto close_segment = [&](const std::set<Key>& block) {
        if (op != Operand::O) return;
        hi.write_elements += block.size();
        hi.write_words += words(block.size(), bits, up.word_length_bits);
        lo.read_elements += prev_low_elems;
        lo.read_words += prev_low_words;
      };
      for_digits(mapping, p, n, digits, [&] {
        std::set<Key> block;
        std::vector<std::set<Key>> per_pe(low.per_pe ? npe : 0);
        std::vector<std::int64_t> inner = digits;
        for_digits(mapping, 0, p, inner, [&] {
          std::size_t pe = 0;
          for_spatial(nest.su, [&](const DimArray& pos) {
            for (auto& e : nest.elements(op, nest.coords(pos, inner))) {
              block.insert(e);
              if (low.per_pe) per_pe[pe].insert(e);
            }
            ++pe;
          });
        });
        if (have_prev && block == prev) return;
        if (have_prev) close_segment(prev);
        std::uint64_t low_elems = 0, low_words = 0;
        if (low.per_pe) {
          for (const auto& s : per_pe) {
            low_elems += s.size();
            low_words += words(s.size(), bits, low.word_length_bits);
          }
        } else {
          low_elems = block.size();
          low_words = words(block.size(), bits, low.word_length_bits);
        }
        if (op == Operand::O) {
          if (seen.count(block)) {
            hi.read_elements += block.size();
            hi.read_words += words(block.size(), bits, up.word_length_bits);
            lo.write_elements += low_elems;
            lo.write_words += low_words;
          }
          seen.insert(block);
        } else {
          hi.read_elements += block.size();
          hi.read_words += words(block.size(), bits, up.word_length_bits);
          lo.write_elements += low_elems;
          lo.write_words += low_words;
        }
        prev_low_elems = low_elems;
        prev_low_words = low_words;
        prev = std::move(block);
        have_prev = true;
      });
      if (have_prev) close_segment(prev);
    }
  }
  return acc;
}

}  // namespace fusecost::oracle
