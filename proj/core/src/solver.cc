// Copyright 2026 The Micropack Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "micropack/solver.h"

#include <algorithm>
#include <functional>
#include <iterator>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <set>
#include <sstream>

#include "micropack/errors.h"
#include "micropack/simulate.h"

namespace micropack {
namespace {

using Wide = __int128;

Wide abs_wide(Wide x) { return x < 0 ? -x : x; }

// Grid costs of a sample stream under one measure. Sequence positions count
// units in visiting order: head first for forward, tail first for backward.
class CostTable {
 public:
  CostTable(const std::vector<Sample>& samples, const ModelShape& model, TokenCount alignment,
            const CostMultipliers* backward, bool tail_first)
      : backward_(backward ? std::optional<CostMultipliers>(*backward) : std::nullopt),
        tail_first_(tail_first) {
    for (const auto& s : samples) {
      const std::int64_t u = unit_count(s, alignment);
      std::vector<TokenCount> bounds(static_cast<std::size_t>(u + 1));
      for (std::int64_t i = 0; i < u; ++i) bounds[static_cast<std::size_t>(i)] = i * alignment;
      bounds.back() = s.length;
      std::vector<SliceCost> prefix(bounds.size());
      for (std::size_t i = 1; i < bounds.size(); ++i) prefix[i] = slice_cost(model, s, 0, bounds[i]);
      bounds_.push_back(std::move(bounds));
      prefix_.push_back(std::move(prefix));
      ids_.push_back(s.id);
      total_ += cost(static_cast<int>(ids_.size()) - 1, 0, u);
      units_ += u;
    }
  }

  int samples() const { return static_cast<int>(ids_.size()); }
  std::int64_t units(int i) const { return static_cast<std::int64_t>(bounds_[static_cast<std::size_t>(i)].size()) - 1; }
  std::int64_t total_units() const { return units_; }
  SampleId id(int i) const { return ids_[static_cast<std::size_t>(i)]; }
  Wide total() const { return total_; }

  std::pair<std::size_t, std::size_t> grid(int i, std::int64_t p, std::int64_t q) const {
    const std::int64_t u = units(i);
    if (tail_first_) return {static_cast<std::size_t>(u - q), static_cast<std::size_t>(u - p)};
    return {static_cast<std::size_t>(p), static_cast<std::size_t>(q)};
  }

  Slice slice(int i, std::int64_t p, std::int64_t q) const {
    const auto [a, b] = grid(i, p, q);
    const auto& bounds = bounds_[static_cast<std::size_t>(i)];
    return {id(i), bounds[a], bounds[b]};
  }

  Flops cost(int i, std::int64_t p, std::int64_t q) const {
    if (q <= p) return 0;
    const auto [a, b] = grid(i, p, q);
    const auto& prefix = prefix_[static_cast<std::size_t>(i)];
    const SliceCost fwd = prefix[b] - prefix[a];
    return backward_ ? backward_flops(fwd, *backward_).total() : fwd.total();
  }

 private:
  std::optional<CostMultipliers> backward_;
  bool tail_first_;
  std::vector<std::vector<TokenCount>> bounds_;
  std::vector<std::vector<SliceCost>> prefix_;
  std::vector<SampleId> ids_;
  Wide total_ = 0;
  std::int64_t units_ = 0;
};

struct Piece {
  int sample = 0;
  std::int64_t p = 0;  // sequence positions [p, q)
  std::int64_t q = 0;
  Flops cost = 0;
};

using Packing = std::vector<std::vector<Piece>>;

// Water-filling: pack k closes at whichever grid point brings the cumulative
// cost nearest to (k + 1) / m of the total, while keeping enough units for
// the packs after it.
Packing greedy_fill(const CostTable& t, int m) {
  if (m < 1) throw InvalidInput("m must be >= 1");
  if (t.total_units() < m) {
    throw Infeasible("cannot form " + std::to_string(m) + " nonempty packs from " +
                     std::to_string(t.total_units()) + " slicing units");
  }
  Packing packs(static_cast<std::size_t>(m));
  const Wide total = t.total();
  Wide done = 0;
  Flops cur = 0;
  int k = 0;
  std::int64_t left = t.total_units();

  for (int i = 0; i < t.samples(); ++i) {
    const std::int64_t u = t.units(i);
    std::int64_t p = 0;
    while (p < u) {
      auto& pack = packs[static_cast<std::size_t>(k)];
      const std::int64_t avail = u - p;
      auto take = [&](std::int64_t j) {
        const Flops c = t.cost(i, p, p + j);
        pack.push_back({i, p, p + j, c});
        cur += c;
        left -= j;
        p += j;
      };
      if (k == m - 1) {
        take(avail);
        continue;
      }
      const std::int64_t cap = left - (m - 1 - k);
      const Wide target = total * (k + 1);
      auto level = [&](std::int64_t j) { return (done + cur + t.cost(i, p, p + j)) * m; };
      if (avail <= cap && level(avail) <= target) {
        take(avail);
        continue;
      }
      const std::int64_t hi = std::min(avail, cap);
      std::int64_t lo = 0;
      std::int64_t top = hi;
      if (level(0) > target) {
        top = 0;
      } else {
        while (lo < top) {
          const std::int64_t mid = lo + (top - lo + 1) / 2;
          if (level(mid) <= target) {
            lo = mid;
          } else {
            top = mid - 1;
          }
        }
      }
      std::int64_t j = top;
      if (j < hi && abs_wide(level(j + 1) - target) < abs_wide(level(j) - target)) ++j;
      if (j == 0 && pack.empty()) j = 1;
      if (j > 0) take(j);
      done += cur;
      cur = 0;
      ++k;
    }
  }
  return packs;
}

// Best fit with splitting: pack k aims at an equal share of what is left.
// It takes the costliest whole remainder of any sample that still fits;
// when none fits it takes the prefix of the largest remainder that lands
// nearest the share. Unlike greedy_fill this can put the heads of several
// samples in one pack, which matters when packs are only a few units wide.
Packing best_fit_fill(const CostTable& t, int m) {
  if (m < 1) throw InvalidInput("m must be >= 1");
  if (t.total_units() < m) {
    throw Infeasible("cannot form " + std::to_string(m) + " nonempty packs from " +
                     std::to_string(t.total_units()) + " slicing units");
  }
  Packing packs(static_cast<std::size_t>(m));
  std::vector<std::int64_t> next(static_cast<std::size_t>(t.samples()), 0);
  std::set<std::pair<Flops, int>> rest;  // (remaining cost, sample)
  for (int i = 0; i < t.samples(); ++i) rest.emplace(t.cost(i, 0, t.units(i)), i);
  Wide left_cost = t.total();
  std::int64_t left = t.total_units();

  for (int k = 0; k < m; ++k) {
    auto& pack = packs[static_cast<std::size_t>(k)];
    auto take = [&](int i, std::int64_t j) {
      auto& p = next[static_cast<std::size_t>(i)];
      const std::int64_t u = t.units(i);
      rest.erase({t.cost(i, p, u), i});
      const Flops c = t.cost(i, p, p + j);
      if (!pack.empty() && pack.back().sample == i && pack.back().q == p) {
        pack.back().q += j;
        pack.back().cost = t.cost(i, pack.back().p, pack.back().q);
      } else {
        pack.push_back({i, p, p + j, c});
      }
      p += j;
      left -= j;
      left_cost -= c;
      if (p < u) rest.emplace(t.cost(i, p, u), i);
    };
    if (k == m - 1) {
      while (!rest.empty()) {
        const int i = rest.begin()->second;
        take(i, t.units(i) - next[static_cast<std::size_t>(i)]);
      }
      break;
    }
    const Wide share = left_cost / (m - k);
    Wide load = 0;
    while (!rest.empty()) {
      const std::int64_t cap = left - (m - 1 - k);
      if (cap <= 0) break;
      const Wide budget = share - load;
      auto fit = rest.upper_bound({static_cast<Flops>(std::max<Wide>(budget, -1)), INT32_MAX});
      bool whole = false;
      while (fit != rest.begin()) {
        --fit;
        const int i = fit->second;
        if (t.units(i) - next[static_cast<std::size_t>(i)] <= cap) {
          load += fit->first;
          take(i, t.units(i) - next[static_cast<std::size_t>(i)]);
          whole = true;
          break;
        }
      }
      if (whole) continue;
      const int i = std::prev(rest.end())->second;
      const std::int64_t p = next[static_cast<std::size_t>(i)];
      const std::int64_t hi = std::min(t.units(i) - p, cap);
      std::int64_t lo = 0;
      std::int64_t top = hi;
      while (lo < top) {
        const std::int64_t mid = lo + (top - lo + 1) / 2;
        if (t.cost(i, p, p + mid) <= budget) {
          lo = mid;
        } else {
          top = mid - 1;
        }
      }
      std::int64_t j = lo;
      if (j < hi && abs_wide(t.cost(i, p, p + j + 1) - budget) < abs_wide(t.cost(i, p, p + j) - budget)) ++j;
      if (j == 0 && pack.empty()) j = 1;
      if (j == 0) break;
      load += t.cost(i, p, p + j);
      take(i, j);
      if (load >= share) break;
    }
  }
  return packs;
}

Flops pack_cost(const std::vector<Piece>& pack) {
  Flops c = 0;
  for (const auto& pc : pack) c += pc.cost;
  return c;
}

Flops max_pack_cost(const Packing& packs) {
  Flops top = 0;
  for (const auto& pk : packs) top = std::max(top, pack_cost(pk));
  return top;
}


// Local search on the heaviest pack: move or swap whole samples, or shift a
// boundary unit of a split sample to a neighbouring pack. A move is applied
// only when both touched packs end strictly below the old maximum.
void refine(const CostTable& t, Packing& packs, int passes) {
  const int m = static_cast<int>(packs.size());
  if (m < 2) return;
  std::vector<Flops> load(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) load[static_cast<std::size_t>(k)] = pack_cost(packs[static_cast<std::size_t>(k)]);

  for (int pass = 0; pass < passes; ++pass) {
    int heavy = 0;
    int light = -1;
    for (int k = 1; k < m; ++k) {
      if (load[static_cast<std::size_t>(k)] > load[static_cast<std::size_t>(heavy)]) heavy = k;
    }
    for (int k = 0; k < m; ++k) {
      if (k != heavy && (light < 0 || load[static_cast<std::size_t>(k)] < load[static_cast<std::size_t>(light)])) light = k;
    }
    const Flops top = load[static_cast<std::size_t>(heavy)];
    auto& hp = packs[static_cast<std::size_t>(heavy)];

    // Pack holding each piece of a sample, keyed by start position.
    auto locate = [&](int sample, std::int64_t p) -> std::pair<int, int> {
      for (int k = 0; k < m; ++k) {
        const auto& pk = packs[static_cast<std::size_t>(k)];
        for (int x = 0; x < static_cast<int>(pk.size()); ++x) {
          if (pk[static_cast<std::size_t>(x)].sample == sample && pk[static_cast<std::size_t>(x)].p <= p &&
              p < pk[static_cast<std::size_t>(x)].q) {
            return {k, x};
          }
        }
      }
      return {-1, -1};
    };

    Flops best = top;
    std::function<void()> apply;
    auto consider = [&](Flops a, Flops b, auto&& fn) {
      const Flops worst = std::max(a, b);
      if (worst < best) {
        best = worst;
        apply = fn;
      }
    };
    const bool can_shrink = hp.size() > 1;

    for (int x = 0; x < static_cast<int>(hp.size()); ++x) {
      const Piece pc = hp[static_cast<std::size_t>(x)];
      const std::int64_t u = t.units(pc.sample);
      const bool whole = pc.p == 0 && pc.q == u;
      if (whole) {
        if (can_shrink) {
          consider(top - pc.cost, load[static_cast<std::size_t>(light)] + pc.cost, [&, x, pc] {
            hp.erase(hp.begin() + x);
            packs[static_cast<std::size_t>(light)].push_back(pc);
            load[static_cast<std::size_t>(heavy)] -= pc.cost;
            load[static_cast<std::size_t>(light)] += pc.cost;
          });
        }
        for (int k = 0; k < m; ++k) {
          if (k == heavy) continue;
          auto& other = packs[static_cast<std::size_t>(k)];
          for (int y = 0; y < static_cast<int>(other.size()); ++y) {
            const Piece oc = other[static_cast<std::size_t>(y)];
            if (oc.cost >= pc.cost || oc.p != 0 || oc.q != t.units(oc.sample)) continue;
            consider(top - pc.cost + oc.cost, load[static_cast<std::size_t>(k)] - oc.cost + pc.cost,
                     [&, x, y, k, pc, oc] {
                       hp[static_cast<std::size_t>(x)] = oc;
                       packs[static_cast<std::size_t>(k)][static_cast<std::size_t>(y)] = pc;
                       load[static_cast<std::size_t>(heavy)] += oc.cost - pc.cost;
                       load[static_cast<std::size_t>(k)] += pc.cost - oc.cost;
                     });
          }
        }
        continue;
      }
      const bool drops_piece = pc.q - pc.p == 1;
      if (drops_piece && !can_shrink) continue;

      // Last unit of the piece to the pack of the following piece, or to the
      // next pack when this piece ends the sample.
      {
        const auto [k2, y2] = pc.q < u ? locate(pc.sample, pc.q) : std::pair<int, int>{heavy + 1, -1};
        if (k2 < m) {
          const Flops shrunk = t.cost(pc.sample, pc.p, pc.q - 1);
          const Piece next = y2 >= 0 ? packs[static_cast<std::size_t>(k2)][static_cast<std::size_t>(y2)]
                                     : Piece{pc.sample, pc.q, pc.q, 0};
          const Flops grown = t.cost(pc.sample, pc.q - 1, next.q);
          consider(top - pc.cost + shrunk, load[static_cast<std::size_t>(k2)] - next.cost + grown,
                   [&, x, k2 = k2, y2 = y2, pc, next, shrunk, grown] {
                     auto& dst = packs[static_cast<std::size_t>(k2)];
                     if (y2 >= 0) {
                       dst[static_cast<std::size_t>(y2)] = {pc.sample, pc.q - 1, next.q, grown};
                     } else {
                       dst.push_back({pc.sample, pc.q - 1, pc.q, grown});
                     }
                     load[static_cast<std::size_t>(k2)] += grown - next.cost;
                     load[static_cast<std::size_t>(heavy)] += shrunk - pc.cost;
                     if (pc.q - 1 == pc.p) {
                       hp.erase(hp.begin() + x);
                     } else {
                       hp[static_cast<std::size_t>(x)] = {pc.sample, pc.p, pc.q - 1, shrunk};
                     }
                   });
        }
      }
      // First unit of the piece to the pack of the preceding piece, or to the
      // previous pack when this piece starts the sample.
      {
        const auto [k0, y0] = pc.p > 0 ? locate(pc.sample, pc.p - 1) : std::pair<int, int>{heavy - 1, -1};
        if (k0 >= 0) {
          const Flops shrunk = t.cost(pc.sample, pc.p + 1, pc.q);
          const Piece prev = y0 >= 0 ? packs[static_cast<std::size_t>(k0)][static_cast<std::size_t>(y0)]
                                     : Piece{pc.sample, pc.p, pc.p, 0};
          const Flops grown = t.cost(pc.sample, prev.p, pc.p + 1);
          consider(top - pc.cost + shrunk, load[static_cast<std::size_t>(k0)] - prev.cost + grown,
                   [&, x, k0 = k0, y0 = y0, pc, prev, shrunk, grown] {
                     auto& dst = packs[static_cast<std::size_t>(k0)];
                     if (y0 >= 0) {
                       dst[static_cast<std::size_t>(y0)] = {pc.sample, prev.p, pc.p + 1, grown};
                     } else {
                       dst.push_back({pc.sample, pc.p, pc.p + 1, grown});
                     }
                     load[static_cast<std::size_t>(k0)] += grown - prev.cost;
                     load[static_cast<std::size_t>(heavy)] += shrunk - pc.cost;
                     if (pc.p + 1 == pc.q) {
                       hp.erase(hp.begin() + x);
                     } else {
                       hp[static_cast<std::size_t>(x)] = {pc.sample, pc.p + 1, pc.q, shrunk};
                     }
                   });
        }
      }
    }
    // Samples held only by the heavy pack and one other pack are re-split
    // between the two: whole samples by best fit towards an even split and
    // one sample, each candidate in turn, cut at the unit nearest the rest.
    std::vector<std::vector<int>> owners(static_cast<std::size_t>(t.samples()));
    for (int k = 0; k < m; ++k) {
      for (const auto& pc : packs[static_cast<std::size_t>(k)]) {
        auto& o = owners[static_cast<std::size_t>(pc.sample)];
        if (o.empty() || o.back() != k) o.push_back(k);
      }
    }
    for (int k = 0; k < m; ++k) {
      if (k == heavy) continue;
      const int lo = std::min(heavy, k);
      const int hi = std::max(heavy, k);
      auto& lp = packs[static_cast<std::size_t>(lo)];
      auto& up = packs[static_cast<std::size_t>(hi)];
      std::vector<int> free;
      auto is_free = [&](int sample) {
        for (int o : owners[static_cast<std::size_t>(sample)]) {
          if (o != lo && o != hi) return false;
        }
        return true;
      };
      Flops fixed_lo = load[static_cast<std::size_t>(lo)];
      Flops fixed_hi = load[static_cast<std::size_t>(hi)];
      bool lo_keeps = false;
      bool hi_keeps = false;
      for (const auto* pk : {&lp, &up}) {
        for (const auto& pc : *pk) {
          if (!is_free(pc.sample)) {
            (pk == &lp ? lo_keeps : hi_keeps) = true;
            continue;
          }
          (pk == &lp ? fixed_lo : fixed_hi) -= pc.cost;
          if (std::find(free.begin(), free.end(), pc.sample) == free.end()) free.push_back(pc.sample);
        }
      }
      if (free.empty() || free.size() > 64) continue;
      std::vector<Flops> whole(free.size());
      Wide free_total = 0;
      for (std::size_t f = 0; f < free.size(); ++f) {
        whole[f] = t.cost(free[f], 0, t.units(free[f]));
        free_total += whole[f];
      }
      std::vector<std::size_t> order(free.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return whole[a] != whole[b] ? whole[a] > whole[b] : free[a] < free[b];
      });
      // Twice the lower pack's share of the free work.
      const Wide want2 = static_cast<Wide>(fixed_hi) + free_total - fixed_lo;
      auto offer = [&](const std::vector<std::int64_t>& cut) {
        Wide a = 0;
        bool lo_any = lo_keeps;
        bool hi_any = hi_keeps;
        for (std::size_t f = 0; f < free.size(); ++f) {
          a += t.cost(free[f], 0, cut[f]);
          lo_any |= cut[f] > 0;
          hi_any |= cut[f] < t.units(free[f]);
        }
        if (!lo_any || !hi_any) return;
        const Flops new_lo = fixed_lo + static_cast<Flops>(a);
        const Flops new_hi = fixed_hi + static_cast<Flops>(free_total - a);
        consider(new_lo, new_hi, [&, lo, hi, free, cut, new_lo, new_hi] {
          auto& dst_lo = packs[static_cast<std::size_t>(lo)];
          auto& dst_hi = packs[static_cast<std::size_t>(hi)];
          auto held = [&](const Piece& pc) {
            return std::find(free.begin(), free.end(), pc.sample) != free.end();
          };
          dst_lo.erase(std::remove_if(dst_lo.begin(), dst_lo.end(), held), dst_lo.end());
          dst_hi.erase(std::remove_if(dst_hi.begin(), dst_hi.end(), held), dst_hi.end());
          for (std::size_t f = 0; f < free.size(); ++f) {
            const std::int64_t u = t.units(free[f]);
            if (cut[f] > 0) dst_lo.push_back({free[f], 0, cut[f], t.cost(free[f], 0, cut[f])});
            if (cut[f] < u) dst_hi.push_back({free[f], cut[f], u, t.cost(free[f], cut[f], u)});
          }
          load[static_cast<std::size_t>(lo)] = new_lo;
          load[static_cast<std::size_t>(hi)] = new_hi;
        });
      };
      // Few enough cut combinations: try them all.
      std::int64_t combos = 1;
      for (int f : free) {
        combos *= t.units(f) + 1;
        if (combos > 1024) break;
      }
      if (combos <= 1024) {
        std::vector<std::int64_t> cut(free.size(), 0);
        for (;;) {
          offer(cut);
          std::size_t f = 0;
          while (f < free.size() && cut[f] == t.units(free[f])) cut[f++] = 0;
          if (f == free.size()) break;
          ++cut[f];
        }
        continue;
      }
      for (std::size_t x : order) {
        std::vector<std::int64_t> cut(free.size(), 0);
        Wide a = 0;
        for (std::size_t f : order) {
          if (f == x) continue;
          if (2 * (a + whole[f]) <= want2) {
            cut[f] = t.units(free[f]);
            a += whole[f];
          }
        }
        const int sx = free[x];
        const std::int64_t ux = t.units(sx);
        std::int64_t j = 0;
        std::int64_t top_j = ux;
        while (j < top_j) {
          const std::int64_t mid = j + (top_j - j + 1) / 2;
          if (2 * (a + t.cost(sx, 0, mid)) <= want2) {
            j = mid;
          } else {
            top_j = mid - 1;
          }
        }
        if (j < ux && abs_wide(want2 - 2 * (a + t.cost(sx, 0, j + 1))) <
                          abs_wide(want2 - 2 * (a + t.cost(sx, 0, j)))) {
          ++j;
        }
        cut[x] = j;
        offer(cut);
      }
    }
    if (!apply) return;
    apply();
  }
}

// Water-filling, refined. When that misses the mean by more than 5%, best fit
// is tried as well and the lower bottleneck wins; ties keep the stream.
Packing partition(const CostTable& t, int m, int passes) {
  Packing stream = greedy_fill(t, m);
  refine(t, stream, passes);
  // No packing beats the mean, so within 5% of it the stream is kept for
  // its locality: every sample's slices sit in consecutive packs.
  if (static_cast<Wide>(max_pack_cost(stream)) * m * 20 <= t.total() * 21) return stream;
  Packing fitted = best_fit_fill(t, m);
  refine(t, fitted, passes);
  return max_pack_cost(fitted) < max_pack_cost(stream) ? fitted : stream;
}

std::vector<MicroPack> to_micropacks(const CostTable& t, Packing& packs,
                                     const std::vector<Sample>& samples, const ModelShape& model,
                                     const CostMultipliers& mult) {
  std::vector<MicroPack> out(packs.size());
  for (std::size_t k = 0; k < packs.size(); ++k) {
    auto& pk = packs[k];
    std::sort(pk.begin(), pk.end(), [](const Piece& a, const Piece& b) { return a.sample < b.sample; });
    for (const auto& pc : pk) out[k].slices.push_back(t.slice(pc.sample, pc.p, pc.q));
  }
  annotate_packs(out, samples, model, mult);
  return out;
}

void require_samples(const std::vector<Sample>& samples, int m) {
  if (samples.empty()) throw InvalidInput("sample stream is empty");
  if (m < 1) throw InvalidInput("m must be >= 1");
}

bool by_cost_desc(const std::pair<Flops, SampleId>& a, const std::pair<Flops, SampleId>& b) {
  return a.first != b.first ? a.first > b.first : a.second < b.second;
}

// Sorts samples by descending cost, ascending id on ties.
std::vector<Sample> sorted_by_cost(std::vector<Sample> samples, const ModelShape& model) {
  std::vector<std::pair<Flops, std::size_t>> keys;
  keys.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) keys.emplace_back(sample_cost(model, samples[i]), i);
  std::sort(keys.begin(), keys.end(), [&](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : samples[a.second].id < samples[b.second].id;
  });
  std::vector<Sample> out;
  out.reserve(samples.size());
  for (const auto& [c, i] : keys) out.push_back(samples[i]);
  return out;
}

// LPT of `samples` (already sorted) onto `ranks` starting from `load`.
void lpt(const std::vector<Sample>& samples, const std::vector<int>& ranks,
         const ModelShape& model, DpAssignment& assign) {
  using Slot = std::pair<Flops, int>;
  std::priority_queue<Slot, std::vector<Slot>, std::greater<>> heap;
  for (int r : ranks) heap.emplace(assign.per_rank_load[static_cast<std::size_t>(r)], r);
  for (const auto& s : samples) {
    auto [load, r] = heap.top();
    heap.pop();
    const Flops c = sample_cost(model, s);
    assign.per_rank_samples[static_cast<std::size_t>(r)].push_back(s);
    assign.per_rank_load[static_cast<std::size_t>(r)] = load + c;
    heap.emplace(load + c, r);
  }
}

}  // namespace

void SolverOptions::validate() const {
  if (alignment < 1) throw InvalidInput("solver.alignment must be >= 1");
  if (i_candidates.empty()) throw InvalidInput("solver.i_candidates must be nonempty");
  for (std::size_t i = 0; i < i_candidates.size(); ++i) {
    if (i_candidates[i] < 1 || (i > 0 && i_candidates[i] <= i_candidates[i - 1])) {
      throw InvalidInput("solver.i_candidates must be positive and strictly increasing");
    }
  }
  if (refinement_passes < 0) throw InvalidInput("solver.refinement_passes must be >= 0");
  if (!(outlier_threshold > 0.0)) throw InvalidInput("solver.outlier_threshold must be > 0");
  if (jobs < 1) throw InvalidInput("solver.jobs must be >= 1");
}

Flops sample_cost(const ModelShape& model, const Sample& sample) {
  return slice_cost(model, sample, 0, sample.length).total();
}

DpAssignment phase1_assign(const GlobalBatch& batch, int dp, const ModelShape& model) {
  if (dp < 1) throw InvalidInput("dp must be >= 1");
  if (batch.samples.empty()) throw InvalidInput("global batch is empty");
  SampleIndex check(batch.samples);  // rejects duplicate ids
  DpAssignment assign;
  assign.per_rank_samples.resize(static_cast<std::size_t>(dp));
  assign.per_rank_load.assign(static_cast<std::size_t>(dp), 0);
  const auto sorted = sorted_by_cost(batch.samples, model);
  Wide total = 0;
  for (const auto& s : sorted) total += sample_cost(model, s);
  assign.per_rank_capacity.assign(static_cast<std::size_t>(dp), static_cast<Flops>(total / dp));
  std::vector<int> ranks(static_cast<std::size_t>(dp));
  std::iota(ranks.begin(), ranks.end(), 0);
  lpt(sorted, ranks, model, assign);
  return assign;
}

std::vector<SampleId> detect_outliers(const DpAssignment& assign, const SolverOptions& opts,
                                      const ModelShape& model) {
  const auto dp = static_cast<long double>(assign.per_rank_capacity.size());
  long double capacity_sum = 0;
  for (Flops c : assign.per_rank_capacity) capacity_sum += static_cast<long double>(c);
  const long double bound = static_cast<long double>(opts.outlier_threshold) * capacity_sum;
  std::vector<std::pair<Flops, SampleId>> found;
  for (const auto& rank : assign.per_rank_samples) {
    for (const auto& s : rank) {
      if (s.cp_degree > 1) continue;  // already a merged share
      const Flops f = sample_cost(model, s);
      if (static_cast<long double>(f) * dp > bound) found.emplace_back(f, s.id);
    }
  }
  std::sort(found.begin(), found.end(), by_cost_desc);
  std::vector<SampleId> ids;
  for (const auto& [f, id] : found) ids.push_back(id);
  return ids;
}

DpMergeGroup plan_dp_merge(const DpAssignment& assign, SampleId outlier, const ModelShape& model,
                           const std::vector<int>& unavailable) {
  const int dp = static_cast<int>(assign.per_rank_samples.size());
  if (dp < 2) throw Infeasible("DP-Merge needs dp >= 2");
  int home = -1;
  Flops f = 0;
  for (int r = 0; r < dp && home < 0; ++r) {
    for (const auto& s : assign.per_rank_samples[static_cast<std::size_t>(r)]) {
      if (s.id == outlier) {
        home = r;
        f = sample_cost(model, s);
        break;
      }
    }
  }
  if (home < 0) throw InvalidInput("outlier sample " + std::to_string(outlier) + " is not assigned");
  auto is_unavailable = [&](int r) {
    return std::find(unavailable.begin(), unavailable.end(), r) != unavailable.end();
  };
  if (is_unavailable(home)) {
    throw Infeasible("outlier " + std::to_string(outlier) + " sits on rank " + std::to_string(home) +
                     ", which already belongs to a DP-Merge group");
  }
  std::vector<int> pool;
  for (int r = 0; r < dp; ++r) {
    if (r != home && !is_unavailable(r)) pool.push_back(r);
  }
  std::stable_sort(pool.begin(), pool.end(), [&](int a, int b) {
    return assign.per_rank_load[static_cast<std::size_t>(a)] < assign.per_rank_load[static_cast<std::size_t>(b)];
  });

  for (int g = 2; g <= dp && g - 1 <= static_cast<int>(pool.size()); ++g) {
    std::vector<int> members{home};
    members.insert(members.end(), pool.begin(), pool.begin() + (g - 1));
    std::sort(members.begin(), members.end());
    Flops min_cap = std::numeric_limits<Flops>::max();
    for (int r = 0; r < dp; ++r) {
      if (g < dp && std::binary_search(members.begin(), members.end(), r)) continue;
      min_cap = std::min(min_cap, assign.per_rank_capacity[static_cast<std::size_t>(r)]);
    }
    if (static_cast<Wide>(f) <= static_cast<Wide>(min_cap) * g) return {members, g, outlier};
  }
  std::ostringstream msg;
  msg << "outlier sample " << outlier << " (" << f << " FLOPs) cannot be absorbed by DP-Merge with "
      << dp << " ranks; use a larger cluster or a smaller batch";
  throw Infeasible(msg.str());
}

void apply_dp_merge(DpAssignment& assign, const DpMergeGroup& group, const ModelShape& model) {
  std::optional<Sample> outlier;
  std::vector<Sample> pool;
  for (int r : group.member_ranks) {
    auto& list = assign.per_rank_samples.at(static_cast<std::size_t>(r));
    for (const auto& s : list) {
      if (s.id == group.outlier_sample_id) {
        outlier = s;
      } else {
        pool.push_back(s);
      }
    }
    list.clear();
  }
  if (!outlier) throw InvalidInput("DP-Merge group does not hold its outlier sample");
  Sample share = *outlier;
  share.cp_degree = outlier->cp_degree * group.cp_degree;
  const Flops share_cost = sample_cost(model, share);
  for (int r : group.member_ranks) {
    assign.per_rank_samples[static_cast<std::size_t>(r)].push_back(share);
    assign.per_rank_load[static_cast<std::size_t>(r)] = share_cost;
  }
  lpt(sorted_by_cost(std::move(pool), model), group.member_ranks, model, assign);
  for (int r : group.member_ranks) {
    auto& list = assign.per_rank_samples[static_cast<std::size_t>(r)];
    list = sorted_by_cost(std::move(list), model);
  }
}

std::vector<DpMergeGroup> resolve_outliers(DpAssignment& assign, const SolverOptions& opts,
                                           const ModelShape& model) {
  std::vector<DpMergeGroup> groups;
  if (assign.per_rank_samples.size() < 2) return groups;
  std::vector<int> used;
  while (true) {
    const auto outliers = detect_outliers(assign, opts, model);
    if (outliers.empty()) break;
    DpMergeGroup group = plan_dp_merge(assign, outliers.front(), model, used);
    apply_dp_merge(assign, group, model);
    used.insert(used.end(), group.member_ranks.begin(), group.member_ranks.end());
    groups.push_back(std::move(group));
  }
  return groups;
}

std::int64_t unit_count(const Sample& sample, TokenCount alignment) {
  if (alignment < 1) throw InvalidInput("alignment must be >= 1");
  return std::max<std::int64_t>(1, sample.length / alignment);
}

std::vector<MicroPack> phase2_partition(const std::vector<Sample>& samples, int m,
                                        const ModelShape& model, const SolverOptions& opts) {
  require_samples(samples, m);
  const CostTable t(samples, model, opts.alignment, nullptr, false);
  Packing packs = partition(t, m, opts.refinement_passes);
  return to_micropacks(t, packs, samples, model, CostMultipliers{});
}

std::vector<MicroPack> asymmetric_repartition(const std::vector<Sample>& samples, int m,
                                              const ModelShape& model,
                                              const CostMultipliers& mult,
                                              const SolverOptions& opts) {
  require_samples(samples, m);
  const CostTable t(samples, model, opts.alignment, &mult, true);
  Packing packs = partition(t, m, opts.refinement_passes);
  return to_micropacks(t, packs, samples, model, mult);
}

std::vector<MicroPack> mirrored_backward(const std::vector<MicroPack>& fwd_packs,
                                         const std::vector<Sample>& samples,
                                         const ModelShape& model, const CostMultipliers& mult) {
  std::vector<MicroPack> out(fwd_packs.rbegin(), fwd_packs.rend());
  annotate_packs(out, samples, model, mult);
  return out;
}

std::vector<int> sweep_candidates(int pp, const SolverOptions& opts) {
  if (pp < 1) throw InvalidInput("pp must be >= 1");
  std::vector<int> out;
  for (int i : opts.i_candidates) out.push_back(i * pp);
  return out;
}

RankPlan build_rank_plan(int rank, const std::vector<Sample>& samples, int m,
                         const ModelShape& model, const CostMultipliers& mult,
                         const SolverOptions& opts) {
  RankPlan plan;
  plan.rank = rank;
  plan.samples = samples;
  plan.fwd_packs = phase2_partition(samples, m, model, opts);
  annotate_packs(plan.fwd_packs, samples, model, mult);
  plan.bwd_packs = asymmetric_repartition(samples, m, model, mult, opts);
  long double fwd = 0;
  long double bwd = 0;
  for (const auto& p : plan.fwd_packs) fwd += static_cast<long double>(p.fwd_cost.total());
  for (const auto& p : plan.bwd_packs) bwd += static_cast<long double>(p.bwd_cost.total());
  plan.tau_fwd = static_cast<double>(fwd / m);
  plan.tau_bwd = static_cast<double>(bwd / m);
  return plan;
}

std::vector<Sample> with_cp(std::vector<Sample> samples, std::int64_t cp) {
  if (cp < 1) throw InvalidInput("cp degree must be >= 1");
  for (auto& s : samples) s.cp_degree *= cp;
  return samples;
}

SolveResult evaluate_candidates(const GlobalBatch& batch, const ClusterConfig& cluster,
                                const ModelShape& model, const HardwareProfile& hw,
                                const CostMultipliers& mult, const SolverOptions& opts,
                                ScheduleKind kind) {
  cluster.validate();
  model.validate();
  hw.validate();
  mult.validate();
  opts.validate();

  GlobalBatch scaled{with_cp(batch.samples, cluster.cp_base), batch.source};
  DpAssignment assign = phase1_assign(scaled, cluster.dp, model);
  SolveResult result;
  result.plan.strategy = "slimpack";
  result.plan.merge_groups = resolve_outliers(assign, opts, model);

  const auto candidates = sweep_candidates(cluster.pp, opts);
  const int per_rank = static_cast<int>(candidates.size());
  const int n = cluster.dp * per_rank;
  std::vector<RankPlan> plans(static_cast<std::size_t>(n));
  result.evaluations.resize(static_cast<std::size_t>(n));
  parallel_for(n, opts.jobs, [&](int idx) {
    const int r = idx / per_rank;
    const int m = candidates[static_cast<std::size_t>(idx % per_rank)];
    auto& eval = result.evaluations[static_cast<std::size_t>(idx)];
    eval.rank = r;
    eval.m = m;
    const auto& samples = assign.per_rank_samples[static_cast<std::size_t>(r)];
    if (samples.empty()) {
      eval.note = "rank received no samples";
      return;
    }
    try {
      RankPlan plan = build_rank_plan(r, samples, m, model, mult, opts);
      const RankSimulation sim = simulate_rank(plan, model, hw, cluster.pp, kind);
      eval.t_total = sim.timeline.t_total;
      eval.peak_bytes = sim.memory.peak_bytes();
      eval.feasible = eval.peak_bytes <= cluster.mem_budget_bytes;
      if (!eval.feasible) eval.note = "peak memory exceeds budget";
      plans[static_cast<std::size_t>(idx)] = std::move(plan);
    } catch (const Infeasible& e) {
      eval.note = e.what();
    }
  });

  bool complete = true;
  std::vector<RankPlan> chosen_plans;
  for (int r = 0; r < cluster.dp; ++r) {
    int chosen = -1;
    for (int c = 0; c < per_rank; ++c) {
      const int idx = r * per_rank + c;
      const auto& eval = result.evaluations[static_cast<std::size_t>(idx)];
      if (!eval.feasible) continue;
      if (chosen < 0 || eval.t_total < result.evaluations[static_cast<std::size_t>(chosen)].t_total) {
        chosen = idx;
      }
    }
    if (chosen < 0) {
      complete = false;
      continue;
    }
    result.evaluations[static_cast<std::size_t>(chosen)].chosen = true;
    chosen_plans.push_back(std::move(plans[static_cast<std::size_t>(chosen)]));
  }
  if (complete) result.plan.ranks = std::move(chosen_plans);
  return result;
}

SolveResult solve(const GlobalBatch& batch, const ClusterConfig& cluster, const ModelShape& model,
                  const HardwareProfile& hw, const CostMultipliers& mult,
                  const SolverOptions& opts, ScheduleKind kind) {
  SolveResult result = evaluate_candidates(batch, cluster, model, hw, mult, opts, kind);
  if (!result.plan.ranks.empty()) return result;
  const auto per_rank = result.evaluations.size() / static_cast<std::size_t>(cluster.dp);
  for (int r = 0; r < cluster.dp; ++r) {
    std::int64_t smallest_peak = std::numeric_limits<std::int64_t>::max();
    bool any = false;
    for (std::size_t c = 0; c < per_rank; ++c) {
      const auto& eval = result.evaluations[static_cast<std::size_t>(r) * per_rank + c];
      any = any || eval.chosen;
      if (eval.peak_bytes > 0) smallest_peak = std::min(smallest_peak, eval.peak_bytes);
    }
    if (any) continue;
    std::ostringstream msg;
    msg << "rank " << r << ": no feasible pack count";
    if (smallest_peak != std::numeric_limits<std::int64_t>::max()) {
      msg << "; smallest simulated peak memory " << smallest_peak << " bytes exceeds budget "
          << cluster.mem_budget_bytes << " bytes";
    } else {
      msg << "; " << result.evaluations[static_cast<std::size_t>(r) * per_rank].note;
    }
    throw Infeasible(msg.str());
  }
  throw InvariantViolation("solve produced no plan");
}

Flops exact_partition_oracle(const std::vector<Sample>& samples, int m, const ModelShape& model,
                             const SolverOptions& opts) {
  require_samples(samples, m);
  if (samples.size() > 6 || m > 3) {
    throw InvalidInput("oracle instance too large: at most 6 samples and m <= 3");
  }
  const CostTable t(samples, model, opts.alignment, nullptr, false);
  if (t.total_units() > 24) throw InvalidInput("oracle instance too large: at most 24 units");
  if (t.total_units() < m) {
    throw Infeasible("cannot form " + std::to_string(m) + " nonempty packs");
  }

  std::vector<Flops> load(static_cast<std::size_t>(m), 0);
  std::vector<std::int64_t> units(static_cast<std::size_t>(m), 0);
  Flops best = std::numeric_limits<Flops>::max();

  // Pack k of sample i receives units [from, cut) and the rest goes on.
  std::function<void(int, int, std::int64_t)> place = [&](int i, int k, std::int64_t from) {
    if (i == t.samples()) {
      for (std::int64_t c : units) {
        if (c == 0) return;
      }
      best = std::min(best, *std::max_element(load.begin(), load.end()));
      return;
    }
    const std::int64_t u = t.units(i);
    if (k == m - 1) {
      const Flops c = t.cost(i, from, u);
      if (load[static_cast<std::size_t>(k)] + c < best) {
        load[static_cast<std::size_t>(k)] += c;
        units[static_cast<std::size_t>(k)] += u - from;
        place(i + 1, 0, 0);
        load[static_cast<std::size_t>(k)] -= c;
        units[static_cast<std::size_t>(k)] -= u - from;
      }
      return;
    }
    for (std::int64_t cut = from; cut <= u; ++cut) {
      const Flops c = t.cost(i, from, cut);
      if (load[static_cast<std::size_t>(k)] + c >= best) break;
      load[static_cast<std::size_t>(k)] += c;
      units[static_cast<std::size_t>(k)] += cut - from;
      place(i, k + 1, cut);
      load[static_cast<std::size_t>(k)] -= c;
      units[static_cast<std::size_t>(k)] -= cut - from;
    }
  };
  place(0, 0, 0);
  return best;
}

}  // namespace micropack
