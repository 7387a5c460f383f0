#include <algorithm>
#include <cmath>

#include "catxl/annealer.hpp"

namespace catxl {

namespace {

std::optional<std::size_t> grid_index(const std::vector<Currency>& grid, Currency x) {
  auto it = std::lower_bound(grid.begin(), grid.end(), x - kCurrencyTolerance);
  if (it != grid.end() && currency_equal(*it, x)) return static_cast<std::size_t>(it - grid.begin());
  return std::nullopt;
}

// Grid values one step below and above x (x need not be on the grid).
std::vector<Currency> grid_neighbors(const std::vector<Currency>& grid, Currency x) {
  std::vector<Currency> out;
  if (auto i = grid_index(grid, x)) {
    if (*i > 0) out.push_back(grid[*i - 1]);
    if (*i + 1 < grid.size()) out.push_back(grid[*i + 1]);
    return out;
  }
  auto it = std::lower_bound(grid.begin(), grid.end(), x);
  if (it != grid.begin()) out.push_back(*(it - 1));
  if (it != grid.end()) out.push_back(*it);
  return out;
}

bool size_ok(Currency size, const StateSpaceBounds& bounds) {
  return size > kCurrencyTolerance && size >= bounds.min_layer_size - kCurrencyTolerance;
}

std::vector<Currency> boundaries(const Contract& c, const std::vector<std::size_t>& tower) {
  std::vector<Currency> b;
  if (tower.empty()) return b;
  b.push_back(c.layers[tower.front()].attachment);
  for (auto i : tower) b.push_back(c.layers[i].top());
  return b;
}

void set_boundaries(Contract& c, const std::vector<std::size_t>& tower,
                    const std::vector<Currency>& b) {
  for (std::size_t k = 0; k < tower.size(); ++k) {
    c.layers[tower[k]].attachment = b[k];
    c.layers[tower[k]].limit = b[k + 1] - b[k];
  }
}

std::vector<std::vector<PerilId>> partition_of(const PerilGrouping& g) {
  std::vector<std::vector<PerilId>> parts;
  for (const auto& group : g.groups) {
    auto p = group.perils();
    std::sort(p.begin(), p.end());
    parts.push_back(std::move(p));
  }
  std::sort(parts.begin(), parts.end());
  return parts;
}

Contract switch_grouping(const Contract& current, const PerilGrouping& target) {
  Contract next;
  next.grouping = target;
  next.grouping.canonicalize();
  for (GroupId g = 0; g < next.grouping.groups.size(); ++g) {
    const auto old = current.grouping.group_of(next.grouping.groups[g].lowest_peril());
    if (!old) continue;
    for (auto i : current.tower(*old)) {
      Layer l = current.layers[i];
      l.group = g;
      next.layers.push_back(l);
    }
  }
  next.canonicalize();
  return next;
}

}  // namespace

const char* to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::adjust_grouping: return "adjust_grouping";
    case MoveKind::add_remove_layer: return "add_remove_layer";
    case MoveKind::split_join_layer: return "split_join_layer";
    case MoveKind::adjust_boundary: return "adjust_boundary";
    case MoveKind::adjust_with_shift_above: return "adjust_with_shift_above";
    case MoveKind::adjust_subgroup_shift: return "adjust_subgroup_shift";
    case MoveKind::adjust_reinstatements: return "adjust_reinstatements";
  }
  return "?";
}

MoveKind move_kind_from_string(const std::string& s) {
  for (std::size_t k = 0; k < kNumMoveKinds; ++k) {
    const auto kind = static_cast<MoveKind>(k);
    if (s == to_string(kind)) return kind;
  }
  throw ConfigError("unknown move kind '" + s + "'");
}

void MoveWeights::validate() const {
  bool any = false;
  for (double w : weight) {
    if (!(w >= 0.0)) throw ConfigError("move weights must be >= 0");
    any = any || w > 0.0;
  }
  if (!any) throw ConfigError("at least one move weight must be positive");
}

std::size_t Rng::below(std::size_t n) {
  const std::uint64_t range = n;
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % range;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return static_cast<std::size_t>(x % range);
}

void StateSpaceBounds::validate(const CumulativeLossStore& store) {
  auto tidy = [](std::vector<Currency>& grid) {
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end(),
                           [](double a, double b) { return currency_equal(a, b); }),
               grid.end());
  };
  tidy(boundary_grid);
  tidy(shift_grid);
  if (boundary_grid.size() < 2) throw ConfigError("bounds: boundary grid needs at least two values");
  if (max_layers < min_layers) throw ConfigError("bounds: max_layers < min_layers");
  if (shift_grid.empty()) throw ConfigError("bounds: shift grid must not be empty");
  for (auto& [name, grid] : group_grids) {
    tidy(grid);
    if (!store.find_peril(name)) throw ConfigError("bounds: unknown peril '" + name + "'");
    if (grid.size() < 2) throw ConfigError("bounds: grid for '" + name + "' too small");
  }
  for (const auto& g : groupings) {
    try {
      g.validate(store.num_perils());
    } catch (const ValidationError& e) {
      throw ConfigError(std::string("bounds: ") + e.what());
    }
  }
  auto check = [&](const std::vector<Currency>& grid, const std::string& what) {
    for (PerilId p = 0; p < store.num_perils(); ++p) {
      for (Currency v : grid) {
        for (Currency s : shift_grid) {
          const Currency x = v + s;
          if (x < -kCurrencyTolerance) continue;
          if (!store.on_grid(p, x)) {
            throw ConfigError("bounds: " + what + " value " + std::to_string(x) +
                              " is not on the store grid of peril '" + store.peril_names()[p] +
                              "'");
          }
        }
      }
    }
  };
  check(boundary_grid, "boundary grid");
  for (const auto& [name, grid] : group_grids) check(grid, "grid of '" + name + "'");
}

const std::vector<Currency>& StateSpaceBounds::grid_for(
    const PerilGroup& group, const std::vector<std::string>& peril_names) const {
  if (!group_grids.empty()) {
    auto perils = group.perils();
    std::sort(perils.begin(), perils.end());
    for (auto p : perils) {
      auto it = group_grids.find(peril_names.at(p));
      if (it != group_grids.end()) return it->second;
    }
  }
  return boundary_grid;
}

std::string StateSpaceBounds::violation(const Contract& contract,
                                        const std::vector<std::string>& peril_names) const {
  try {
    contract.validate(peril_names.size());
  } catch (const ValidationError& e) {
    return e.what();
  }
  for (GroupId g = 0; g < contract.grouping.groups.size(); ++g) {
    const auto& group = contract.grouping.groups[g];
    for (const auto& s : group.subgroups) {
      if (!grid_index(shift_grid, s.shift)) return "subgroup shift not on the shift grid";
    }
    if (!allow_subgroups && group.subgroups.size() > 1) return "subgroups are not allowed";
    const auto t = contract.tower(g);
    if (t.size() > max_layers) return "too many layers in tower";
    const auto& grid = grid_for(group, peril_names);
    for (Currency b : boundaries(contract, t)) {
      if (!grid_index(grid, b)) return "layer boundary not on the grid";
    }
    for (auto i : t) {
      if (!size_ok(contract.layers[i].limit, *this)) return "layer below minimum size";
      if (contract.layers[i].reinstatements > max_reinstatements) return "too many reinstatements";
    }
  }
  return {};
}

StateSpaceBounds default_bounds(const CumulativeLossStore& store) {
  StateSpaceBounds b;
  if (store.num_perils() == 0) return b;
  for (Currency x : store.thresholds(0)) {
    bool shared = true;
    for (PerilId p = 1; p < store.num_perils() && shared; ++p) shared = store.on_grid(p, x);
    if (shared) b.boundary_grid.push_back(x);
  }
  return b;
}

bool is_add_move(const Move& move) {
  return move.kind == MoveKind::add_remove_layer && move.op >= 2;
}

std::vector<Move> enumerate_moves(const Contract& c, MoveKind kind, const StateSpaceBounds& bounds,
                                  const std::vector<std::string>& names) {
  std::vector<Move> moves;
  auto add = [&](int op, GroupId g, std::size_t index, double value, double value2 = 0.0,
                 std::size_t index2 = 0) {
    Move m;
    m.kind = kind;
    m.op = op;
    m.group = g;
    m.index = index;
    m.index2 = index2;
    m.value = value;
    m.value2 = value2;
    moves.push_back(std::move(m));
  };
  const auto num_groups = static_cast<GroupId>(c.grouping.groups.size());

  switch (kind) {
    case MoveKind::adjust_grouping: {
      const auto current = partition_of(c.grouping);
      for (std::size_t i = 0; i < bounds.groupings.size(); ++i) {
        if (partition_of(bounds.groupings[i]) == current) continue;
        if (!bounds.violation(switch_grouping(c, bounds.groupings[i]), names).empty()) continue;
        add(0, 0, i, 0.0);
      }
      if (!bounds.allow_subgroups) break;
      for (GroupId g = 0; g < num_groups; ++g) {
        const auto& subs = c.grouping.groups[g].subgroups;
        for (std::size_t s = 0; s < subs.size(); ++s) {
          const auto& perils = subs[s].perils;
          const std::size_t k = perils.size();
          if (k < 2) continue;
          // Bipartitions keeping perils[0] in place; single-peril splits only
          // for very large subgroups.
          if (k <= 10) {
            for (std::uint32_t mask = 1; mask < (1u << (k - 1)); ++mask) {
              Move m;
              m.kind = kind;
              m.op = 1;
              m.group = g;
              m.index = s;
              for (std::size_t b = 0; b + 1 < k; ++b) {
                if (mask & (1u << b)) m.part.push_back(perils[b + 1]);
              }
              moves.push_back(std::move(m));
            }
          } else {
            for (std::size_t b = 1; b < k; ++b) {
              Move m;
              m.kind = kind;
              m.op = 1;
              m.group = g;
              m.index = s;
              m.part = {perils[b]};
              moves.push_back(std::move(m));
            }
          }
        }
        for (std::size_t a = 0; a < subs.size(); ++a) {
          for (std::size_t b = a + 1; b < subs.size(); ++b) {
            if (currency_equal(subs[a].shift, subs[b].shift)) add(2, g, a, 0.0, 0.0, b);
          }
        }
      }
      break;
    }
    case MoveKind::add_remove_layer: {
      for (GroupId g = 0; g < num_groups; ++g) {
        const auto& group = c.grouping.groups[g];
        const auto& grid = bounds.grid_for(group, names);
        const Currency min_shift = group.min_shift();
        const auto t = c.tower(g);
        const auto m = t.size();
        if (m > bounds.min_layers && m > 0) {
          add(0, g, 0, 0.0);
          if (m >= 2) add(1, g, 0, 0.0);
        }
        if (m >= bounds.max_layers) continue;
        if (m > 0) {
          const Currency top = c.layers[t.back()].top();
          const Currency bottom = c.layers[t.front()].attachment;
          for (Currency v : grid) {
            if (size_ok(v - top, bounds)) add(2, g, 0, v);
          }
          for (Currency v : grid) {
            if (size_ok(bottom - v, bounds) && v + min_shift >= -kCurrencyTolerance) add(3, g, 0, v);
          }
        } else {
          for (std::size_t i = 0; i < grid.size(); ++i) {
            if (grid[i] + min_shift < -kCurrencyTolerance) continue;
            for (std::size_t j = i + 1; j < grid.size(); ++j) {
              if (size_ok(grid[j] - grid[i], bounds)) add(4, g, 0, grid[i], grid[j]);
            }
          }
        }
      }
      break;
    }
    case MoveKind::split_join_layer: {
      for (GroupId g = 0; g < num_groups; ++g) {
        const auto& grid = bounds.grid_for(c.grouping.groups[g], names);
        const auto t = c.tower(g);
        if (t.size() < bounds.max_layers) {
          for (auto i : t) {
            const auto& l = c.layers[i];
            for (Currency v : grid) {
              if (size_ok(v - l.attachment, bounds) && size_ok(l.top() - v, bounds)) {
                add(0, g, i, v);
              }
            }
          }
        }
        if (t.size() > bounds.min_layers) {
          for (std::size_t k = 0; k + 1 < t.size(); ++k) {
            if (c.layers[t[k]].reinstatements == c.layers[t[k + 1]].reinstatements) {
              add(1, g, t[k], 0.0, 0.0, t[k + 1]);
            }
          }
        }
      }
      break;
    }
    case MoveKind::adjust_boundary:
    case MoveKind::adjust_with_shift_above: {
      const bool shift_above = kind == MoveKind::adjust_with_shift_above;
      for (GroupId g = 0; g < num_groups; ++g) {
        const auto& group = c.grouping.groups[g];
        const auto& grid = bounds.grid_for(group, names);
        const auto t = c.tower(g);
        if (t.empty()) continue;
        const auto b = boundaries(c, t);
        const std::size_t last = shift_above ? b.size() - 1 : b.size();
        for (std::size_t j = 0; j < last; ++j) {
          for (Currency v : grid_neighbors(grid, b[j])) {
            if (j == 0 && v + group.min_shift() < -kCurrencyTolerance) continue;
            if (j > 0 && !size_ok(v - b[j - 1], bounds)) continue;
            if (shift_above) {
              const Currency delta = v - b[j];
              bool on_grid = true;
              for (std::size_t k = j + 1; k < b.size() && on_grid; ++k) {
                on_grid = grid_index(grid, b[k] + delta).has_value();
              }
              if (!on_grid) continue;
            } else if (j + 1 < b.size() && !size_ok(b[j + 1] - v, bounds)) {
              continue;
            }
            add(0, g, j, v);
          }
        }
      }
      break;
    }
    case MoveKind::adjust_subgroup_shift: {
      for (GroupId g = 0; g < num_groups; ++g) {
        const auto t = c.tower(g);
        if (t.empty()) continue;
        const Currency bottom = c.layers[t.front()].attachment;
        const auto& subs = c.grouping.groups[g].subgroups;
        for (std::size_t s = 0; s < subs.size(); ++s) {
          for (Currency v : grid_neighbors(bounds.shift_grid, subs[s].shift)) {
            if (bottom + v >= -kCurrencyTolerance) add(0, g, s, v);
          }
        }
      }
      break;
    }
    case MoveKind::adjust_reinstatements: {
      for (std::size_t i = 0; i < c.layers.size(); ++i) {
        const auto r = c.layers[i].reinstatements;
        if (r > 0) add(0, c.layers[i].group, i, r - 1.0);
        if (r < bounds.max_reinstatements) add(0, c.layers[i].group, i, r + 1.0);
      }
      break;
    }
  }
  return moves;
}

Contract apply_move(const Contract& c, const Move& m, const StateSpaceBounds& bounds,
                    const std::vector<std::string>& names) {
  Contract next = c;
  switch (m.kind) {
    case MoveKind::adjust_grouping: {
      if (m.op == 0) return switch_grouping(c, bounds.groupings.at(m.index));
      auto& subs = next.grouping.groups.at(m.group).subgroups;
      if (m.op == 1) {
        Subgroup moved{m.part, subs.at(m.index).shift};
        auto& rest = subs[m.index].perils;
        rest.erase(std::remove_if(rest.begin(), rest.end(),
                                  [&](PerilId p) {
                                    return std::find(m.part.begin(), m.part.end(), p) !=
                                           m.part.end();
                                  }),
                   rest.end());
        subs.push_back(std::move(moved));
      } else {
        auto& into = subs.at(m.index).perils;
        const auto& from = subs.at(m.index2).perils;
        into.insert(into.end(), from.begin(), from.end());
        subs.erase(subs.begin() + static_cast<std::ptrdiff_t>(m.index2));
      }
      break;
    }
    case MoveKind::add_remove_layer: {
      const auto t = c.tower(m.group);
      switch (m.op) {
        case 0: next.layers.erase(next.layers.begin() + static_cast<std::ptrdiff_t>(t.back())); break;
        case 1: next.layers.erase(next.layers.begin() + static_cast<std::ptrdiff_t>(t.front())); break;
        case 2: {
          const Currency top = c.layers[t.back()].top();
          next.layers.push_back({top, m.value - top, 0, m.group});
          break;
        }
        case 3: {
          const Currency bottom = c.layers[t.front()].attachment;
          next.layers.push_back({m.value, bottom - m.value, 0, m.group});
          break;
        }
        default: next.layers.push_back({m.value, m.value2 - m.value, 0, m.group}); break;
      }
      break;
    }
    case MoveKind::split_join_layer: {
      if (m.op == 0) {
        Layer& l = next.layers.at(m.index);
        Layer upper = l;
        upper.attachment = m.value;
        upper.limit = l.top() - m.value;
        l.limit = m.value - l.attachment;
        next.layers.push_back(upper);
      } else {
        next.layers.at(m.index).limit += next.layers.at(m.index2).limit;
        next.layers.erase(next.layers.begin() + static_cast<std::ptrdiff_t>(m.index2));
      }
      break;
    }
    case MoveKind::adjust_boundary:
    case MoveKind::adjust_with_shift_above: {
      const auto t = c.tower(m.group);
      auto b = boundaries(c, t);
      const Currency delta = m.value - b[m.index];
      b[m.index] = m.value;
      if (m.kind == MoveKind::adjust_with_shift_above) {
        const auto& grid = bounds.grid_for(c.grouping.groups[m.group], names);
        for (std::size_t k = m.index + 1; k < b.size(); ++k) b[k] = grid[*grid_index(grid, b[k] + delta)];
      }
      set_boundaries(next, t, b);
      break;
    }
    case MoveKind::adjust_subgroup_shift:
      next.grouping.groups.at(m.group).subgroups.at(m.index).shift = m.value;
      break;
    case MoveKind::adjust_reinstatements:
      next.layers.at(m.index).reinstatements = static_cast<std::uint32_t>(m.value);
      break;
  }
  next.canonicalize();
  return next;
}

Proposal propose(const Contract& current, const StateSpaceBounds& bounds,
                 const std::vector<std::string>& names, const MoveWeights& weights, Rng& rng,
                 double add_bias) {
  auto w = weights.weight;
  w[static_cast<std::size_t>(MoveKind::add_remove_layer)] *= add_bias;
  for (;;) {
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0)) throw Error("no legal move from the current contract");
    double u = rng.uniform() * total;
    std::size_t k = 0;
    while (k + 1 < kNumMoveKinds && (w[k] == 0.0 || u >= w[k])) {
      u -= w[k];
      ++k;
    }
    if (w[k] == 0.0) continue;
    const auto kind = static_cast<MoveKind>(k);
    auto moves = enumerate_moves(current, kind, bounds, names);
    if (moves.empty()) {
      w[k] = 0.0;
      continue;
    }
    if (kind == MoveKind::add_remove_layer) {
      std::vector<Move> adds, removes;
      for (auto& m : moves) (is_add_move(m) ? adds : removes).push_back(std::move(m));
      const bool pick_add =
          removes.empty() || (!adds.empty() && rng.uniform() < add_bias / (1.0 + add_bias));
      moves = pick_add ? std::move(adds) : std::move(removes);
    }
    const Move& m = moves[rng.below(moves.size())];
    return {apply_move(current, m, bounds, names), kind};
  }
}

}  // namespace catxl
