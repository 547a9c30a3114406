#include "spsim/oracle.hpp"

#include <algorithm>
#include <map>

#include "spsim/errors.hpp"
#include "spsim/membranes.hpp"

namespace spsim {

namespace {

struct SplitMessage {
  Multiset ordinary;
  std::vector<SymbolId> me;
  std::optional<Position> dest;  // nullopt = emitted to the environment
};

// One enabled instance with every emission landing already fixed.
struct RoutedInstance {
  Multiset ord[2];
  std::optional<SymbolId> me[2];
  bool pair = false;
  Position p{}, q{};
  std::vector<SplitMessage> messages;
};

struct PreRule {
  const Rule* rule;
  Multiset ord[2];
  std::optional<SymbolId> me[2];
  bool usable = true;
};

PreRule presplit(const SymbolTable& symbols, const Rule& rule) {
  PreRule pr;
  pr.rule = &rule;
  auto side = [&](const Multiset& src, int s) {
    for (const auto& [id, n] : src) {
      if (symbols.is_me(id)) {
        if (pr.me[s].has_value() || n > 1) pr.usable = false;
        pr.me[s] = id;
      } else {
        pr.ord[s].add(id, n);
      }
    }
    if (pr.ord[s].empty() && !pr.me[s].has_value()) pr.usable = false;
  };
  side(rule.reactants1, 0);
  if (rule.is_pair()) side(rule.reactants2, 1);
  for (const Message& m : rule.products1)
    for (const auto& [id, n] : m.payload)
      if (symbols.is_me(id) && n > 1) pr.usable = false;
  for (const Message& m : rule.products2)
    for (const auto& [id, n] : m.payload)
      if (symbols.is_me(id) && n > 1) pr.usable = false;
  return pr;
}

struct Search {
  const Model& model;
  const Configuration& base;
  const OracleParams& params;

  std::vector<RoutedInstance> instances;
  std::vector<uint64_t> counts;

  // Residual state mutated along the DFS path.
  std::vector<Multiset> ordinary;
  std::vector<uint8_t> me_avail;
  std::vector<SymbolId> me_sym;
  std::vector<int> final_me;

  uint64_t branches = 0;
  uint64_t selections = 0;
  int over_cells = 0;  // cells currently holding more than one end-of-step ME
  std::map<std::string, Configuration> outcomes;

  explicit Search(const Model& m, const Configuration& c, const OracleParams& p)
      : model(m), base(c), params(p) {
    size_t n = c.cells.size();
    ordinary.resize(n);
    me_avail.assign(n, 0);
    me_sym.assign(n, 0);
    final_me.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
      ordinary[i] = c.cells[i].ordinary;
      if (c.cells[i].me) {
        me_avail[i] = 1;
        me_sym[i] = *c.cells[i].me;
        final_me[i] = 1;
      }
    }
  }

  size_t idx(Position p) const { return model.tree->cell_index(p); }

  // Expand one geometry-enabled instance into routed variants, one per
  // combination of emission landings.
  void expand_instance(const PreRule& pr, int membrane, Position p, Position q) {
    const MembraneTree& tree = *model.tree;
    const Rect fp = tree.footprint(membrane);
    RoutedInstance proto;
    proto.ord[0] = pr.ord[0];
    proto.ord[1] = pr.ord[1];
    proto.me[0] = pr.me[0];
    proto.me[1] = pr.me[1];
    proto.pair = pr.rule->is_pair();
    proto.p = p;
    proto.q = q;

    std::vector<std::vector<SplitMessage>> variants;  // per-message alternatives
    auto add_side = [&](const std::vector<Message>& msgs, bool second) -> bool {
      Position a = second ? q : p;
      for (const Message& m : msgs) {
        SplitMessage sm;
        for (const auto& [id, n] : m.payload) {
          if (model.symbols.is_me(id)) {
            sm.me.push_back(id);
          } else {
            sm.ordinary.add(id, n);
          }
        }
        switch (m.target.kind) {
          case Target::Kind::Delta: {
            Position t = a + m.target.delta;
            if (!tree.in_skin(t) || tree.owner(t) != membrane) return false;
            sm.dest = t;
            variants.push_back({std::move(sm)});
            break;
          }
          case Target::Kind::In: {
            int child = m.target.in_label;
            if (!tree.has_label(child)) return false;
            const auto& cn = tree.node(child);
            if (!cn.spec.parent || *cn.spec.parent != membrane) return false;
            if (cn.footprint.distance(a) != 1) return false;
            sm.dest = route_in(tree, a, child);
            variants.push_back({std::move(sm)});
            break;
          }
          case Target::Kind::Out: {
            if (!fp.on_boundary(a)) return false;
            std::vector<SplitMessage> alts;
            for (const OutLanding& landing : route_out(tree, a, membrane)) {
              SplitMessage alt = sm;
              alt.dest = landing.emitted ? std::nullopt
                                         : std::optional<Position>(landing.pos);
              alts.push_back(std::move(alt));
            }
            variants.push_back(std::move(alts));
            break;
          }
        }
      }
      return true;
    };
    if (!add_side(pr.rule->products1, false)) return;
    if (proto.pair && !add_side(pr.rule->products2, true)) return;

    // Cartesian product over the per-message alternatives.
    std::vector<size_t> pick(variants.size(), 0);
    for (;;) {
      RoutedInstance inst = proto;
      for (size_t i = 0; i < variants.size(); ++i) inst.messages.push_back(variants[i][pick[i]]);
      instances.push_back(std::move(inst));
      if (instances.size() > params.max_instances)
        throw SpError(ErrorKind::TooLarge,
                      "routed instance count exceeds " + std::to_string(params.max_instances));
      size_t i = 0;
      while (i < variants.size() && ++pick[i] == variants[i].size()) pick[i++] = 0;
      if (i == variants.size()) break;
    }
  }

  void enumerate_instances() {
    const MembraneTree& tree = *model.tree;
    std::vector<std::vector<PreRule>> per_label;
    const auto& labels = tree.labels();
    per_label.resize(labels.size());
    for (size_t s = 0; s < labels.size(); ++s)
      for (const Rule& r : tree.rules(labels[s])) per_label[s].push_back(presplit(model.symbols, r));

    for (int y = 0; y < tree.height(); ++y) {
      for (int x = 0; x < tree.width(); ++x) {
        Position p{x, y};
        const CellContents& cell = base.at(p);
        if (cell.empty()) continue;
        int label = tree.owner(p);
        size_t slot = static_cast<size_t>(
            std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());
        for (const PreRule& pr : per_label[slot]) {
          if (!pr.usable) continue;
          if (!cell.ordinary.contains(pr.ord[0])) continue;
          if (pr.me[0] && cell.me != pr.me[0]) continue;
          if (!pr.rule->is_pair()) {
            expand_instance(pr, label, p, p);
          } else {
            for (uint8_t bit : {kOrientN, kOrientS, kOrientE, kOrientW}) {
              if (!(pr.rule->orientations & bit)) continue;
              Position q = p + orientation_delta(bit);
              if (!tree.in_skin(q) || tree.owner(q) != label) continue;
              const CellContents& qc = base.at(q);
              if (!qc.ordinary.contains(pr.ord[1])) continue;
              if (pr.me[1] && qc.me != pr.me[1]) continue;
              expand_instance(pr, label, p, q);
            }
          }
        }
      }
    }
  }

  // Whether one more application fits. With `exact` the end-of-step
  // exclusivity bound is enforced as-is (leaf maximality). During the descent
  // the bound is optimistic: a cell whose resident ME is still unconsumed may
  // later be freed by an instance not yet decided, so one unit of headroom is
  // granted there; leaves with leftover violations are discarded.
  bool can_add(const RoutedInstance& inst, bool exact) const {
    size_t pi = idx(inst.p);
    size_t qi = idx(inst.q);
    if (!inst.ord[0].empty() && !ordinary[pi].contains(inst.ord[0])) return false;
    if (inst.me[0] && !(me_avail[pi] && me_sym[pi] == *inst.me[0])) return false;
    if (inst.pair) {
      if (!inst.ord[1].empty() && !ordinary[qi].contains(inst.ord[1])) return false;
      if (inst.me[1] && !(me_avail[qi] && me_sym[qi] == *inst.me[1])) return false;
    }
    std::vector<std::pair<size_t, int>> delta;
    auto bump = [&](size_t cell, int d) {
      for (auto& [c, v] : delta)
        if (c == cell) {
          v += d;
          return;
        }
      delta.push_back({cell, d});
    };
    if (inst.me[0]) bump(pi, -1);
    if (inst.pair && inst.me[1]) bump(qi, -1);
    for (const SplitMessage& m : inst.messages)
      if (!m.me.empty() && m.dest) bump(idx(*m.dest), static_cast<int>(m.me.size()));
    for (const auto& [cell, d] : delta) {
      int limit = exact ? 1 : 1 + me_avail[cell];
      if (final_me[cell] + d > limit) return false;
    }
    return true;
  }

  void set_final(size_t cell, int d) {
    int before = final_me[cell];
    final_me[cell] = before + d;
    over_cells += (final_me[cell] > 1) - (before > 1);
  }

  void apply_one(const RoutedInstance& inst, int sign) {
    size_t pi = idx(inst.p);
    size_t qi = idx(inst.q);
    if (sign > 0) {
      if (!inst.ord[0].empty()) ordinary[pi].remove_all(inst.ord[0], 1);
      if (inst.pair && !inst.ord[1].empty()) ordinary[qi].remove_all(inst.ord[1], 1);
      if (inst.me[0]) {
        me_avail[pi] = 0;
        set_final(pi, -1);
      }
      if (inst.pair && inst.me[1]) {
        me_avail[qi] = 0;
        set_final(qi, -1);
      }
      for (const SplitMessage& m : inst.messages)
        if (!m.me.empty() && m.dest) set_final(idx(*m.dest), static_cast<int>(m.me.size()));
    } else {
      if (!inst.ord[0].empty()) ordinary[pi].add_all(inst.ord[0], 1);
      if (inst.pair && !inst.ord[1].empty()) ordinary[qi].add_all(inst.ord[1], 1);
      if (inst.me[0]) {
        me_avail[pi] = 1;
        set_final(pi, +1);
      }
      if (inst.pair && inst.me[1]) {
        me_avail[qi] = 1;
        set_final(qi, +1);
      }
      for (const SplitMessage& m : inst.messages)
        if (!m.me.empty() && m.dest) set_final(idx(*m.dest), -static_cast<int>(m.me.size()));
    }
  }

  void leaf() {
    if (over_cells > 0) return;  // optimistic descent overshoot: invalid end state
    for (const RoutedInstance& inst : instances)
      if (can_add(inst, /*exact=*/true)) return;  // not maximal

    ++selections;
    Configuration next = base;
    next.step = base.step + 1;
    for (size_t i = 0; i < instances.size(); ++i) {
      if (counts[i] == 0) continue;
      const RoutedInstance& inst = instances[i];
      CellContents& pc = next.at(inst.p);
      if (!inst.ord[0].empty()) pc.ordinary.remove_all(inst.ord[0], Count(counts[i]));
      if (inst.me[0]) pc.me.reset();
      if (inst.pair) {
        CellContents& qc = next.at(inst.q);
        if (!inst.ord[1].empty()) qc.ordinary.remove_all(inst.ord[1], Count(counts[i]));
        if (inst.me[1]) qc.me.reset();
      }
    }
    for (size_t i = 0; i < instances.size(); ++i) {
      if (counts[i] == 0) continue;
      const RoutedInstance& inst = instances[i];
      for (const SplitMessage& m : inst.messages) {
        if (!m.dest) {
          next.emitted.add_all(m.ordinary, Count(counts[i]));
          for (SymbolId me : m.me) next.emitted.add(me, Count(counts[i]));
          continue;
        }
        CellContents& dest = next.at(*m.dest);
        dest.ordinary.add_all(m.ordinary, Count(counts[i]));
        for (SymbolId me : m.me) {
          if (dest.me.has_value())
            throw SpError(ErrorKind::InvalidState, "exclusivity breached in leaf apply");
          dest.me = me;
        }
      }
    }
    outcomes.emplace(canonical_digest(model.symbols, next), std::move(next));
  }

  void dfs(size_t i) {
    if (++branches > params.max_branches)
      throw SpError(ErrorKind::TooLarge,
                    "branch budget " + std::to_string(params.max_branches) + " exceeded");
    if (i == instances.size()) {
      leaf();
      return;
    }
    dfs(i + 1);  // zero applications of instance i
    size_t added = 0;
    while (can_add(instances[i], /*exact=*/false)) {
      apply_one(instances[i], +1);
      ++counts[i];
      ++added;
      dfs(i + 1);
    }
    while (added-- > 0) {
      apply_one(instances[i], -1);
      --counts[i];
    }
  }
};

}  // namespace

bool SuccessorSet::contains_digest(const std::string& digest) const {
  return std::binary_search(digests.begin(), digests.end(), digest);
}

bool SuccessorSet::contains(const SymbolTable& symbols, const Configuration& config) const {
  return contains_digest(canonical_digest(symbols, config));
}

SuccessorSet enumerate_successors(const Model& model, const Configuration& config,
                                  const OracleParams& params) {
  Search search(model, config, params);
  search.enumerate_instances();
  search.counts.assign(search.instances.size(), 0);
  search.dfs(0);

  SuccessorSet out;
  out.selections = search.selections;
  out.digests.reserve(search.outcomes.size());
  out.configs.reserve(search.outcomes.size());
  for (auto& [digest, cfg] : search.outcomes) {
    out.digests.push_back(digest);
    out.configs.push_back(std::move(cfg));
  }
  return out;
}

}  // namespace spsim
