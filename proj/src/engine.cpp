#include "spsim/engine.hpp"

#include <algorithm>
#include <numeric>

namespace spsim {

namespace {

// Stream tags keep the per-purpose randomness decoupled.
constexpr uint64_t kTagShuffle = 0x53484655;
constexpr uint64_t kTagCell = 0x524F5554;

// Sparse per-cell integer deltas for final ME occupancy bookkeeping.
struct MeDeltas {
  std::vector<std::pair<size_t, int>> entries;

  void add(size_t cell, int d) {
    for (auto& [c, v] : entries)
      if (c == cell) {
        v += d;
        return;
      }
    entries.push_back({cell, d});
  }
  void clear() { entries.clear(); }
};

struct Residual {
  std::vector<Multiset> ordinary;
  std::vector<uint8_t> me_avail;   // pre-step ME present and not yet consumed
  std::vector<SymbolId> me_sym;
  std::vector<int> final_me;       // projected end-of-step ME occupancy

  explicit Residual(const Configuration& config) {
    size_t n = config.cells.size();
    ordinary.resize(n);
    me_avail.assign(n, 0);
    me_sym.assign(n, 0);
    final_me.assign(n, 0);
    for (size_t i = 0; i < n; ++i) {
      ordinary[i] = config.cells[i].ordinary;
      if (config.cells[i].me) {
        me_avail[i] = 1;
        me_sym[i] = *config.cells[i].me;
        final_me[i] = 1;
      }
    }
  }
};

}  // namespace

Engine::Engine(const Model& model, EngineParams params)
    : model_(model), params_(std::move(params)) {
  compile();
}

void Engine::compile() {
  const auto& labels = model_.tree->labels();
  compiled_.resize(labels.size());
  for (size_t slot = 0; slot < labels.size(); ++slot) {
    const auto& rules = model_.tree->rules(labels[slot]);
    for (size_t ri = 0; ri < rules.size(); ++ri) {
      const Rule& rule = rules[ri];
      CompiledRule cr;
      cr.membrane = labels[slot];
      cr.rule_index = static_cast<int>(ri);
      cr.orientations = rule.orientations;

      auto split_reactants = [&](const Multiset& src, int side) {
        for (const auto& [id, n] : src) {
          if (model_.symbols.is_me(id)) {
            // A cell holds at most one ME object, so any demand beyond one
            // (or for two distinct ME symbols) can never be satisfied.
            if (cr.react_me[side].has_value() || n > 1) cr.unusable = true;
            cr.react_me[side] = id;
          } else {
            cr.react_ord[side].add(id, n);
          }
        }
        if (cr.react_ord[side].empty() && !cr.react_me[side].has_value() &&
            (side == 0 || rule.is_pair()))
          cr.unusable = true;  // empty reactant side would apply forever
      };
      split_reactants(rule.reactants1, 0);
      if (rule.is_pair()) split_reactants(rule.reactants2, 1);

      auto add_messages = [&](const std::vector<Message>& msgs, int side) {
        for (const Message& m : msgs) {
          CompiledMessage cm;
          cm.target = m.target;
          cm.side = side;
          for (const auto& [id, n] : m.payload) {
            if (model_.symbols.is_me(id)) {
              for (Count k = 0; k < n; ++k) cm.me.push_back(id);
            } else {
              cm.ordinary.add(id, n);
            }
          }
          // Two ME objects in one message land on one cell: never valid.
          if (cm.me.size() >= 2) cr.unusable = true;
          if (!cm.me.empty()) cr.produces_me = true;
          if (cm.target.kind == Target::Kind::Out) ++cr.out_messages;
          cr.messages.push_back(std::move(cm));
        }
      };
      add_messages(rule.products1, 0);
      if (rule.is_pair()) add_messages(rule.products2, 1);

      compiled_[slot].push_back(std::move(cr));
    }
  }
}

bool Engine::geometry_enabled(const CompiledRule& rule, Position p, Position q,
                              std::vector<std::optional<Position>>* destinations) const {
  const MembraneTree& tree = *model_.tree;
  const Rect fp = tree.footprint(rule.membrane);
  destinations->clear();
  destinations->reserve(rule.messages.size());
  for (const CompiledMessage& msg : rule.messages) {
    Position a = msg.side ? q : p;
    switch (msg.target.kind) {
      case Target::Kind::Delta: {
        Position t = a + msg.target.delta;
        if (!tree.in_skin(t) || tree.owner(t) != rule.membrane) return false;
        destinations->push_back(t);
        break;
      }
      case Target::Kind::Out: {
        if (!fp.on_boundary(a)) return false;
        destinations->push_back(std::nullopt);
        break;
      }
      case Target::Kind::In: {
        int child = msg.target.in_label;
        if (!tree.has_label(child)) return false;
        const auto& cn = tree.node(child);
        if (!cn.spec.parent || *cn.spec.parent != rule.membrane) return false;
        if (cn.footprint.distance(a) != 1) return false;
        destinations->push_back(route_in(tree, a, child));
        break;
      }
    }
  }
  return true;
}

void Engine::enumerate_at(const Configuration& config, Position p,
                          std::vector<Site>* out) const {
  const MembraneTree& tree = *model_.tree;
  const CellContents& cell = config.at(p);
  if (cell.empty()) return;  // every rule demands something at its first cell
  int label = tree.owner(p);
  const auto& labels = tree.labels();
  size_t slot = static_cast<size_t>(
      std::lower_bound(labels.begin(), labels.end(), label) - labels.begin());

  std::vector<std::optional<Position>> dests;
  for (const CompiledRule& rule : compiled_[slot]) {
    if (rule.unusable) continue;
    if (!cell.ordinary.contains(rule.react_ord[0])) continue;
    if (rule.react_me[0] && cell.me != rule.react_me[0]) continue;
    if (!rule.is_pair()) {
      if (!geometry_enabled(rule, p, p, &dests)) continue;
      out->push_back(Site{&rule, p, p, 0, dests});
    } else {
      for (uint8_t bit : {kOrientN, kOrientS, kOrientE, kOrientW}) {
        if (!(rule.orientations & bit)) continue;
        Position q = p + orientation_delta(bit);
        if (!tree.in_skin(q) || tree.owner(q) != rule.membrane) continue;
        const CellContents& qc = config.at(q);
        if (!qc.ordinary.contains(rule.react_ord[1])) continue;
        if (rule.react_me[1] && qc.me != rule.react_me[1]) continue;
        if (!geometry_enabled(rule, p, q, &dests)) continue;
        out->push_back(Site{&rule, p, q, bit, dests});
      }
    }
  }
}

std::vector<Engine::Site> Engine::enumerate_all(const Configuration& config) const {
  std::vector<Site> sites;
  const MembraneTree& tree = *model_.tree;
  for (int y = 0; y < tree.height(); ++y)
    for (int x = 0; x < tree.width(); ++x) enumerate_at(config, {x, y}, &sites);
  return sites;
}

RuleInstance Engine::to_public(const Site& site) const {
  RuleInstance inst;
  inst.membrane = site.rule->membrane;
  inst.rule_index = site.rule->rule_index;
  inst.p = site.p;
  if (site.rule->is_pair()) inst.q = site.q;
  inst.orientation = site.orientation;
  inst.destinations = site.destinations;
  return inst;
}

std::vector<RuleInstance> Engine::enabled_instances(const Configuration& config,
                                                    Position p) const {
  model_.tree->owner(p);  // bounds check (OutOfBounds)
  std::vector<Site> sites;
  enumerate_at(config, p, &sites);
  std::vector<RuleInstance> out;
  out.reserve(sites.size());
  for (const Site& s : sites) out.push_back(to_public(s));
  return out;
}

std::vector<RuleInstance> Engine::all_enabled_instances(const Configuration& config) const {
  std::vector<RuleInstance> out;
  for (const Site& s : enumerate_all(config)) out.push_back(to_public(s));
  return out;
}

bool Engine::is_quiescent(const Configuration& config) const {
  return enumerate_all(config).empty();
}

namespace {

// Reactant-limited multiplicity of one more application batch.
Count reactant_multiplicity(const Residual& res,
                            const Multiset& ord0, const std::optional<SymbolId>& me0,
                            const Multiset& ord1, const std::optional<SymbolId>& me1,
                            bool pair, size_t pi, size_t qi) {
  Count m(-1);
  auto fold = [&](const Count& k) {
    if (m < 0 || k < m) m = k;
  };
  if (!ord0.empty()) fold(res.ordinary[pi].max_multiplicity(ord0));
  if (me0) fold((res.me_avail[pi] && res.me_sym[pi] == *me0) ? Count(1) : Count(0));
  if (pair) {
    if (!ord1.empty()) fold(res.ordinary[qi].max_multiplicity(ord1));
    if (me1) fold((res.me_avail[qi] && res.me_sym[qi] == *me1) ? Count(1) : Count(0));
  }
  return m < 0 ? Count(0) : m;
}

}  // namespace

std::pair<Configuration, StepSelection> Engine::step_with_selection(
    const Configuration& config) const {
  const MembraneTree& tree = *model_.tree;
  std::vector<Site> sites = enumerate_all(config);

  Configuration next = config;
  next.step = config.step + 1;
  StepSelection selection;
  if (sites.empty()) return {std::move(next), std::move(selection)};

  struct AppRec {
    uint32_t site;
    Count mult;
    std::vector<OutSplit> splits;
  };

  Residual res(config);
  std::vector<AppRec> apps;

  // Randomness: one stream for the instance shuffle, one per anchor cell for
  // multiplicity and routing draws, all keyed by (seed, step, ...).
  RngStream shuffle_stream(RngStream::derive(params_.seed, {config.step, kTagShuffle}));
  std::vector<uint32_t> order(sites.size());
  std::iota(order.begin(), order.end(), 0u);
  for (size_t i = order.size(); i > 1; --i) {
    size_t j = shuffle_stream.below(i);
    std::swap(order[i - 1], order[j]);
  }

  std::vector<std::optional<RngStream>> cell_streams(config.cells.size());
  auto cell_stream = [&](Position p) -> RngStream& {
    size_t idx = tree.cell_index(p);
    if (!cell_streams[idx])
      cell_streams[idx].emplace(RngStream(RngStream::derive(
          params_.seed,
          {config.step, kTagCell, static_cast<uint64_t>(p.x), static_cast<uint64_t>(p.y)})));
    return *cell_streams[idx];
  };

  // Fixed ME deltas of one application: reactant consumption plus production
  // into displacement/in destinations (out messages excluded).
  auto fixed_me_deltas = [&](const Site& site, MeDeltas* dme) {
    const CompiledRule& r = *site.rule;
    size_t pi = tree.cell_index(site.p);
    size_t qi = tree.cell_index(site.q);
    if (r.react_me[0]) dme->add(pi, -1);
    if (r.is_pair() && r.react_me[1]) dme->add(qi, -1);
    for (size_t mi = 0; mi < r.messages.size(); ++mi) {
      const CompiledMessage& msg = r.messages[mi];
      if (msg.me.empty() || msg.target.kind == Target::Kind::Out) continue;
      dme->add(tree.cell_index(*site.destinations[mi]), static_cast<int>(msg.me.size()));
    }
  };

  auto deltas_valid = [&](const MeDeltas& dme) {
    for (const auto& [cell, d] : dme.entries)
      if (res.final_me[cell] + d > 1) return false;
    return true;
  };

  // ME-carrying out messages: candidate landings per message, and whether any
  // joint choice keeps every touched cell at <= 1 ME. When `chosen` is given,
  // one valid combination is drawn uniformly.
  auto resolve_me_outs = [&](const Site& site, const MeDeltas& fixed, RngStream* rng,
                             std::vector<std::pair<size_t, OutLanding>>* chosen) -> bool {
    const CompiledRule& r = *site.rule;
    std::vector<size_t> msg_indices;
    std::vector<std::vector<OutLanding>> cands;
    size_t out_slot = 0;
    for (size_t mi = 0; mi < r.messages.size(); ++mi) {
      const CompiledMessage& msg = r.messages[mi];
      if (msg.target.kind != Target::Kind::Out) continue;
      if (!msg.me.empty()) {
        Position a = msg.side ? site.q : site.p;
        cands.push_back(route_out(tree, a, r.membrane));
        msg_indices.push_back(out_slot);
      }
      ++out_slot;
    }
    if (cands.empty()) return deltas_valid(fixed);

    std::vector<std::vector<size_t>> valid;  // candidate index per message
    std::vector<size_t> pick(cands.size(), 0);
    for (;;) {
      MeDeltas trial = fixed;
      for (size_t i = 0; i < cands.size(); ++i) {
        const OutLanding& l = cands[i][pick[i]];
        if (!l.emitted) trial.add(tree.cell_index(l.pos), 1);
      }
      if (deltas_valid(trial)) {
        valid.push_back(pick);
        if (!chosen) return true;  // existence is enough
      }
      size_t i = 0;
      while (i < cands.size() && ++pick[i] == cands[i].size()) pick[i++] = 0;
      if (i == cands.size()) break;
    }
    if (valid.empty()) return false;
    if (chosen) {
      const auto& sel = valid[rng->below(valid.size())];
      for (size_t i = 0; i < cands.size(); ++i)
        chosen->push_back({msg_indices[i], cands[i][sel[i]]});
    }
    return true;
  };

  // Whether one more application of `site` could be added right now while
  // keeping validity (used by the greedy sweep and by the audit).
  auto can_add_one = [&](const Site& site) -> bool {
    const CompiledRule& r = *site.rule;
    size_t pi = tree.cell_index(site.p);
    size_t qi = tree.cell_index(site.q);
    Count m = reactant_multiplicity(res, r.react_ord[0], r.react_me[0], r.react_ord[1],
                                    r.react_me[1], r.is_pair(), pi, qi);
    if (m == 0) return false;
    MeDeltas dme;
    fixed_me_deltas(site, &dme);
    return resolve_me_outs(site, dme, nullptr, nullptr);
  };

  auto try_add = [&](uint32_t site_idx) -> bool {
    const Site& site = sites[site_idx];
    const CompiledRule& r = *site.rule;
    size_t pi = tree.cell_index(site.p);
    size_t qi = tree.cell_index(site.q);
    Count avail = reactant_multiplicity(res, r.react_ord[0], r.react_me[0],
                                        r.react_ord[1], r.react_me[1], r.is_pair(), pi, qi);
    if (avail == 0) return false;

    RngStream& rng = cell_stream(site.p);
    Count m;
    if (r.produces_me) {
      // Each application adds an ME object somewhere; occupancy caps the
      // batch at one. Later sweep passes may add further applications.
      m = 1;
    } else if (avail <= 64) {
      m = 1 + Count(rng.below(avail.convert_to<uint64_t>()));
    } else {
      m = avail;  // bulk path for very large populations
    }

    MeDeltas dme;
    fixed_me_deltas(site, &dme);
    std::vector<std::pair<size_t, OutLanding>> me_landings;
    if (!resolve_me_outs(site, dme, &rng, &me_landings)) return false;
    for (const auto& [slot, landing] : me_landings)
      if (!landing.emitted) dme.add(tree.cell_index(landing.pos), 1);
    if (!deltas_valid(dme)) return false;

    // Routing for ordinary-payload out messages: split the batch across the
    // candidate landings (per-draw when small, near-even when huge).
    std::vector<OutSplit> splits(static_cast<size_t>(r.out_messages));
    size_t out_slot = 0;
    for (const CompiledMessage& msg : r.messages) {
      if (msg.target.kind != Target::Kind::Out) continue;
      if (msg.me.empty()) {
        Position a = msg.side ? site.q : site.p;
        auto cands = route_out(tree, a, r.membrane);
        std::vector<Count> counts(cands.size(), Count(0));
        if (m <= 16) {
          for (Count i = 0; i < m; ++i) counts[rng.below(cands.size())] += 1;
        } else {
          Count base = m / cands.size();
          uint64_t rem = (m % cands.size()).convert_to<uint64_t>();
          for (auto& c : counts) c = base;
          for (uint64_t i = 0; i < rem; ++i) counts[rng.below(cands.size())] += 1;
        }
        for (size_t ci = 0; ci < cands.size(); ++ci)
          if (counts[ci] > 0) splits[out_slot].parts.push_back({cands[ci], counts[ci]});
      }
      ++out_slot;
    }
    for (const auto& [slot, landing] : me_landings)
      splits[slot].parts.push_back({landing, Count(1)});

    // Commit.
    if (!r.react_ord[0].empty()) res.ordinary[pi].remove_all(r.react_ord[0], m);
    if (r.react_me[0]) res.me_avail[pi] = 0;
    if (r.is_pair()) {
      if (!r.react_ord[1].empty()) res.ordinary[qi].remove_all(r.react_ord[1], m);
      if (r.react_me[1]) res.me_avail[qi] = 0;
    }
    for (const auto& [cell, d] : dme.entries) res.final_me[cell] += d;
    apps.push_back(AppRec{site_idx, m, std::move(splits)});
    return true;
  };

  // Greedy sweep: keep passing over the shuffled instances until a full pass
  // adds nothing. An instance rejected for an ME conflict can become addable
  // later once another instance consumes the blocking object.
  bool progress = true;
  while (progress) {
    progress = false;
    for (uint32_t idx : order)
      while (try_add(idx)) progress = true;
  }

  if (params_.audit) {
    for (const Site& site : sites)
      if (can_add_one(site))
        throw SpError(ErrorKind::AuditViolation,
                      "instance of rule " + std::to_string(site.rule->rule_index) +
                          " in membrane " + std::to_string(site.rule->membrane) +
                          " at (" + std::to_string(site.p.x) + "," + std::to_string(site.p.y) +
                          ") is still addable after the sweep");
  }

  // Apply: all removals first, then all placements, so an ME slot freed this
  // step can be refilled by another instance.
  for (const AppRec& app : apps) {
    const Site& site = sites[app.site];
    const CompiledRule& r = *site.rule;
    CellContents& pc = next.at(site.p);
    if (!r.react_ord[0].empty()) pc.ordinary.remove_all(r.react_ord[0], app.mult);
    if (r.react_me[0]) pc.me.reset();
    if (r.is_pair()) {
      CellContents& qc = next.at(site.q);
      if (!r.react_ord[1].empty()) qc.ordinary.remove_all(r.react_ord[1], app.mult);
      if (r.react_me[1]) qc.me.reset();
    }
  }
  for (const AppRec& app : apps) {
    const Site& site = sites[app.site];
    const CompiledRule& r = *site.rule;
    size_t out_slot = 0;
    for (size_t mi = 0; mi < r.messages.size(); ++mi) {
      const CompiledMessage& msg = r.messages[mi];
      if (msg.target.kind == Target::Kind::Out) {
        for (const auto& [landing, n] : app.splits[out_slot].parts) {
          if (landing.emitted) {
            next.emitted.add_all(msg.ordinary, n);
            for (SymbolId me : msg.me) next.emitted.add(me, n);
          } else {
            CellContents& dest = next.at(landing.pos);
            dest.ordinary.add_all(msg.ordinary, n);
            for (SymbolId me : msg.me) {
              if (dest.me.has_value())
                throw SpError(ErrorKind::SelectionFailure, "ME landing already occupied");
              dest.me = me;
            }
          }
        }
        ++out_slot;
      } else {
        CellContents& dest = next.at(*site.destinations[mi]);
        dest.ordinary.add_all(msg.ordinary, app.mult);
        for (SymbolId me : msg.me) {
          if (dest.me.has_value())
            throw SpError(ErrorKind::SelectionFailure, "ME destination already occupied");
          dest.me = me;
        }
      }
    }
  }

  selection.apps.reserve(apps.size());
  for (AppRec& app : apps)
    selection.apps.push_back(
        Application{to_public(sites[app.site]), std::move(app.mult), std::move(app.splits)});
  return {std::move(next), std::move(selection)};
}

Configuration Engine::step(const Configuration& config) const {
  for (int attempt = 0;; ++attempt) {
    try {
      return step_with_selection(config).first;
    } catch (const SpError& e) {
      if (e.kind() != ErrorKind::SelectionFailure || attempt + 1 >= params_.selection_retries)
        throw;
    }
  }
}

RunResult Engine::run(Configuration config, const Observer& observer) const {
  RunResult result{config, {}, 0};
  if (params_.record == TraceRecord::Full) result.trace.configs.push_back(config);

  Configuration current = std::move(config);
  for (uint64_t i = 0;; ++i) {
    if (params_.termination == Termination::Quiescence) {
      if (is_quiescent(current)) break;
      if (params_.max_steps > 0 && i >= params_.max_steps) break;
    } else {
      if (i >= params_.max_steps) break;
    }

    auto [next, selection] = step_with_selection(current);
    ++result.steps_executed;
    if (observer) observer(next, selection);
    if (params_.record != TraceRecord::None) {
      StepRecord rec;
      rec.step = next.step;
      rec.digest = canonical_digest(model_.symbols, next);
      rec.distinct_instances = selection.apps.size();
      rec.applications = selection.applications().str();
      result.trace.steps.push_back(std::move(rec));
    }
    if (params_.record == TraceRecord::Full) result.trace.configs.push_back(next);

    // Nothing was enabled: every further fixed step repeats the state with a
    // bumped counter and no randomness consumed. Skip ahead when nobody is
    // watching the intermediate steps.
    if (params_.termination == Termination::FixedSteps && selection.empty() && !observer &&
        params_.record == TraceRecord::None) {
      uint64_t remaining = params_.max_steps - i - 1;
      next.step += remaining;
      result.steps_executed += remaining;
      current = std::move(next);
      break;
    }
    current = std::move(next);
  }
  result.final = std::move(current);
  return result;
}

}  // namespace spsim
