// Acceptance gate: one pass/fail line per criterion, exit code = #failures.
// Every engine run in criteria 1-5 executes with the maximality audit on;
// criterion 6 reports the audited-step total.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "spsim/bone.hpp"
#include "spsim/dsl.hpp"
#include "spsim/engine.hpp"
#include "spsim/membranes.hpp"
#include "spsim/multiscale.hpp"
#include "spsim/oracle.hpp"
#include "spsim/rng.hpp"

#include "ast_gen.hpp"

using namespace spsim;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

uint64_t g_audited_steps = 0;  // engine steps run with the audit enabled

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt_seconds(double s) {
  std::ostringstream out;
  out.precision(1);
  out << std::fixed << s << "s";
  return out.str();
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpError(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void spit(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw SpError(ErrorKind::IoError, "cannot write " + path.string());
}

// ---------------------------------------------------------------------------
// Criterion 1: random small systems, engine step always inside the
// exhaustively enumerated successor set.

struct SysGen {
  RngStream rng;
  bool child = false;
  int w = 0, h = 0;

  explicit SysGen(uint64_t seed) : rng(seed) {}

  int roll(int n) { return static_cast<int>(rng.below(static_cast<uint64_t>(n))); }

  // One reactant or payload multiset: 1..2 entries, at most one M.
  std::string side() {
    std::string out;
    int entries = 1 + roll(2);
    bool me = false;
    for (int i = 0; i < entries; ++i) {
      if (!out.empty()) out += ' ';
      int pick = roll(me ? 2 : 3);
      if (pick == 2) {
        out += 'M';
        me = true;
      } else {
        out += pick == 0 ? 'a' : 'b';
        int n = 1 + roll(2);
        if (n > 1) out += "^" + std::to_string(n);
      }
    }
    return out;
  }

  std::string target(int membrane) {
    int pick = roll(10);
    if (pick < 4) return "";
    if (pick < 7) {
      static const char* dirs[] = {"N", "S", "E", "W"};
      return std::string("@") + dirs[roll(4)];
    }
    if (pick < 9) return "@out";
    if (membrane == 1 && child) return "@in 2";
    return "";
  }

  std::string messages(int membrane) {
    int count = roll(3);
    if (count == 0) return ".";
    std::string out;
    for (int i = 0; i < count; ++i) {
      if (!out.empty()) out += ' ';
      std::string t = target(membrane);
      if (t.empty()) out += side();
      else out += "(" + side() + ")" + t;
    }
    return out;
  }

  std::string rule(bool force_pair, int membrane) {
    bool pair = force_pair || roll(2) == 0;
    if (!pair) return "  rule " + side() + " -> " + messages(membrane) + ";\n";
    std::string orients;
    int mask = 1 + roll(15);
    static const char* names[] = {"N", "S", "E", "W"};
    for (int b = 0; b < 4; ++b)
      if (mask & (1 << b)) orients += std::string(" ") + names[b];
    return "  pair " + side() + " | " + side() + " -> " + messages(membrane) +
           " | " + messages(membrane) + " @" + orients + ";\n";
  }

  std::string generate() {
    w = 1 + roll(3);
    h = 1 + roll(3);
    child = w == 3 && h == 3 && roll(2) == 0;

    int n_rules = 1 + roll(3);
    std::string skin_rules, child_rules;
    for (int i = 0; i < n_rules; ++i) {
      int membrane = (child && roll(10) < 3) ? 2 : 1;
      (membrane == 2 ? child_rules : skin_rules) += rule(i == 0, membrane);
    }

    std::ostringstream out;
    out << "objects a b;\nme-objects M;\n";
    out << "membrane 1 size " << w << "x" << h << " {\n" << skin_rules << "}\n";
    if (child)
      out << "membrane 2 in 1 at (1,1) size 1x1 {\n" << child_rules << "}\n";

    bool any = false;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        bool inner = child && x == 1 && y == 1;
        std::string at = inner ? "2:(0,0)"
                               : "1:(" + std::to_string(x) + "," + std::to_string(y) + ")";
        int budget = 5;
        int na = roll(4);
        if (na > 0) {
          out << "place a^" << na << " at " << at << ";\n";
          budget -= na;
          any = true;
        }
        int nb = std::min(budget, roll(3));
        if (nb > 0) {
          out << "place b^" << nb << " at " << at << ";\n";
          any = true;
        }
        if (roll(10) < 3) {
          out << "place M at " << at << ";\n";
          any = true;
        }
      }
    if (!any) out << "place a at 1:(0,0);\n";
    return out.str();
  }
};

Outcome criterion_1() {
  auto t0 = Clock::now();
  const uint64_t master = 20240815;
  int checked = 0, transitions = 0, skipped = 0, attempts = 0;
  for (; checked < 500 && attempts < 2000; ++attempts) {
    SysGen gen(RngStream::derive(master, {static_cast<uint64_t>(attempts)}));
    Model model = dsl::load_model(gen.generate());

    Engine eng(model, {.seed = RngStream::derive(master, {static_cast<uint64_t>(attempts), 1}),
                       .max_steps = 2,
                       .audit = true});
    Configuration cur = model.initial;
    bool counted = false;
    for (int t = 0; t < 2; ++t) {
      SuccessorSet succ;
      try {
        succ = enumerate_successors(model, cur, {});
      } catch (const SpError& e) {
        if (e.kind() == ErrorKind::TooLarge) {
          ++skipped;
          break;
        }
        throw;
      }
      Configuration next = eng.step(cur);
      ++g_audited_steps;
      if (!succ.contains(model.symbols, next))
        return {false, "system " + std::to_string(attempts) + " step " +
                           std::to_string(t) + " left the successor set"};
      ++transitions;
      counted = true;
      cur = std::move(next);
    }
    if (counted) ++checked;
  }
  double secs = seconds_since(t0);
  if (checked < 500)
    return {false, "only " + std::to_string(checked) + " systems checked"};
  return {secs < 60.0,
          std::to_string(checked) + " systems, " + std::to_string(transitions) +
              " transitions, " + std::to_string(skipped) + " skipped as too large, " +
              fmt_seconds(secs)};
}

// ---------------------------------------------------------------------------
// Criterion 2: exact region and outward routes on the worked layout.

Outcome criterion_2() {
  std::vector<MembraneSpec> specs{
      {1, std::nullopt, {0, 0}, 12, 5, {}},
      {2, 1, {1, 1}, 3, 3, {}},
      {3, 1, {6, 3}, 3, 1, {}},
  };
  MembraneTree tree = validate_tree(specs, 12, 5);

  std::set<Position> expected_region;
  for (int y = 1; y <= 3; ++y)
    for (int x = 1; x <= 3; ++x) expected_region.insert({x, y});
  std::vector<Position> region = region_of(tree, 2);
  std::set<Position> got(region.begin(), region.end());
  if (got != expected_region || region.size() != 9)
    return {false, "inner region mismatch"};

  std::vector<OutLanding> landings = route_out(tree, {6, 3}, 3);
  std::set<Position> positions;
  for (const OutLanding& l : landings) {
    if (l.emitted) return {false, "corner route unexpectedly left the system"};
    positions.insert(l.pos);
  }
  std::set<Position> expected_out{{5, 3}, {6, 2}, {6, 4}};
  if (positions != expected_out || landings.size() != 3)
    return {false, "outward landings mismatch"};
  return {true, "region of 9 cells and 3 outward landings match exactly"};
}

// ---------------------------------------------------------------------------
// Criterion 3: exhaustive tissue probe sweep.

Outcome criterion_3() {
  auto t0 = Clock::now();
  Model mac = macro_model(BoneParams{});  // window [5, 8)
  SymbolId c_id = mac.symbols.require("c");
  SymbolId a_id = mac.symbols.require("a");
  SymbolId r_id = mac.symbols.require("r");
  Position at{3, 3};

  int runs = 0;
  for (int c = 0; c <= 12; ++c) {
    for (int stim = 0; stim < 4; ++stim) {
      bool g = stim & 1, h = stim & 2;
      Configuration cfg = mac.initial;
      cfg.at(at).ordinary.add(c_id, c);
      cfg.at(at).ordinary.add(a_id);
      if (g) cfg.at(at).ordinary.add(mac.symbols.require("g"));
      if (h) cfg.at(at).ordinary.add(mac.symbols.require("h"));

      Engine eng(mac, {.seed = 1234, .max_steps = 10,
                       .termination = Termination::Quiescence, .audit = true});
      RunResult res = eng.run(std::move(cfg));
      g_audited_steps += res.steps_executed;
      ++runs;

      bool fired = res.final.at(at).ordinary.count(r_id) == 1;
      bool expected = c >= 5 && c < 8 && (g || h);
      if (fired != expected)
        return {false, "c=" + std::to_string(c) + " stimulus=" + std::to_string(stim) +
                           ": marker " + (fired ? "raised" : "missing")};
      if (res.final.at(at).ordinary.count(c_id) != c)
        return {false, "c=" + std::to_string(c) + ": density not restored"};
      if (!eng.is_quiescent(res.final))
        return {false, "c=" + std::to_string(c) + ": probe did not settle"};
    }
  }
  double secs = seconds_since(t0);
  return {secs < 5.0, std::to_string(runs) + " probe runs, " + fmt_seconds(secs)};
}

// ---------------------------------------------------------------------------
// Shared helpers for criteria 4 and 5: rule classification by effect and the
// weighted resorption mass.

int oc_index(const std::string& name) {
  if (name.rfind("Oc_", 0) != 0) return -1;
  return std::stoi(name.substr(3));
}
int cluster_index(const std::string& name) {
  if (name.rfind("C_", 0) != 0) return -1;
  return std::stoi(name.substr(2));
}

struct MicroRules {
  std::map<int, int> formation;  // label-1 rule index -> 1
  std::map<int, int> increment;  // label-1 rule index -> produced stage
  std::map<int, int> death;      // label-1 rule index -> 1
  std::map<int, int> release;    // label-2 rule index -> 1
};

MicroRules classify(const Model& m) {
  MicroRules out;
  auto produced_oc = [&](const Rule& r) {
    int z = -1;
    for (const auto* msgs : {&r.products1, &r.products2})
      for (const Message& msg : *msgs)
        for (const auto& [id, nn] : msg.payload)
          z = std::max(z, oc_index(m.symbols.name(id)));
    return z;
  };
  auto consumed_oc = [&](const Rule& r) {
    int z = -1;
    for (const Multiset* s : {&r.reactants1, &r.reactants2})
      for (const auto& [id, nn] : *s) z = std::max(z, oc_index(m.symbols.name(id)));
    return z;
  };
  auto produces_o = [&](const Rule& r) {
    SymbolId o = m.symbols.require("o");
    for (const auto* msgs : {&r.products1, &r.products2})
      for (const Message& msg : *msgs)
        if (msg.payload.count(o) > 0) return true;
    return false;
  };

  const auto& r1 = m.tree->rules(1);
  for (size_t i = 0; i < r1.size(); ++i) {
    int zp = produced_oc(r1[i]);
    int zc = consumed_oc(r1[i]);
    if (produces_o(r1[i]) && zc >= 0) out.death[int(i)] = 1;
    else if (zp == 0 && zc < 0) out.formation[int(i)] = 1;
    else if (zp >= 1 && zc == zp - 1) out.increment[int(i)] = zp;
  }
  const auto& r2 = m.tree->rules(2);
  SymbolId pc = m.symbols.require("Pc");
  for (size_t i = 0; i < r2.size(); ++i)
    for (const Message& msg : r2[i].products1)
      if (msg.payload.count(pc) > 0) out.release[int(i)] = 1;
  return out;
}

Count mass_of(const Model& m, const Configuration& cfg, int n_oc) {
  SymbolId pc = m.symbols.require("Pc");
  Count total = 0;
  for (const auto& cell : cfg.cells) {
    total += cell.ordinary.count(pc);
    if (cell.me) {
      const std::string& name = m.symbols.name(*cell.me);
      int h = cluster_index(name);
      if (h >= 0) total += h;
      else if (oc_index(name) >= 0) total += n_oc;
    }
  }
  return total;
}

// Criterion 4: weighted mass changes only by +k per release and -N_OC per
// death, on the standard cell-scale model, 20 seeds x 200 steps.

Outcome criterion_4() {
  auto t0 = Clock::now();
  BoneParams p;  // 25x25, k = 10, N_OC = 8
  Model mic = micro_model(p);
  MicroRules idx = classify(mic);
  if (idx.release.size() != 1 || idx.death.size() != 2)
    return {false, "rule classification failed"};

  Count total_releases = 0, total_deaths = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    RngStream down(RngStream::derive(seed, {0x646F776Eull}));
    Configuration cur = f_down({50, true}, mic, p, down);
    Engine eng(mic, {.seed = seed, .audit = true});
    Count mass = mass_of(mic, cur, p.n_oc);
    for (int step = 0; step < 200; ++step) {
      auto [next, sel] = eng.step_with_selection(cur);
      ++g_audited_steps;
      Count releases = 0, deaths = 0;
      for (const Application& app : sel.apps) {
        if (app.instance.membrane == 2 && idx.release.count(app.instance.rule_index))
          releases += app.multiplicity;
        if (app.instance.membrane == 1 && idx.death.count(app.instance.rule_index))
          deaths += app.multiplicity;
      }
      Count next_mass = mass_of(mic, next, p.n_oc);
      if (next_mass - mass != Count(p.k) * releases - Count(p.n_oc) * deaths)
        return {false, "seed " + std::to_string(seed) + " step " +
                           std::to_string(step) + ": mass moved without an event"};
      total_releases += releases;
      total_deaths += deaths;
      mass = next_mass;
      cur = std::move(next);
    }
  }
  if (total_releases == 0) return {false, "no release events occurred"};
  return {true, "4000 steps, " + total_releases.str() + " releases, " +
                    total_deaths.str() + " deaths, all mass deltas accounted, " +
                    fmt_seconds(seconds_since(t0))};
}

// Criterion 5: every completed osteoclast lineage removes exactly N_DC
// matrix objects and leaves exactly one debris token; exclusivity holds.

Outcome criterion_5() {
  auto t0 = Clock::now();
  BoneParams p;
  p.micro_w = 12;
  p.micro_h = 7;
  p.n_oc = 8;
  p.n_dc = 3;
  Model mic = micro_model(p);
  MicroRules idx = classify(mic);
  SymbolId oy = mic.symbols.require("Oy");
  SymbolId o = mic.symbols.require("o");
  SymbolId pc = mic.symbols.require("Pc");

  Count all_died = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Configuration cur = mic.initial;
    for (int x = 0; x <= 6; ++x)
      for (int y = 0; y <= 6; ++y) cur.at({x, y}).me = oy;
    int initial_matrix = 7 * 7;
    for (Position blob : {Position{7, 1}, {7, 4}, {8, 2}, {8, 5}})
      cur.at(blob).ordinary.add(pc, 50);

    Engine eng(mic, {.seed = seed, .audit = true});
    Count formed = 0, inc1 = 0, inc2 = 0, died = 0;
    for (int step = 0; step < 120; ++step) {
      auto [next, sel] = eng.step_with_selection(cur);
      ++g_audited_steps;
      for (const Application& app : sel.apps) {
        if (app.instance.membrane != 1) continue;
        int ri = app.instance.rule_index;
        if (idx.formation.count(ri)) formed += app.multiplicity;
        else if (idx.death.count(ri)) died += app.multiplicity;
        else if (idx.increment.count(ri))
          (idx.increment.at(ri) == 1 ? inc1 : inc2) += app.multiplicity;
      }
      if (formed < inc1 || inc1 < inc2 || inc2 < died)
        return {false, "seed " + std::to_string(seed) + ": stage counts ran backwards"};

      Count oc0 = 0, oc1 = 0, oc2 = 0, debris = 0, matrix = 0;
      for (const auto& cell : next.cells) {
        if (cell.me) {
          const std::string& name = mic.symbols.name(*cell.me);
          if (name == "Oc_0") ++oc0;
          else if (name == "Oc_1") ++oc1;
          else if (name == "Oc_2") ++oc2;
          else if (*cell.me == oy) ++matrix;
        }
        debris += cell.ordinary.count(o);
      }
      // Population identities: each lineage holds exactly one stage slot
      // until death, and every stage move ate exactly one matrix object.
      if (oc0 != formed - inc1 || oc1 != inc1 - inc2 || oc2 != inc2 - died)
        return {false, "seed " + std::to_string(seed) + ": stage census mismatch"};
      if (debris != died)
        return {false, "seed " + std::to_string(seed) + ": debris != deaths"};
      if (Count(initial_matrix) - matrix != inc1 + inc2 + died)
        return {false, "seed " + std::to_string(seed) + ": matrix removals unaccounted"};
      cur = std::move(next);
    }
    all_died += died;
  }
  if (all_died == 0) return {false, "no lineage ever completed"};
  return {true, "20 runs, " + all_died.str() +
                    " completed lineages, every removal and debris token accounted, " +
                    fmt_seconds(seconds_since(t0))};
}

// ---------------------------------------------------------------------------
// Criterion 6: the audit ran on every step above and never threw.

Outcome criterion_6() {
  if (g_audited_steps == 0) return {false, "no audited steps recorded"};
  return {true, std::to_string(g_audited_steps) + " steps re-audited, zero violations"};
}

// ---------------------------------------------------------------------------
// Criterion 7: repeat command-line executions are byte-identical.

Outcome criterion_7() {
  fs::path base = fs::temp_directory_path() / "spsim_acceptance";
  fs::remove_all(base);
  fs::create_directories(base);
  const std::string bin = SPSIM_CLI_PATH;
  const std::string model = std::string(SPSIM_SOURCE_DIR) + "/models/demo.spm";

  auto shell = [](const std::string& cmd) {
    int status = std::system(cmd.c_str());
    if (status != 0)
      throw SpError(ErrorKind::InvalidState, "command failed: " + cmd);
  };

  // Both executions of each command get identical argv; the output
  // directory is renamed aside between runs so the files survive comparison.
  fs::path work = base / "out";
  for (const char* tag : {"a", "b"}) {
    shell(bin + " run " + model + " --steps 8 --seed 5 --audit --dump " +
          work.string() + " > " + (base / ("run_" + std::string(tag) + ".txt")).string());
    fs::rename(work, base / ("run_" + std::string(tag)));
  }
  if (slurp(base / "run_a" / "step_8.json") != slurp(base / "run_b" / "step_8.json"))
    return {false, "state dumps differ between identical runs"};
  if (slurp(base / "run_a.txt") != slurp(base / "run_b.txt"))
    return {false, "run output differs between identical runs"};

  spit(base / "bone.params",
       "macro_w = 3\nmacro_h = 2\nmicro_w = 8\nmicro_h = 5\n"
       "max_sim = 2\nmax_sim_bmu = 6\np_g = 1.0\np_h = 0.0\nseed = 12\n");
  spit(base / "density.csv", "6,50,6\n50,6,50\n");
  for (const char* tag : {"a", "b"}) {
    shell(bin + " bone --params " + (base / "bone.params").string() +
          " --density " + (base / "density.csv").string() +
          " --threads 4 --out " + work.string() + " > " +
          (base / ("bone_" + std::string(tag) + ".txt")).string());
    fs::rename(work, base / ("bone_" + std::string(tag)));
  }
  for (const char* f : {"cycle_0_density.csv", "cycle_1_density.csv",
                        "cycle_2_density.csv", "report.json"})
    if (slurp(base / "bone_a" / f) != slurp(base / "bone_b" / f))
      return {false, std::string("bone output file differs: ") + f};
  if (slurp(base / "bone_a.txt") != slurp(base / "bone_b.txt"))
    return {false, "bone output differs between identical runs"};
  return {true, "run and bone outputs byte-identical across repeats"};
}

// ---------------------------------------------------------------------------
// Criterion 8: full-size coupled run; untouched cells keep their density and
// the projection round trip stays within quantization error.

Outcome criterion_8() {
  auto t0 = Clock::now();
  BoneParams p;  // 25x25 grids
  p.max_sim_bmu = 100;
  p.p_h = 0.0;
  p.seed = 404;

  // Projection round trip at zero steps, for every density value.
  Model mic = micro_model(p);
  const int zone = p.micro_w - 4;
  const int bound = (p.c_max + zone - 1) / zone;
  RngStream rng(7);
  for (int c = 0; c <= p.c_max; ++c) {
    Configuration down = f_down({c, false}, mic, p, rng);
    int back = f_up(down, mic.symbols, p);
    if (std::abs(back - c) > bound)
      return {false, "round trip off by " + std::to_string(std::abs(back - c)) +
                         " at c=" + std::to_string(c)};
  }

  DensityGrid density(25, std::vector<int>(25));
  for (int y = 0; y < 25; ++y)
    for (int x = 0; x < 25; ++x) density[y][x] = (x % 2 == 0) ? 6 : 50;

  CouplingReport rep =
      run_coupled(p, density, constant_field(1.0), {.cycles = 2, .threads = 8});

  size_t activated = 0;
  for (int cy = 0; cy < 2; ++cy)
    for (const CellCycleRecord& rec : rep.per_cycle[cy].cells) {
      if (rec.activated) ++activated;
      else if (rec.c_after != rec.c_before)
        return {false, "a non-activated cell changed density"};
    }
  if (activated == 0) return {false, "no cell ever activated"};

  // Cells never activated in either cycle must still hold their start value.
  for (int y = 0; y < 25; ++y)
    for (int x = 0; x < 25; ++x) {
      size_t i = static_cast<size_t>(y) * 25 + x;
      bool touched = rep.per_cycle[0].cells[i].activated ||
                     rep.per_cycle[1].cells[i].activated;
      if (!touched && rep.final[y][x] != density[y][x])
        return {false, "an untouched cell drifted"};
    }

  double secs = seconds_since(t0);
  return {secs < 300.0, "2 cycles, " + std::to_string(activated) +
                            " cell activations, projection error <= " +
                            std::to_string(bound) + ", " + fmt_seconds(secs)};
}

// ---------------------------------------------------------------------------
// Criterion 9: parse-render-parse identity on bundled and random programs.

Outcome criterion_9() {
  for (const char* name : {"macro.spm", "micro.spm", "demo.spm"}) {
    std::string text = slurp(std::string(SPSIM_SOURCE_DIR) + "/models/" + name);
    dsl::Program p1 = dsl::parse_program(text);
    std::string r1 = dsl::render_program(p1);
    dsl::Program p2 = dsl::parse_program(r1);
    if (!(p2 == p1) || dsl::render_program(p2) != r1)
      return {false, std::string("round trip failed on ") + name};
  }
  for (uint32_t seed = 0; seed < 100; ++seed) {
    testgen::Gen gen(seed);
    dsl::Program p1 = gen.program();
    std::string r1 = dsl::render_program(p1);
    dsl::Program p2 = dsl::parse_program(r1);
    if (!(p2 == p1) || dsl::render_program(p2) != r1)
      return {false, "round trip failed on random program " + std::to_string(seed)};
  }
  return {true, "3 bundled models and 100 random programs round-tripped"};
}

// ---------------------------------------------------------------------------
// Criterion 10: default lattice side follows the cube-root sizing rule.

Outcome criterion_10() {
  long side = std::lround(std::cbrt(16000.0));
  BoneParams p;
  Model mac = macro_model(p);
  if (side != 25) return {false, "cube root rounds to " + std::to_string(side)};
  if (p.macro_w != side || p.macro_h != side || p.micro_w != side || p.micro_h != side)
    return {false, "default grid parameters disagree with the sizing rule"};
  if (mac.tree->width() != side || mac.tree->height() != side)
    return {false, "built tissue grid disagrees with the sizing rule"};
  return {true, "round(16000^(1/3)) == 25 == every default grid side"};
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* label;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries{
      {1, "engine steps stay inside the enumerated successor sets", criterion_1},
      {2, "membrane regions and outward routes match the worked layout", criterion_2},
      {3, "tissue probe fires exactly inside the density window", criterion_3},
      {4, "resorption mass moves only by release and death events", criterion_4},
      {5, "completed osteoclast lineages meet their removal quota", criterion_5},
      {6, "maximality audit clean on every step of criteria 1-5", criterion_6},
      {7, "command-line runs are byte-identical across executions", criterion_7},
      {8, "coupled cycles leave non-activated cells untouched", criterion_8},
      {9, "parse-render-parse is the identity on model programs", criterion_9},
      {10, "default lattice side matches the cube-root sizing rule", criterion_10},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    Outcome res;
    try {
      res = e.run();
    } catch (const std::exception& ex) {
      res = {false, std::string("exception: ") + ex.what()};
    }
    if (!res.pass) ++failures;
    std::cout << (res.pass ? "PASS" : "FAIL") << " criterion " << e.id << ": "
              << e.label << (res.detail.empty() ? "" : " (" + res.detail + ")")
              << std::endl;
  }
  return failures;
}
