#include "spsim/multiscale.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <utility>

#include <json.hpp>

#include "spsim/engine.hpp"
#include "spsim/errors.hpp"

namespace spsim {
namespace {

// Stream tags so the stimulus draws, the tissue engine, each cell-scale
// engine, and each projection draw all get independent randomness from one
// master seed.
constexpr uint64_t kTagStim = 0x5354494Dull;   // "STIM"
constexpr uint64_t kTagMacro = 0x4D41435Bull;  // tissue engine
constexpr uint64_t kTagMicro = 0x4D494352ull;  // cell-scale engine
constexpr uint64_t kTagDown = 0x444F574Eull;   // "DOWN"

int zone_columns(const BoneParams& p) { return p.micro_w - 4; }

void check_micro_geometry(const Configuration& config, const BoneParams& p) {
  const MembraneTree& tree = *config.tree;
  bool ok = tree.width() == p.micro_w && tree.height() == p.micro_h &&
            tree.labels().size() == 2 && tree.has_label(2);
  if (ok) {
    Rect fp = tree.footprint(2);
    ok = fp.x0 == p.micro_w - 3 && fp.y0 == 1 && fp.w == 2 &&
         fp.h == p.micro_h - 2;
  }
  if (!ok)
    throw SpError(ErrorKind::GeometryMismatch,
                  "configuration is not on the cell-scale model geometry");
}

}  // namespace

StressField constant_field(double p) {
  return [p](const Configuration&, size_t) { return p; };
}

Configuration f_down(const MacroCellState& state, const Model& micro,
                     const BoneParams& params, RngStream& rng) {
  validate(params);
  if (state.c_count < 0 || state.c_count > params.c_max)
    throw SpError(ErrorKind::InvalidState,
                  "c_count outside [0, c_max]: " + std::to_string(state.c_count));

  const int z = zone_columns(params);
  const int ncols = static_cast<int>(
      std::lround(double(z) * state.c_count / params.c_max));

  Configuration config(micro.tree);
  SymbolId oy = micro.symbols.require("Oy");
  SymbolId mineral = micro.symbols.require("C");
  for (int y = 0; y < params.micro_h; ++y)
    for (int x = 0; x < ncols; ++x)
      config.at({x, y}).me = rng.bernoulli(params.oy_fraction) ? oy : mineral;

  if (state.activated) {
    SymbolId s = micro.symbols.require("s");
    config.at({ncols, params.micro_h / 2}).ordinary.add(s);
  }
  return config;
}

Configuration f_down(const MacroCellState& state, const BoneParams& params,
                     RngStream& rng) {
  Model micro = micro_model(params);
  return f_down(state, micro, params, rng);
}

int f_up(const Configuration& final_config, const SymbolTable& symbols,
         const BoneParams& params) {
  validate(params);
  check_micro_geometry(final_config, params);

  SymbolId oy = symbols.require("Oy");
  SymbolId mineral = symbols.require("C");
  const MembraneTree& tree = *final_config.tree;
  long long m = 0;
  for (size_t i = 0; i < tree.cell_count(); ++i) {
    Position p = tree.cell_position(i);
    if (tree.owner(p) != 1) continue;
    const auto& me = final_config.at(p).me;
    if (me && (*me == oy || *me == mineral)) ++m;
  }

  const long long capacity =
      static_cast<long long>(zone_columns(params)) * params.micro_h;
  int c = static_cast<int>(std::lround(double(params.c_max) * m / capacity));
  if (c < 0) c = 0;
  if (c > params.c_max) c = params.c_max;
  return c;
}

int f_up(const Configuration& final_config, const BoneParams& params) {
  Model micro = micro_model(params);
  return f_up(final_config, micro.symbols, params);
}

Configuration place_stimuli(const Configuration& macro, const Model& model,
                            const StressField& field, double p_h,
                            RngStream& rng) {
  SymbolId g = model.symbols.require("g");
  SymbolId h = model.symbols.require("h");
  Configuration next = macro;
  const MembraneTree& tree = *macro.tree;
  // Two draws per cell in index order, so the pattern depends only on the
  // stream state, not on which probabilities are zero.
  for (size_t i = 0; i < tree.cell_count(); ++i) {
    Position p = tree.cell_position(i);
    bool give_g = rng.bernoulli(field(macro, i));
    bool give_h = rng.bernoulli(p_h);
    if (give_g) next.at(p).ordinary.add(g);
    if (give_h) next.at(p).ordinary.add(h);
  }
  return next;
}

CouplingReport run_coupled(const BoneParams& params,
                           const DensityGrid& init_density,
                           const StressField& field,
                           const CoupledOptions& options) {
  validate(params);
  if (options.cycles < 1)
    throw SpError(ErrorKind::InvalidParams, "cycles must be at least 1");
  if (static_cast<int>(init_density.size()) != params.macro_h)
    throw SpError(ErrorKind::ShapeMismatch,
                  "density grid must have macro_h rows");
  for (const auto& row : init_density) {
    if (static_cast<int>(row.size()) != params.macro_w)
      throw SpError(ErrorKind::ShapeMismatch,
                    "density rows must have macro_w entries");
    for (int v : row)
      if (v < 0 || v > params.c_max)
        throw SpError(ErrorKind::InvalidState,
                      "density entry outside [0, c_max]");
  }

  Model macro = macro_model(params);
  Model micro = micro_model(params);
  SymbolId c_id = macro.symbols.require("c");
  SymbolId a_id = macro.symbols.require("a");
  SymbolId r_id = macro.symbols.require("r");
  const MembraneTree& grid = *macro.tree;
  const size_t cells = grid.cell_count();

  CouplingReport report;
  report.cycles = options.cycles;
  report.initial = init_density;
  DensityGrid density = init_density;

  for (int cycle = 0; cycle < options.cycles; ++cycle) {
    Configuration mc(macro.tree);
    for (size_t i = 0; i < cells; ++i) {
      Position p = grid.cell_position(i);
      int count = density[p.y][p.x];
      if (count > 0) mc.at(p).ordinary.add(c_id, count);
      mc.at(p).ordinary.add(a_id);
    }

    RngStream stim_rng(RngStream::derive(
        params.seed, {static_cast<uint64_t>(cycle), kTagStim}));
    mc = place_stimuli(mc, macro, field, params.p_h, stim_rng);

    EngineParams mp;
    mp.seed =
        RngStream::derive(params.seed, {static_cast<uint64_t>(cycle), kTagMacro});
    mp.max_steps = static_cast<uint64_t>(params.macro_phase_steps);
    mp.termination = Termination::FixedSteps;
    mc = Engine(macro, mp).run(std::move(mc)).final;

    CycleRecord cr;
    cr.cycle = cycle;
    cr.cells.resize(cells);

    auto run_cell = [&](size_t i) {
      Position p = grid.cell_position(i);
      CellCycleRecord rec;
      rec.c_before = density[p.y][p.x];
      rec.activated = mc.at(p).ordinary.count(r_id) > 0;
      rec.micro_seed = RngStream::derive(
          params.seed,
          {static_cast<uint64_t>(cycle), static_cast<uint64_t>(i), kTagMicro});

      RngStream down_rng(RngStream::derive(
          params.seed,
          {static_cast<uint64_t>(cycle), static_cast<uint64_t>(i), kTagDown}));
      Configuration start =
          f_down({rec.c_before, rec.activated}, micro, params, down_rng);

      EngineParams ep;
      ep.seed = rec.micro_seed;
      ep.max_steps = static_cast<uint64_t>(params.max_sim_bmu);
      ep.termination = options.equilibrium ? Termination::Quiescence
                                           : Termination::FixedSteps;
      RunResult res = Engine(micro, ep).run(std::move(start));
      rec.micro_steps = res.steps_executed;
      rec.c_after = rec.activated ? f_up(res.final, micro.symbols, params)
                                  : rec.c_before;
      cr.cells[i] = rec;
    };

    int workers = options.threads;
    if (workers < 1) workers = 1;
    if (static_cast<size_t>(workers) > cells) workers = static_cast<int>(cells);
    if (workers == 1) {
      for (size_t i = 0; i < cells; ++i) run_cell(i);
    } else {
      std::atomic<size_t> next_cell{0};
      std::exception_ptr first_error;
      std::mutex error_mutex;
      auto worker = [&] {
        for (;;) {
          size_t i = next_cell.fetch_add(1);
          if (i >= cells) return;
          try {
            run_cell(i);
          } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            return;
          }
        }
      };
      std::vector<std::thread> pool;
      pool.reserve(static_cast<size_t>(workers));
      for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      if (first_error) std::rethrow_exception(first_error);
    }

    for (size_t i = 0; i < cells; ++i) {
      Position p = grid.cell_position(i);
      density[p.y][p.x] = cr.cells[i].c_after;
      if (cr.cells[i].activated) cr.activated.push_back(i);
    }
    report.per_cycle.push_back(std::move(cr));
  }

  report.final = std::move(density);
  return report;
}

std::string report_to_json(const CouplingReport& report) {
  nlohmann::ordered_json j;
  j["cycles"] = report.cycles;
  j["initial"] = report.initial;
  j["final"] = report.final;
  j["per_cycle"] = nlohmann::ordered_json::array();
  for (const auto& cr : report.per_cycle) {
    nlohmann::ordered_json jc;
    jc["cycle"] = cr.cycle;
    jc["activated"] = cr.activated;
    jc["cells"] = nlohmann::ordered_json::array();
    for (size_t i = 0; i < cr.cells.size(); ++i) {
      const auto& rec = cr.cells[i];
      jc["cells"].push_back({{"cell", i},
                             {"c_before", rec.c_before},
                             {"c_after", rec.c_after},
                             {"activated", rec.activated},
                             {"micro_steps", rec.micro_steps},
                             {"micro_seed", rec.micro_seed}});
    }
    j["per_cycle"].push_back(std::move(jc));
  }
  return j.dump(2);
}

}  // namespace spsim
