#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spsim/bone.hpp"
#include "spsim/configuration.hpp"
#include "spsim/rng.hpp"

namespace spsim {

// One tissue cell as seen by the coupling: its mineral density in c units
// and whether the tissue phase raised the remodelling marker r there.
struct MacroCellState {
  int c_count = 0;
  bool activated = false;
};

// Pluggable damage-probability map: (tissue configuration, grid cell index)
// -> probability that this cell receives a g stimulus this cycle.
using StressField = std::function<double(const Configuration&, size_t)>;

StressField constant_field(double p);

// Density grids are indexed density[y][x], y = 0 at the south edge, matching
// Position coordinates.
using DensityGrid = std::vector<std::vector<int>>;

struct CellCycleRecord {
  int c_before = 0;
  int c_after = 0;
  bool activated = false;
  uint64_t micro_steps = 0;
  uint64_t micro_seed = 0;
};

struct CycleRecord {
  int cycle = 0;
  std::vector<size_t> activated;  // grid cell indices, ascending
  std::vector<CellCycleRecord> cells;
};

struct CouplingReport {
  int cycles = 0;
  DensityGrid initial;
  DensityGrid final;
  std::vector<CycleRecord> per_cycle;
};

std::string report_to_json(const CouplingReport& report);

// Tissue cell -> fresh cell-scale configuration. The leftmost
// round(Z * c_count / c_max) columns of the grid carry one mineral object
// per cell (Oy with probability oy_fraction, else C), where Z is the number
// of columns west of the marrow membrane's clearance ring. If the cell is
// activated, one starter s lands on the mid-height cell of the first
// non-mineralized column. `micro` must be micro_model(params).
// Throws InvalidState when c_count lies outside [0, c_max].
Configuration f_down(const MacroCellState& state, const Model& micro,
                     const BoneParams& params, RngStream& rng);
Configuration f_down(const MacroCellState& state, const BoneParams& params,
                     RngStream& rng);

// Cell-scale final state -> tissue c count: round(c_max * M / (Z * H)) where
// M counts the surviving Oy/C objects in the skin region, clamped to
// [0, c_max]. Throws GeometryMismatch when the configuration is not on
// micro_model(params) geometry.
int f_up(const Configuration& final_config, const SymbolTable& symbols,
         const BoneParams& params);
int f_up(const Configuration& final_config, const BoneParams& params);

// Independently per grid cell: add one g with probability field(macro, cell)
// and one h with probability p_h. Existing contents are untouched.
// `macro` must be on build_macro geometry with its symbol table in `model`.
Configuration place_stimuli(const Configuration& macro, const Model& model,
                            const StressField& field, double p_h,
                            RngStream& rng);

struct CoupledOptions {
  int cycles = 1;
  // Stop each cell-scale run at quiescence (capped at max_sim_bmu steps)
  // instead of running exactly max_sim_bmu steps.
  bool equilibrium = false;
  // Worker threads for the cell-scale runs. Every value produces identical
  // output: each run has its own seed and results merge by cell index.
  int threads = 1;
};

// The full coupled loop. Each cycle: reset every tissue cell to
// {c^count, a}, place stimuli, run the tissue phase, project every cell
// down, run every cell-scale system, and write f_up back on activated
// cells only. Throws ShapeMismatch when init_density is not macro_h rows
// of macro_w entries, InvalidState on density entries outside [0, c_max].
CouplingReport run_coupled(const BoneParams& params,
                           const DensityGrid& init_density,
                           const StressField& field,
                           const CoupledOptions& options = {});

}  // namespace spsim
