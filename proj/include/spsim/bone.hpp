#pragma once

#include <cstdint>

#include "spsim/configuration.hpp"
#include "spsim/dsl.hpp"

namespace spsim {

// Every knob of the two bone-remodelling models and their coupling, in one
// record. Defaults reproduce the bundled model files.
struct BoneParams {
  int m = 5;        // mineralization units consumed by the surface probe
  int n = 3;        // width of the surface interval, in units of c
  int c_max = 100;  // maximum c count per tissue cell (m + n <= c_max)
  double p_g = 0.05;       // microdamage placement probability per cell
  double p_h = 0.05;       // random-activation probability per cell
  int k = 10;              // pre-osteoclasts released per activation
  int ell = 10;            // pre-osteoblasts released per activation
  int n_oc = 8;            // aggregated Pc count that forms one osteoclast
  int n_dc = 4;            // cells destroyed by one osteoclast before dying
  int max_sim = 10;        // coupled tissue cycles
  int max_sim_bmu = 200;   // cell-scale steps per cycle
  int macro_w = 25, macro_h = 25;
  int micro_w = 25, micro_h = 25;
  double oy_fraction = 0.5;   // chance a mineralized cell carries an osteocyte
  int macro_phase_steps = 4;  // tissue steps per cycle (surface probe length)
  bool rebuild_enabled = false;
  uint64_t seed = 0;
};

// Throws InvalidParams on any violated constraint.
void validate(const BoneParams& params);

// Tissue-scale model: skin-only grid, the seven-rule surface probe.
// The *_source forms keep parameters and families symbolic (they render to
// the bundled .spm files); build_* returns the expanded ground program.
dsl::Program macro_source(const BoneParams& params);
dsl::Program build_macro(const BoneParams& params);
Model macro_model(const BoneParams& params);

// Cell-scale model: skin grid with the blood/marrow membrane 2 on the right
// edge, signal spread, Pc release and aggregation, osteoclast resorption.
dsl::Program micro_source(const BoneParams& params);
dsl::Program build_micro(const BoneParams& params);
Model micro_model(const BoneParams& params);

}  // namespace spsim
