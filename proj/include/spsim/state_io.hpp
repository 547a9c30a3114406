#pragma once

#include <cstdint>
#include <string>

#include "spsim/configuration.hpp"
#include "spsim/multiscale.hpp"

namespace spsim {

// JSON snapshot of a configuration: step, membrane list, non-empty cells
// in (y, x) order with name-sorted contents, the emitted ledger, the engine
// seed, and the model digest. Counts serialize as decimal strings since
// they are unbounded.
std::string dump_state(const Model& model, const Configuration& config,
                       uint64_t seed);

struct LoadedState {
  Configuration config;
  uint64_t seed = 0;
};

// Inverse of dump_state. IoError on malformed JSON or counts,
// GeometryMismatch when the dump's digest does not match the model,
// UndeclaredSymbol on unknown names, InvalidState when an me entry names a
// non-exclusive symbol, OutOfBounds on positions outside the grid.
LoadedState load_state(const Model& model, const std::string& json_text);

// Density CSV: one line per row, comma-separated nonnegative integers,
// line 1 = row y 0. Blank lines and lines starting with '#' are skipped.
// IoError on malformed entries, ShapeMismatch on ragged or empty grids.
DensityGrid parse_density_csv(const std::string& text);
std::string density_to_csv(const DensityGrid& grid);

// ASCII map, one character per cell from the decile ramp ` .:-=+*#%@`
// (space = 0, '@' = c_max), the north edge (max y) on the first line.
std::string render_density(const DensityGrid& grid, int c_max);

}  // namespace spsim
