#pragma once

#include <string>
#include <vector>

#include "spsim/configuration.hpp"

namespace spsim {

struct OracleParams {
  size_t max_instances = 64;      // routed instances, after emission fan-out
  uint64_t max_branches = 4'000'000;
};

// Every maximal valid selection reachable from a configuration, with boundary
// emissions fanned out over all landing choices, plus the distinct
// configurations those selections produce.
struct SuccessorSet {
  std::vector<std::string> digests;    // sorted
  std::vector<Configuration> configs;  // parallel to digests
  uint64_t selections = 0;

  size_t outcomes() const { return configs.size(); }
  bool contains_digest(const std::string& digest) const;
  bool contains(const SymbolTable& symbols, const Configuration& config) const;
};

// Exhaustive search. Throws TooLarge when the instance count or the branch
// budget is exceeded. Independent of the stepping engine by construction:
// only the geometry helpers are shared.
SuccessorSet enumerate_successors(const Model& model, const Configuration& config,
                                  const OracleParams& params = {});

}  // namespace spsim
