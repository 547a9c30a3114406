#pragma once

#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "spsim/configuration.hpp"
#include "spsim/rng.hpp"

namespace spsim {

enum class Termination { FixedSteps, Quiescence };
enum class TraceRecord { None, Digests, Full };

struct EngineParams {
  uint64_t seed = 0;
  uint64_t max_steps = 0;
  Termination termination = Termination::FixedSteps;
  // Re-verifies after every step that no further instance could be added
  // while keeping mutual exclusion; throws AuditViolation on failure.
  bool audit = false;
  TraceRecord record = TraceRecord::Digests;
  // Retries of the selection sweep before declaring an internal failure.
  // The sweep cannot fail by construction; this guards refactoring mistakes.
  int selection_retries = 1;
};

// One enabled application site of a rule: membrane + rule index + anchor
// cell(s). Product placements for displacement and in-targets are already
// resolved; out-targets are drawn at application time.
struct RuleInstance {
  int membrane = 0;
  int rule_index = 0;
  Position p{};
  std::optional<Position> q;       // second cell of a pair rule
  uint8_t orientation = 0;         // single orientation bit for pair rules

  // Per product message, in rule order (products1 then products2):
  // resolved destination cell, or nullopt for an out-target.
  std::vector<std::optional<Position>> destinations;

  friend bool operator==(const RuleInstance&, const RuleInstance&) = default;
};

// How one application batch routed one out-message: counts per landing.
struct OutSplit {
  std::vector<std::pair<OutLanding, Count>> parts;
};

// A rule instance applied `multiplicity` times in one step.
struct Application {
  RuleInstance instance;
  Count multiplicity;
  // One entry per out-message of the rule, in message order.
  std::vector<OutSplit> out_splits;
};

struct StepSelection {
  std::vector<Application> apps;
  bool empty() const { return apps.empty(); }
  Count applications() const {
    Count t = 0;
    for (const auto& a : apps) t += a.multiplicity;
    return t;
  }
};

struct StepRecord {
  uint64_t step = 0;           // step counter after the transition
  std::string digest;          // canonical digest after the transition
  uint64_t distinct_instances = 0;
  std::string applications;    // total application count (decimal)
};

struct Trace {
  std::vector<StepRecord> steps;
  std::vector<Configuration> configs;  // populated when record == Full
};

struct RunResult {
  Configuration final;
  Trace trace;
  uint64_t steps_executed = 0;
};

// Maximal-parallel evolution engine. Each call to step() derives its
// randomness from (params.seed, config.step), so a step is a pure function
// of the model, the parameters, and the input configuration.
class Engine {
 public:
  using Observer = std::function<void(const Configuration& next, const StepSelection&)>;

  Engine(const Model& model, EngineParams params);

  // Every instance enabled at position p in the given configuration:
  // reactants fully present and every product message placeable.
  std::vector<RuleInstance> enabled_instances(const Configuration& config, Position p) const;

  // All enabled instances across the grid, in canonical (y, x, rule) order.
  std::vector<RuleInstance> all_enabled_instances(const Configuration& config) const;

  bool is_quiescent(const Configuration& config) const;

  Configuration step(const Configuration& config) const;
  std::pair<Configuration, StepSelection> step_with_selection(const Configuration& config) const;

  RunResult run(Configuration config, const Observer& observer = {}) const;

  const Model& model() const { return model_; }
  const EngineParams& params() const { return params_; }

 private:
  struct CompiledMessage {
    Multiset ordinary;               // ordinary payload
    std::vector<SymbolId> me;        // ME payload entries (multiplicity-expanded)
    Target target;
    int side = 0;                    // 0 anchors at p, 1 at q
  };
  struct CompiledRule {
    Multiset react_ord[2];
    std::optional<SymbolId> react_me[2];
    bool unusable = false;           // demands >1 ME in one cell or one message
    std::vector<CompiledMessage> messages;
    uint8_t orientations = 0;
    bool produces_me = false;
    int out_messages = 0;
    int membrane = 0;
    int rule_index = 0;
    bool is_pair() const { return orientations != 0; }
  };
  struct Site {                      // internal enabled-instance record
    const CompiledRule* rule;
    Position p;
    Position q;                      // valid when rule->is_pair()
    uint8_t orientation;
    std::vector<std::optional<Position>> destinations;
  };

  void compile();
  bool geometry_enabled(const CompiledRule& rule, Position p, Position q,
                        std::vector<std::optional<Position>>* destinations) const;
  void enumerate_at(const Configuration& config, Position p, std::vector<Site>* out) const;
  std::vector<Site> enumerate_all(const Configuration& config) const;
  RuleInstance to_public(const Site& site) const;

  const Model& model_;
  EngineParams params_;
  std::vector<std::vector<CompiledRule>> compiled_;  // parallel to tree labels
};

}  // namespace spsim
