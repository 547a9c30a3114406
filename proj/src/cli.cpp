#include "spsim/cli.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "spsim/bone.hpp"
#include "spsim/dsl.hpp"
#include "spsim/engine.hpp"
#include "spsim/multiscale.hpp"
#include "spsim/oracle.hpp"
#include "spsim/rng.hpp"
#include "spsim/state_io.hpp"

namespace spsim::cli {
namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SpError(ErrorKind::IoError, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw SpError(ErrorKind::IoError, "cannot read " + path);
  return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SpError(ErrorKind::IoError, "cannot open " + path.string());
  out << content;
  if (!out) throw SpError(ErrorKind::IoError, "cannot write " + path.string());
}

long long parse_ll(const std::string& text, const std::string& what) {
  size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (...) {
    used = 0;
  }
  if (used != text.size() || text.empty())
    throw SpError(ErrorKind::InvalidParams, what + ": not an integer: " + text);
  return v;
}

double parse_dbl(const std::string& text, const std::string& what) {
  size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (...) {
    used = 0;
  }
  if (used != text.size() || text.empty())
    throw SpError(ErrorKind::InvalidParams, what + ": not a number: " + text);
  return v;
}

bool parse_flag(const std::string& text, const std::string& what) {
  if (text == "true" || text == "on" || text == "1") return true;
  if (text == "false" || text == "off" || text == "0") return false;
  throw SpError(ErrorKind::InvalidParams, what + ": expected on/off: " + text);
}

dsl::Env parse_overrides(const std::vector<std::string>& kvs) {
  dsl::Env env;
  for (const auto& kv : kvs) {
    size_t eq = kv.find('=');
    if (eq == std::string::npos || eq == 0)
      throw SpError(ErrorKind::InvalidParams,
                    "--param expects NAME=VALUE, got: " + kv);
    env[kv.substr(0, eq)] = parse_ll(kv.substr(eq + 1), kv.substr(0, eq));
  }
  return env;
}

// `key = value` lines, '#' comments; keys are the BoneParams field names.
BoneParams parse_params_file(const std::string& text) {
  BoneParams p;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto trim = [](std::string s) {
      size_t b = s.find_first_not_of(" \t\r");
      if (b == std::string::npos) return std::string();
      size_t e = s.find_last_not_of(" \t\r");
      return s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw SpError(ErrorKind::InvalidParams,
                    "params file line is not key = value: " + line);
    std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));

    if (key == "m") p.m = (int)parse_ll(val, key);
    else if (key == "n") p.n = (int)parse_ll(val, key);
    else if (key == "c_max") p.c_max = (int)parse_ll(val, key);
    else if (key == "p_g") p.p_g = parse_dbl(val, key);
    else if (key == "p_h") p.p_h = parse_dbl(val, key);
    else if (key == "k") p.k = (int)parse_ll(val, key);
    else if (key == "ell") p.ell = (int)parse_ll(val, key);
    else if (key == "n_oc") p.n_oc = (int)parse_ll(val, key);
    else if (key == "n_dc") p.n_dc = (int)parse_ll(val, key);
    else if (key == "max_sim") p.max_sim = (int)parse_ll(val, key);
    else if (key == "max_sim_bmu") p.max_sim_bmu = (int)parse_ll(val, key);
    else if (key == "macro_w") p.macro_w = (int)parse_ll(val, key);
    else if (key == "macro_h") p.macro_h = (int)parse_ll(val, key);
    else if (key == "micro_w") p.micro_w = (int)parse_ll(val, key);
    else if (key == "micro_h") p.micro_h = (int)parse_ll(val, key);
    else if (key == "oy_fraction") p.oy_fraction = parse_dbl(val, key);
    else if (key == "macro_phase_steps") p.macro_phase_steps = (int)parse_ll(val, key);
    else if (key == "rebuild_enabled") p.rebuild_enabled = parse_flag(val, key);
    else if (key == "seed") p.seed = (uint64_t)parse_ll(val, key);
    else
      throw SpError(ErrorKind::InvalidParams, "unknown params key: " + key);
  }
  return p;
}

std::string emitted_summary(const Model& model, const Configuration& config) {
  std::map<std::string, std::string> by_name;
  for (const auto& [id, count] : config.emitted)
    by_name.emplace(std::string(model.symbols.name(id)), count.str());
  if (by_name.empty()) return "none";
  std::string out;
  for (const auto& [name, count] : by_name) {
    if (!out.empty()) out += ' ';
    out += name + "=" + count;
  }
  return out;
}

struct ValidateArgs {
  std::string model_path;
  std::vector<std::string> params;
};

int cmd_validate(const ValidateArgs& a) {
  Model model = dsl::load_model(read_file(a.model_path), parse_overrides(a.params));
  std::cout << "ok digest=" << model.digest
            << " membranes=" << model.tree->labels().size()
            << " symbols=" << model.symbols.size() << "\n";
  return 0;
}

struct RunArgs {
  std::string model_path;
  uint64_t steps = 0;
  uint64_t seed = 0;
  std::string dump_dir;
  uint64_t dump_every = 0;
  bool quiescence = false;
  bool audit = false;
  std::vector<std::string> params;
};

int cmd_run(const RunArgs& a) {
  Model model = dsl::load_model(read_file(a.model_path), parse_overrides(a.params));

  EngineParams ep;
  ep.seed = a.seed;
  ep.max_steps = a.steps;
  ep.termination =
      a.quiescence ? Termination::Quiescence : Termination::FixedSteps;
  ep.audit = a.audit;
  Engine engine(model, ep);

  bool dumping = !a.dump_dir.empty();
  fs::path dir(a.dump_dir);
  if (dumping) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
      throw SpError(ErrorKind::IoError, "cannot create " + dir.string());
  }
  auto dump_to = [&](const Configuration& c) {
    write_file(dir / ("step_" + std::to_string(c.step) + ".json"),
               dump_state(model, c, a.seed));
  };

  Engine::Observer observer;
  if (dumping && a.dump_every > 0) {
    dump_to(model.initial);
    observer = [&](const Configuration& next, const StepSelection&) {
      if (next.step % a.dump_every == 0) dump_to(next);
    };
  }

  RunResult result = engine.run(model.initial, observer);
  if (dumping) dump_to(result.final);

  std::cout << "seed: " << a.seed << "\n"
            << "final step: " << result.final.step << "\n"
            << "emitted: " << emitted_summary(model, result.final) << "\n";
  return 0;
}

struct OracleArgs {
  std::string model_path;
  uint64_t steps = 3;
  uint64_t samples = 100;
  uint64_t seed = 0;
  int max_instances = 64;
  std::vector<std::string> params;
};

int cmd_oracle_check(const OracleArgs& a) {
  Model model = dsl::load_model(read_file(a.model_path), parse_overrides(a.params));
  OracleParams op;
  op.max_instances = a.max_instances;

  uint64_t checked = 0;
  size_t min_successors = SIZE_MAX, max_successors = 0;
  unsigned long long total_successors = 0;

  for (uint64_t j = 0; j < a.samples; ++j) {
    EngineParams ep;
    ep.seed = RngStream::derive(a.seed, {j});
    ep.max_steps = a.steps;
    ep.audit = true;
    Engine engine(model, ep);

    Configuration config = model.initial;
    for (uint64_t t = 0; t < a.steps; ++t) {
      SuccessorSet successors = enumerate_successors(model, config, op);
      Configuration next = engine.step(config);
      if (!successors.contains(model.symbols, next)) {
        std::cerr << "violation: sample " << j << " step " << t
                  << " engine-seed " << ep.seed
                  << ": successor not in the enumerated set ("
                  << successors.digests.size() << " members)\n";
        return 5;
      }
      ++checked;
      min_successors = std::min(min_successors, successors.digests.size());
      max_successors = std::max(max_successors, successors.digests.size());
      total_successors += successors.digests.size();
      config = std::move(next);
    }
  }

  if (checked == 0) {
    std::cout << "checked 0 transitions\n";
    return 0;
  }
  std::cout << "checked " << checked << " transitions over " << a.samples
            << " samples: all engine successors oracle-valid\n"
            << "distinct successors per state: min " << min_successors
            << " max " << max_successors << " mean "
            << (double)total_successors / (double)checked << "\n";
  return 0;
}

struct BoneArgs {
  std::string params_path;
  std::string density_path;
  std::string out_dir = "bone_out";
  int cycles = -1;
  long long seed = -1;
  std::string rebuild;
  bool render = false;
  bool equilibrium = false;
  int threads = 1;
};

int cmd_bone(const BoneArgs& a) {
  BoneParams p;
  if (!a.params_path.empty()) p = parse_params_file(read_file(a.params_path));
  if (a.seed >= 0) p.seed = (uint64_t)a.seed;
  if (!a.rebuild.empty()) p.rebuild_enabled = parse_flag(a.rebuild, "--rebuild");
  validate(p);

  DensityGrid density;
  if (!a.density_path.empty()) {
    density = parse_density_csv(read_file(a.density_path));
  } else {
    density.assign(p.macro_h, std::vector<int>(p.macro_w, p.c_max / 2));
  }

  CoupledOptions options;
  options.cycles = a.cycles > 0 ? a.cycles : p.max_sim;
  options.equilibrium = a.equilibrium;
  options.threads = a.threads;

  CouplingReport report =
      run_coupled(p, density, constant_field(p.p_g), options);

  fs::path dir(a.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw SpError(ErrorKind::IoError, "cannot create " + dir.string());

  Model macro = macro_model(p);
  const MembraneTree& grid = *macro.tree;
  auto write_cycle = [&](int n, const DensityGrid& d) {
    write_file(dir / ("cycle_" + std::to_string(n) + "_density.csv"),
               density_to_csv(d));
    if (a.render)
      write_file(dir / ("cycle_" + std::to_string(n) + "_render.txt"),
                 render_density(d, p.c_max));
  };

  write_cycle(0, report.initial);
  DensityGrid current = report.initial;
  for (int n = 0; n < options.cycles; ++n) {
    const CycleRecord& cr = report.per_cycle[(size_t)n];
    for (size_t i = 0; i < cr.cells.size(); ++i) {
      Position pos = grid.cell_position(i);
      current[pos.y][pos.x] = cr.cells[i].c_after;
    }
    write_cycle(n + 1, current);
    std::cout << "cycle " << n + 1 << ": activated " << cr.activated.size()
              << " cells\n";
  }
  write_file(dir / "report.json", report_to_json(report) + "\n");

  std::cout << "seed: " << p.seed << "\n"
            << "wrote " << dir.string() << "\n";
  return 0;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SyntaxError:
    case ErrorKind::UndeclaredSymbol:
    case ErrorKind::DuplicateDeclaration:
    case ErrorKind::UnboundParameter:
    case ErrorKind::EmptyRange:
    case ErrorKind::InvalidParams:
      return 1;
    case ErrorKind::DuplicateLabel:
    case ErrorKind::MissingSkin:
    case ErrorKind::OverlapViolation:
    case ErrorKind::BoundsViolation:
    case ErrorKind::AdjacencyViolation:
    case ErrorKind::ClearanceViolation:
    case ErrorKind::UnknownLabel:
    case ErrorKind::OutOfBounds:
    case ErrorKind::NotAdjacentToChild:
    case ErrorKind::NotAdjacentToEdge:
    case ErrorKind::PlacementViolation:
    case ErrorKind::MeConflict:
      return 2;
    case ErrorKind::IoError:
      return 3;
    case ErrorKind::SelectionFailure:
    case ErrorKind::AuditViolation:
    case ErrorKind::InvalidState:
      return 4;
    case ErrorKind::TooLarge:
      return 6;
    case ErrorKind::ShapeMismatch:
    case ErrorKind::GeometryMismatch:
      return 7;
  }
  return 4;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Spatial membrane-system simulator"};
  app.require_subcommand(1);

  ValidateArgs va;
  auto* validate_cmd =
      app.add_subcommand("validate", "Parse and geometry-check a model file");
  validate_cmd->add_option("model", va.model_path, "Model file")->required();
  validate_cmd->add_option("--param", va.params, "Override NAME=VALUE");

  RunArgs ra;
  auto* run_cmd = app.add_subcommand("run", "Simulate a model");
  run_cmd->add_option("model", ra.model_path, "Model file")->required();
  run_cmd->add_option("--steps", ra.steps, "Steps to run (cap with --quiescence)");
  run_cmd->add_option("--seed", ra.seed, "Engine seed");
  run_cmd->add_option("--dump", ra.dump_dir, "Directory for state dumps");
  run_cmd->add_option("--dump-every", ra.dump_every,
                      "Dump period in steps (0 = final only)");
  run_cmd->add_flag("--quiescence", ra.quiescence,
                    "Stop when nothing is enabled");
  run_cmd->add_flag("--audit", ra.audit, "Re-verify maximality every step");
  run_cmd->add_option("--param", ra.params, "Override NAME=VALUE");

  OracleArgs oa;
  auto* oracle_cmd = app.add_subcommand(
      "oracle-check", "Check engine steps against exhaustive enumeration");
  oracle_cmd->add_option("model", oa.model_path, "Model file")->required();
  oracle_cmd->add_option("--steps", oa.steps, "Steps per sample");
  oracle_cmd->add_option("--samples", oa.samples, "Engine seeds to try");
  oracle_cmd->add_option("--seed", oa.seed, "Master seed");
  oracle_cmd->add_option("--max-instances", oa.max_instances,
                         "Enumeration size guard");
  oracle_cmd->add_option("--param", oa.params, "Override NAME=VALUE");

  BoneArgs ba;
  auto* bone_cmd =
      app.add_subcommand("bone", "Run the coupled bone-remodelling models");
  bone_cmd->add_option("--params", ba.params_path,
                       "key = value file of model parameters");
  bone_cmd->add_option("--density", ba.density_path, "Initial density CSV");
  bone_cmd->add_option("--cycles", ba.cycles,
                       "Coupled cycles (default: max_sim)");
  bone_cmd->add_option("--seed", ba.seed, "Master seed");
  bone_cmd->add_option("--out", ba.out_dir, "Output directory");
  bone_cmd->add_option("--rebuild", ba.rebuild,
                       "on|off: enable the deposition extension");
  bone_cmd->add_flag("--render", ba.render, "Write ASCII density maps");
  bone_cmd->add_flag("--equilibrium", ba.equilibrium,
                     "Run each cell system to quiescence (capped)");
  bone_cmd->add_option("--threads", ba.threads, "Cell-scale worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (app.got_subcommand(validate_cmd)) return cmd_validate(va);
    if (app.got_subcommand(run_cmd)) return cmd_run(ra);
    if (app.got_subcommand(oracle_cmd)) return cmd_oracle_check(oa);
    if (app.got_subcommand(bone_cmd)) return cmd_bone(ba);
  } catch (const SpError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace spsim::cli
