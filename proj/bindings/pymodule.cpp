// Python bindings. The surface is deliberately functional: models are opaque
// handles and states travel as JSON strings, so Python never holds references
// into engine internals.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <utility>

#include "spsim/bone.hpp"
#include "spsim/configuration.hpp"
#include "spsim/dsl.hpp"
#include "spsim/engine.hpp"
#include "spsim/errors.hpp"
#include "spsim/multiscale.hpp"
#include "spsim/oracle.hpp"
#include "spsim/state_io.hpp"

namespace py = pybind11;
using namespace spsim;

namespace {

EngineParams make_params(uint64_t seed, uint64_t max_steps, bool quiescence,
                         bool audit) {
  return {.seed = seed,
          .max_steps = max_steps,
          .termination = quiescence ? Termination::Quiescence
                                    : Termination::FixedSteps,
          .audit = audit};
}

std::pair<std::string, uint64_t> run_json(const Model& model,
                                          Configuration start, uint64_t steps,
                                          uint64_t seed, bool quiescence,
                                          bool audit) {
  Engine engine(model, make_params(seed, steps, quiescence, audit));
  RunResult result = engine.run(std::move(start));
  return {dump_state(model, result.final, seed), result.steps_executed};
}

}  // namespace

PYBIND11_MODULE(_spsim, m) {
  m.doc() = "Grid membrane-system simulation engine";
  m.attr("__version__") = "0.1.0";

  py::register_exception<SpError>(m, "SpError");

  py::class_<Model>(m, "Model")
      .def_readonly("digest", &Model::digest)
      .def_property_readonly(
          "width", [](const Model& mod) { return mod.tree->width(); })
      .def_property_readonly(
          "height", [](const Model& mod) { return mod.tree->height(); })
      .def_property_readonly("membranes",
                             [](const Model& mod) { return mod.tree->labels(); })
      .def_property_readonly("symbols",
                             [](const Model& mod) {
                               std::vector<std::string> names;
                               SymbolId n = static_cast<SymbolId>(mod.symbols.size());
                               for (SymbolId id = 0; id < n; ++id)
                                 names.push_back(mod.symbols.name(id));
                               return names;
                             })
      .def("initial_json",
           [](const Model& mod, uint64_t seed) {
             return dump_state(mod, mod.initial, seed);
           },
           py::arg("seed") = 0)
      .def("__repr__", [](const Model& mod) {
        return "<Model " + std::to_string(mod.tree->width()) + "x" +
               std::to_string(mod.tree->height()) + " digest=" + mod.digest + ">";
      });

  m.def("load_model",
        [](std::string_view text, const dsl::Env& overrides) {
          return dsl::load_model(text, overrides);
        },
        py::arg("text"), py::arg("overrides") = dsl::Env{});

  m.def("canonical_program",
        [](std::string_view text) {
          return dsl::render_program(dsl::parse_program(text));
        },
        py::arg("text"));

  m.def("run",
        [](const Model& model, uint64_t steps, uint64_t seed, bool quiescence,
           bool audit) {
          return run_json(model, model.initial, steps, seed, quiescence, audit);
        },
        py::arg("model"), py::arg("steps"), py::arg("seed") = 0,
        py::arg("quiescence") = false, py::arg("audit") = true);

  m.def("resume",
        [](const Model& model, const std::string& state_json, uint64_t steps,
           std::optional<uint64_t> seed, bool quiescence, bool audit) {
          LoadedState loaded = load_state(model, state_json);
          return run_json(model, std::move(loaded.config), steps,
                          seed.value_or(loaded.seed), quiescence, audit);
        },
        py::arg("model"), py::arg("state_json"), py::arg("steps"),
        py::arg("seed") = std::nullopt, py::arg("quiescence") = false,
        py::arg("audit") = true);

  m.def("step",
        [](const Model& model, const std::string& state_json,
           std::optional<uint64_t> seed, bool audit) {
          LoadedState loaded = load_state(model, state_json);
          uint64_t s = seed.value_or(loaded.seed);
          Engine engine(model, make_params(s, 1, false, audit));
          return dump_state(model, engine.step(loaded.config), s);
        },
        py::arg("model"), py::arg("state_json"), py::arg("seed") = std::nullopt,
        py::arg("audit") = true);

  m.def("is_quiescent",
        [](const Model& model, const std::string& state_json) {
          Engine engine(model, {});
          return engine.is_quiescent(load_state(model, state_json).config);
        },
        py::arg("model"), py::arg("state_json"));

  // Differential check of one transition: the engine's step must land in the
  // exhaustively enumerated successor set. Raises SpError("TooLarge...") when
  // the system exceeds the enumeration budget.
  m.def("check_step",
        [](const Model& model, const std::string& state_json,
           std::optional<uint64_t> seed, size_t max_instances) {
          LoadedState loaded = load_state(model, state_json);
          uint64_t s = seed.value_or(loaded.seed);
          SuccessorSet succ = enumerate_successors(
              model, loaded.config, {.max_instances = max_instances});
          Engine engine(model, make_params(s, 1, false, true));
          return succ.contains(model.symbols, engine.step(loaded.config));
        },
        py::arg("model"), py::arg("state_json"), py::arg("seed") = std::nullopt,
        py::arg("max_instances") = size_t{64});

  py::class_<BoneParams>(m, "BoneParams")
      .def(py::init<>())
      .def_readwrite("m", &BoneParams::m)
      .def_readwrite("n", &BoneParams::n)
      .def_readwrite("c_max", &BoneParams::c_max)
      .def_readwrite("p_g", &BoneParams::p_g)
      .def_readwrite("p_h", &BoneParams::p_h)
      .def_readwrite("k", &BoneParams::k)
      .def_readwrite("ell", &BoneParams::ell)
      .def_readwrite("n_oc", &BoneParams::n_oc)
      .def_readwrite("n_dc", &BoneParams::n_dc)
      .def_readwrite("max_sim", &BoneParams::max_sim)
      .def_readwrite("max_sim_bmu", &BoneParams::max_sim_bmu)
      .def_readwrite("macro_w", &BoneParams::macro_w)
      .def_readwrite("macro_h", &BoneParams::macro_h)
      .def_readwrite("micro_w", &BoneParams::micro_w)
      .def_readwrite("micro_h", &BoneParams::micro_h)
      .def_readwrite("oy_fraction", &BoneParams::oy_fraction)
      .def_readwrite("macro_phase_steps", &BoneParams::macro_phase_steps)
      .def_readwrite("rebuild_enabled", &BoneParams::rebuild_enabled)
      .def_readwrite("seed", &BoneParams::seed)
      .def("validate", [](const BoneParams& p) { validate(p); });

  m.def("macro_text",
        [](const BoneParams& p) { return dsl::render_program(macro_source(p)); },
        py::arg("params") = BoneParams{});
  m.def("micro_text",
        [](const BoneParams& p) { return dsl::render_program(micro_source(p)); },
        py::arg("params") = BoneParams{});
  m.def("macro", &macro_model, py::arg("params") = BoneParams{});
  m.def("micro", &micro_model, py::arg("params") = BoneParams{});

  m.def("run_coupled",
        [](const BoneParams& params, const DensityGrid& density,
           double p_damage, int cycles, bool equilibrium, int threads) {
          CouplingReport report = run_coupled(
              params, density, constant_field(p_damage),
              {.cycles = cycles, .equilibrium = equilibrium, .threads = threads});
          return report_to_json(report);
        },
        py::arg("params"), py::arg("density"), py::arg("p_damage"),
        py::arg("cycles") = 1, py::arg("equilibrium") = false,
        py::arg("threads") = 1);

  m.def("parse_density_csv", &parse_density_csv, py::arg("text"));
  m.def("density_to_csv", &density_to_csv, py::arg("grid"));
  m.def("render_density", &render_density, py::arg("grid"), py::arg("c_max"));
}
