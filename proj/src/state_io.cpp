#include "spsim/state_io.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <vector>

#include <json.hpp>

#include "spsim/errors.hpp"

namespace spsim {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

ordered_json contents_json(const SymbolTable& symbols, const Multiset& ms) {
  std::map<std::string, std::string> by_name;
  for (const auto& [id, count] : ms)
    by_name.emplace(std::string(symbols.name(id)), count.str());
  ordered_json j = ordered_json::object();
  for (const auto& [name, count] : by_name) j[name] = count;
  return j;
}

Count parse_count(const json& j, const char* where) {
  try {
    if (j.is_string()) {
      const std::string& s = j.get_ref<const std::string&>();
      if (s.empty() ||
          !std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isdigit(c); }))
        throw SpError(ErrorKind::IoError,
                      std::string(where) + ": count is not a decimal natural");
      return Count(s);
    }
    if (j.is_number_unsigned()) return Count(j.get<uint64_t>());
  } catch (const SpError&) {
    throw;
  } catch (...) {
  }
  throw SpError(ErrorKind::IoError,
                std::string(where) + ": count must be a natural or its string");
}

}  // namespace

std::string dump_state(const Model& model, const Configuration& config,
                       uint64_t seed) {
  ordered_json j;
  j["step"] = config.step;
  j["seed"] = seed;
  j["digest"] = model.digest;

  j["membranes"] = ordered_json::array();
  for (int label : config.tree->labels()) {
    const auto& spec = config.tree->node(label).spec;
    ordered_json m;
    m["label"] = label;
    if (spec.parent)
      m["parent"] = *spec.parent;
    else
      m["parent"] = nullptr;
    m["origin"] = {spec.origin.x, spec.origin.y};
    m["size"] = {spec.width, spec.height};
    j["membranes"].push_back(std::move(m));
  }

  j["cells"] = ordered_json::array();
  const MembraneTree& tree = *config.tree;
  for (int y = 0; y < tree.height(); ++y)
    for (int x = 0; x < tree.width(); ++x) {
      const CellContents& cell = config.at({x, y});
      if (cell.empty()) continue;
      ordered_json c;
      c["x"] = x;
      c["y"] = y;
      c["ordinary"] = contents_json(model.symbols, cell.ordinary);
      if (cell.me)
        c["me"] = std::string(model.symbols.name(*cell.me));
      else
        c["me"] = nullptr;
      j["cells"].push_back(std::move(c));
    }

  j["emitted"] = contents_json(model.symbols, config.emitted);
  return j.dump(2) + "\n";
}

LoadedState load_state(const Model& model, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw SpError(ErrorKind::IoError, std::string("bad state JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("step") || !j.contains("cells") ||
      !j.contains("digest"))
    throw SpError(ErrorKind::IoError, "state JSON is missing required fields");

  if (!j["digest"].is_string() ||
      j["digest"].get<std::string>() != model.digest)
    throw SpError(ErrorKind::GeometryMismatch,
                  "state dump was written for a different model");

  LoadedState loaded{Configuration(model.tree), 0};
  if (!j["step"].is_number_unsigned())
    throw SpError(ErrorKind::IoError, "step must be a natural");
  loaded.config.step = j["step"].get<uint64_t>();
  if (j.contains("seed") && j["seed"].is_number_unsigned())
    loaded.seed = j["seed"].get<uint64_t>();

  const MembraneTree& tree = *model.tree;
  for (const auto& c : j["cells"]) {
    if (!c.is_object() || !c.contains("x") || !c.contains("y"))
      throw SpError(ErrorKind::IoError, "cell entry is missing coordinates");
    Position p{c["x"].get<int>(), c["y"].get<int>()};
    if (!tree.in_skin(p))
      throw SpError(ErrorKind::OutOfBounds,
                    "cell (" + std::to_string(p.x) + "," + std::to_string(p.y) +
                        ") is outside the grid");
    CellContents& cell = loaded.config.at(p);
    if (c.contains("ordinary"))
      for (const auto& [name, count] : c["ordinary"].items())
        cell.ordinary.add(model.symbols.require(name),
                          parse_count(count, name.c_str()));
    if (c.contains("me") && !c["me"].is_null()) {
      SymbolId me = model.symbols.require(c["me"].get<std::string>());
      if (!model.symbols.is_me(me))
        throw SpError(ErrorKind::InvalidState,
                      "me entry names a non-exclusive symbol");
      cell.me = me;
    }
  }

  if (j.contains("emitted"))
    for (const auto& [name, count] : j["emitted"].items())
      loaded.config.emitted.add(model.symbols.require(name),
                                parse_count(count, name.c_str()));
  return loaded;
}

DensityGrid parse_density_csv(const std::string& text) {
  DensityGrid grid;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t eol = text.find('\n', pos);
    std::string line = text.substr(
        pos, eol == std::string::npos ? std::string::npos : eol - pos);
    pos = eol == std::string::npos ? text.size() : eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;

    std::vector<int> row;
    size_t i = 0;
    for (;;) {
      size_t comma = line.find(',', i);
      std::string field =
          line.substr(i, comma == std::string::npos ? std::string::npos
                                                    : comma - i);
      size_t b = field.find_first_not_of(" \t");
      size_t e = field.find_last_not_of(" \t");
      if (b == std::string::npos)
        throw SpError(ErrorKind::IoError, "empty density field");
      field = field.substr(b, e - b + 1);
      if (!std::all_of(field.begin(), field.end(), [](unsigned char c) {
            return std::isdigit(c);
          }) ||
          field.size() > 9)
        throw SpError(ErrorKind::IoError,
                      "density field is not a small natural: " + field);
      row.push_back(std::stoi(field));
      if (comma == std::string::npos) break;
      i = comma + 1;
    }
    if (!grid.empty() && row.size() != grid.front().size())
      throw SpError(ErrorKind::ShapeMismatch, "ragged density row");
    grid.push_back(std::move(row));
  }
  if (grid.empty())
    throw SpError(ErrorKind::ShapeMismatch, "density grid is empty");
  return grid;
}

std::string density_to_csv(const DensityGrid& grid) {
  std::string out;
  for (const auto& row : grid) {
    for (size_t x = 0; x < row.size(); ++x) {
      if (x) out += ',';
      out += std::to_string(row[x]);
    }
    out += '\n';
  }
  return out;
}

std::string render_density(const DensityGrid& grid, int c_max) {
  static const char ramp[] = " .:-=+*#%@";
  std::string out;
  for (size_t i = grid.size(); i-- > 0;) {
    for (int v : grid[i]) {
      int idx = 0;
      if (c_max > 0 && v > 0)
        idx = std::min(9, v >= c_max ? 9 : v * 10 / c_max);
      out += ramp[idx];
    }
    out += '\n';
  }
  return out;
}

}  // namespace spsim
