#include "spsim/configuration.hpp"

#include <algorithm>
#include <sstream>

namespace spsim {

namespace {
void append_multiset(std::ostringstream& os, const SymbolTable& symbols, const Multiset& ms) {
  std::vector<std::pair<std::string, const Count*>> entries;
  for (const auto& [id, n] : ms) entries.emplace_back(symbols.name(id), &n);
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  bool first = true;
  for (const auto& [name, n] : entries) {
    if (!first) os << ",";
    first = false;
    os << name << "=" << n->str();
  }
}
}  // namespace

std::string canonical_text(const SymbolTable& symbols, const Configuration& config) {
  std::ostringstream os;
  os << "step=" << config.step << "\n";
  os << "emitted:";
  append_multiset(os, symbols, config.emitted);
  os << "\n";
  const MembraneTree& tree = *config.tree;
  for (int y = 0; y < tree.height(); ++y) {
    for (int x = 0; x < tree.width(); ++x) {
      const CellContents& cell = config.cells[tree.cell_index({x, y})];
      if (cell.empty()) continue;
      os << "(" << x << "," << y << "):";
      append_multiset(os, symbols, cell.ordinary);
      os << ";me=";
      os << (cell.me ? symbols.name(*cell.me) : "-");
      os << "\n";
    }
  }
  return os.str();
}

uint64_t fnv1a64(const std::string& text) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string canonical_digest(const SymbolTable& symbols, const Configuration& config) {
  uint64_t h = fnv1a64(canonical_text(symbols, config));
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace spsim
