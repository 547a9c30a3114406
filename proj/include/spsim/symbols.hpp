#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "spsim/errors.hpp"

namespace spsim {

using SymbolId = uint32_t;

// Counts are arbitrary-precision. Replication rules (an object producing
// several copies of itself per step) make populations grow without bound
// under maximal parallelism, so no fixed-width type is safe for long runs.
using Count = boost::multiprecision::cpp_int;

enum class SymbolKind : uint8_t {
  Ordinary,
  MutuallyExclusive,  // at most one per cell at step boundaries
};

class SymbolTable {
 public:
  SymbolId declare(const std::string& name, SymbolKind kind) {
    if (index_.count(name))
      throw SpError(ErrorKind::DuplicateDeclaration, "symbol declared twice: " + name);
    SymbolId id = static_cast<SymbolId>(names_.size());
    names_.push_back(name);
    kinds_.push_back(kind);
    index_.emplace(name, id);
    return id;
  }

  std::optional<SymbolId> find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  SymbolId require(const std::string& name) const {
    auto id = find(name);
    if (!id) throw SpError(ErrorKind::UndeclaredSymbol, "undeclared symbol: " + name);
    return *id;
  }

  const std::string& name(SymbolId id) const { return names_.at(id); }
  SymbolKind kind(SymbolId id) const { return kinds_.at(id); }
  bool is_me(SymbolId id) const { return kinds_.at(id) == SymbolKind::MutuallyExclusive; }
  size_t size() const { return names_.size(); }

  bool operator==(const SymbolTable& o) const {
    return names_ == o.names_ && kinds_ == o.kinds_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<SymbolKind> kinds_;
  std::unordered_map<std::string, SymbolId> index_;
};

// Multiset of symbols, sorted by id, no zero-count entries.
class Multiset {
 public:
  using Entry = std::pair<SymbolId, Count>;

  void add(SymbolId id, const Count& n = 1) {
    if (n == 0) return;
    auto it = lower_bound(id);
    if (it != items_.end() && it->first == id) {
      it->second += n;
      if (it->second == 0) items_.erase(it);
    } else {
      items_.insert(it, {id, n});
    }
  }

  // Removes n occurrences; throws if not present.
  void remove(SymbolId id, const Count& n = 1) {
    auto it = lower_bound(id);
    if (it == items_.end() || it->first != id || it->second < n)
      throw SpError(ErrorKind::InvalidState, "multiset underflow");
    it->second -= n;
    if (it->second == 0) items_.erase(it);
  }

  Count count(SymbolId id) const {
    auto it = lower_bound(id);
    if (it == items_.end() || it->first != id) return 0;
    return it->second;
  }

  bool contains(const Multiset& demand) const {
    for (const auto& [id, n] : demand.items_)
      if (count(id) < n) return false;
    return true;
  }

  // Largest k such that k copies of `demand` fit in this multiset.
  // Returns 0 for an empty demand guard-free callers must avoid.
  Count max_multiplicity(const Multiset& demand) const {
    Count best = -1;
    for (const auto& [id, n] : demand.items_) {
      Count k = count(id) / n;
      if (best < 0 || k < best) best = k;
      if (best == 0) return 0;
    }
    return best < 0 ? Count(0) : best;
  }

  void add_all(const Multiset& o, const Count& times = 1) {
    for (const auto& [id, n] : o.items_) add(id, n * times);
  }
  void remove_all(const Multiset& o, const Count& times = 1) {
    for (const auto& [id, n] : o.items_) remove(id, n * times);
  }

  bool empty() const { return items_.empty(); }
  size_t distinct() const { return items_.size(); }
  Count total() const {
    Count t = 0;
    for (const auto& [id, n] : items_) t += n;
    return t;
  }

  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

  bool operator==(const Multiset& o) const { return items_ == o.items_; }

 private:
  std::vector<Entry>::iterator lower_bound(SymbolId id) {
    auto it = items_.begin();
    while (it != items_.end() && it->first < id) ++it;
    return it;
  }
  std::vector<Entry>::const_iterator lower_bound(SymbolId id) const {
    auto it = items_.begin();
    while (it != items_.end() && it->first < id) ++it;
    return it;
  }

  std::vector<Entry> items_;
};

}  // namespace spsim
