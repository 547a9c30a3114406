#pragma once

#include <stdexcept>
#include <string>

namespace spsim {

enum class ErrorKind {
  // membrane tree construction
  DuplicateLabel,
  MissingSkin,
  OverlapViolation,
  BoundsViolation,
  AdjacencyViolation,
  ClearanceViolation,
  // geometry queries
  UnknownLabel,
  OutOfBounds,
  NotAdjacentToChild,
  NotAdjacentToEdge,
  // engine
  SelectionFailure,
  AuditViolation,
  // oracle
  TooLarge,
  // model language
  SyntaxError,
  UndeclaredSymbol,
  DuplicateDeclaration,
  UnboundParameter,
  EmptyRange,
  PlacementViolation,
  MeConflict,
  // workloads
  InvalidParams,
  InvalidState,
  GeometryMismatch,
  ShapeMismatch,
  IoError,
};

const char* to_string(ErrorKind k);

// Single exception type for the whole library. `line`/`col` are 1-based and
// only meaningful for model-text diagnostics (0 = not applicable).
class SpError : public std::runtime_error {
 public:
  SpError(ErrorKind kind, std::string msg);
  SpError(ErrorKind kind, int line, int col, std::string msg);

  ErrorKind kind() const { return kind_; }
  int line() const { return line_; }
  int col() const { return col_; }

 private:
  ErrorKind kind_;
  int line_ = 0;
  int col_ = 0;
};

}  // namespace spsim
