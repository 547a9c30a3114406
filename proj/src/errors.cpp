#include "spsim/errors.hpp"

#include <sstream>

namespace spsim {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::DuplicateLabel: return "DuplicateLabel";
    case ErrorKind::MissingSkin: return "MissingSkin";
    case ErrorKind::OverlapViolation: return "OverlapViolation";
    case ErrorKind::BoundsViolation: return "BoundsViolation";
    case ErrorKind::AdjacencyViolation: return "AdjacencyViolation";
    case ErrorKind::ClearanceViolation: return "ClearanceViolation";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::OutOfBounds: return "OutOfBounds";
    case ErrorKind::NotAdjacentToChild: return "NotAdjacentToChild";
    case ErrorKind::NotAdjacentToEdge: return "NotAdjacentToEdge";
    case ErrorKind::SelectionFailure: return "SelectionFailure";
    case ErrorKind::AuditViolation: return "AuditViolation";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::UndeclaredSymbol: return "UndeclaredSymbol";
    case ErrorKind::DuplicateDeclaration: return "DuplicateDeclaration";
    case ErrorKind::UnboundParameter: return "UnboundParameter";
    case ErrorKind::EmptyRange: return "EmptyRange";
    case ErrorKind::PlacementViolation: return "PlacementViolation";
    case ErrorKind::MeConflict: return "MeConflict";
    case ErrorKind::InvalidParams: return "InvalidParams";
    case ErrorKind::InvalidState: return "InvalidState";
    case ErrorKind::GeometryMismatch: return "GeometryMismatch";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::IoError: return "IoError";
  }
  return "UnknownError";
}

namespace {
std::string format_message(ErrorKind kind, int line, int col, const std::string& msg) {
  std::ostringstream os;
  os << to_string(kind);
  if (line > 0) os << " at " << line << ":" << col;
  os << ": " << msg;
  return os.str();
}
}  // namespace

SpError::SpError(ErrorKind kind, std::string msg)
    : std::runtime_error(format_message(kind, 0, 0, msg)), kind_(kind) {}

SpError::SpError(ErrorKind kind, int line, int col, std::string msg)
    : std::runtime_error(format_message(kind, line, col, msg)),
      kind_(kind),
      line_(line),
      col_(col) {}

}  // namespace spsim
