#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "spsim/configuration.hpp"

// Textual model language. `parse` produces an AST, `render` prints the
// canonical form, `expand_families` instantiates quantified rule families and
// parameter references, and `compile_model` turns a ground AST into a runnable
// Model. parse(render(ast)) == ast holds for every AST produced by parse or by
// the bundled builders; render(parse(text)) is the canonical spelling of text.
namespace spsim::dsl {

// Linear integer expressions over quantifier variables and parameters.
struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct Expr {
  enum class Kind { Number, Var, Add, Sub, Mul };
  Kind kind = Kind::Number;
  long long value = 0;  // Number
  std::string name;     // Var
  ExprPtr lhs, rhs;     // Add/Sub/Mul
};

ExprPtr make_number(long long value);
ExprPtr make_var(std::string name);
ExprPtr make_binary(Expr::Kind kind, ExprPtr lhs, ExprPtr rhs);
bool expr_equal(const ExprPtr& a, const ExprPtr& b);  // both-null counts as equal

using Env = std::map<std::string, long long>;
// Throws UnboundParameter on a variable missing from the environment.
long long eval_expr(const ExprPtr& expr, const Env& env);

// A symbol occurrence: plain name, or indexed family reference Base_{expr}.
struct SymbolRef {
  std::string base;
  ExprPtr index;  // null = plain name
};
bool operator==(const SymbolRef& a, const SymbolRef& b);

// One alphabet-symbol term with an optional multiplicity exponent.
struct TermExpr {
  SymbolRef sym;
  ExprPtr count;  // null = 1
};
bool operator==(const TermExpr& a, const TermExpr& b);
using MultisetExpr = std::vector<TermExpr>;

struct TargetExpr {
  enum class Kind { Here, Delta, Out, In };
  Kind kind = Kind::Here;
  int dx = 0, dy = 0;  // Delta; never (0,0), parse folds that into Here
  int in_label = 0;    // In
};
bool operator==(const TargetExpr& a, const TargetExpr& b);

// Here-targeted messages render bare (no parens, no @); parse merges runs of
// consecutive here-targeted messages so the bare form stays canonical.
struct MessageExpr {
  MultisetExpr payload;
  TargetExpr target;
};
bool operator==(const MessageExpr& a, const MessageExpr& b);

struct RuleExpr {
  bool pair = false;
  MultisetExpr lhs1, lhs2;                // lhs2 used when pair
  std::vector<MessageExpr> rhs1, rhs2;    // empty vector = lambda
  uint8_t orientations = 0;               // pair only; 0 on single rules
};
bool operator==(const RuleExpr& a, const RuleExpr& b);

struct VarRange {
  std::string var;
  ExprPtr lo, hi;  // inclusive bounds; may reference params and earlier vars
};
bool operator==(const VarRange& a, const VarRange& b);

enum class CmpOp { Lt, Le, Eq, Ne, Ge, Gt };

struct Constraint {
  ExprPtr lhs;
  CmpOp op = CmpOp::Lt;
  ExprPtr rhs;
};
bool operator==(const Constraint& a, const Constraint& b);

// Plain rule when `ranges` is empty, quantified family otherwise.
struct RuleItem {
  std::vector<VarRange> ranges;
  std::vector<Constraint> where;
  RuleExpr rule;
};
bool operator==(const RuleItem& a, const RuleItem& b);

struct MembraneDecl {
  int label = 0;
  std::optional<int> parent;  // absent on the skin
  int ox = 0, oy = 0;         // parent-relative origin; (0,0) on the skin
  int width = 0, height = 0;
  std::vector<RuleItem> items;
};
bool operator==(const MembraneDecl& a, const MembraneDecl& b);

struct PlacementDecl {
  MultisetExpr what;
  int label = 0;
  int x = 0, y = 0;  // membrane-relative
};
bool operator==(const PlacementDecl& a, const PlacementDecl& b);

struct Program {
  std::vector<std::string> objects;
  std::vector<std::string> me_objects;
  std::vector<std::pair<std::string, long long>> params;
  std::vector<MembraneDecl> membranes;
  std::vector<PlacementDecl> placements;
};
bool operator==(const Program& a, const Program& b);

// Throws SyntaxError (with line/col), UndeclaredSymbol, DuplicateDeclaration.
Program parse_program(std::string_view text);

std::string render_program(const Program& program);

// Instantiates every family and evaluates every count/index to a literal.
// `overrides` must name declared parameters only. A range that evaluates with
// lo > hi throws EmptyRange (ranges dependent on earlier quantifier variables
// are checked per binding); a `where` clause that filters everything out is
// legal and yields zero ground rules. Materialized index values must be
// nonnegative. The result carries no params, quantifiers, or expressions.
Program expand_families(const Program& program, const Env& overrides = {});

// Ground program -> runnable model. Validates membrane geometry and
// placements (PlacementViolation outside the owning region, MeConflict on
// exclusivity breaches) and resolves in-targets (UnknownLabel).
Model compile_model(const Program& ground);

// parse + expand + compile.
Model load_model(std::string_view text, const Env& overrides = {});

}  // namespace spsim::dsl
