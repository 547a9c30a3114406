#include "spsim/bone.hpp"

#include <string>
#include <utility>
#include <vector>

#include "spsim/errors.hpp"
#include "spsim/rules.hpp"

namespace spsim {
namespace {

using dsl::CmpOp;
using dsl::Constraint;
using dsl::Expr;
using dsl::ExprPtr;
using dsl::MembraneDecl;
using dsl::MessageExpr;
using dsl::MultisetExpr;
using dsl::Program;
using dsl::RuleItem;
using dsl::TargetExpr;
using dsl::TermExpr;
using dsl::VarRange;

ExprPtr num(long long v) { return dsl::make_number(v); }
ExprPtr var(const char* name) { return dsl::make_var(name); }
ExprPtr add(ExprPtr a, ExprPtr b) {
  return dsl::make_binary(Expr::Kind::Add, std::move(a), std::move(b));
}
ExprPtr sub(ExprPtr a, ExprPtr b) {
  return dsl::make_binary(Expr::Kind::Sub, std::move(a), std::move(b));
}

TermExpr term(const char* name, ExprPtr count = nullptr) {
  return {{name, nullptr}, std::move(count)};
}
TermExpr fam(const char* base, ExprPtr index, ExprPtr count = nullptr) {
  return {{base, std::move(index)}, std::move(count)};
}

MessageExpr here(MultisetExpr payload) {
  return {std::move(payload), {TargetExpr::Kind::Here, 0, 0, 0}};
}
MessageExpr to(MultisetExpr payload, int dx, int dy) {
  return {std::move(payload), {TargetExpr::Kind::Delta, dx, dy, 0}};
}
MessageExpr out(MultisetExpr payload) {
  return {std::move(payload), {TargetExpr::Kind::Out, 0, 0, 0}};
}
MessageExpr into(MultisetExpr payload, int label) {
  return {std::move(payload), {TargetExpr::Kind::In, 0, 0, label}};
}

RuleItem single(MultisetExpr lhs, std::vector<MessageExpr> rhs) {
  RuleItem item;
  item.rule.lhs1 = std::move(lhs);
  item.rule.rhs1 = std::move(rhs);
  return item;
}

RuleItem pair_item(MultisetExpr lhs1, MultisetExpr lhs2,
                   std::vector<MessageExpr> rhs1, std::vector<MessageExpr> rhs2,
                   uint8_t orientations = kOrientAll) {
  RuleItem item;
  item.rule.pair = true;
  item.rule.lhs1 = std::move(lhs1);
  item.rule.lhs2 = std::move(lhs2);
  item.rule.rhs1 = std::move(rhs1);
  item.rule.rhs2 = std::move(rhs2);
  item.rule.orientations = orientations;
  return item;
}

RuleItem forall(std::vector<VarRange> ranges, std::vector<Constraint> where,
                RuleItem item) {
  item.ranges = std::move(ranges);
  item.where = std::move(where);
  return item;
}

VarRange range(const char* v, ExprPtr lo, ExprPtr hi) {
  return {v, std::move(lo), std::move(hi)};
}

void fail(const std::string& what) {
  throw SpError(ErrorKind::InvalidParams, what);
}

}  // namespace

void validate(const BoneParams& p) {
  if (p.m <= 0) fail("m must be positive");
  if (p.n <= 0) fail("n must be positive");
  if (p.c_max <= 0) fail("c_max must be positive");
  if (p.m + p.n > p.c_max) fail("m + n must not exceed c_max");
  if (p.p_g < 0.0 || p.p_g > 1.0) fail("p_g must lie in [0, 1]");
  if (p.p_h < 0.0 || p.p_h > 1.0) fail("p_h must lie in [0, 1]");
  if (p.oy_fraction < 0.0 || p.oy_fraction > 1.0)
    fail("oy_fraction must lie in [0, 1]");
  if (p.k <= 0) fail("k must be positive");
  if (p.ell <= 0) fail("ell must be positive");
  if (p.n_oc < 4) fail("n_oc must be at least 4");
  if (p.n_dc < 1) fail("n_dc must be at least 1");
  if (p.max_sim < 0) fail("max_sim must be nonnegative");
  if (p.max_sim_bmu < 0) fail("max_sim_bmu must be nonnegative");
  if (p.macro_phase_steps < 1) fail("macro_phase_steps must be positive");
  if (p.macro_w < 1 || p.macro_h < 1) fail("macro grid must be at least 1x1");
  // The marrow membrane sits at (micro_w-3, 1) with size 2 x (micro_h-2);
  // the skin must leave a one-cell ring around it, plus at least one column
  // of tissue for the mineralized zone.
  if (p.micro_w < 5) fail("micro_w must be at least 5");
  if (p.micro_h < 3) fail("micro_h must be at least 3");
}

Program macro_source(const BoneParams& p) {
  validate(p);
  Program prog;
  prog.objects = {"c", "a", "b_1", "b", "d_1", "d", "f", "g", "h", "r"};
  prog.params = {{"m", p.m}, {"n", p.n}};

  MembraneDecl skin;
  skin.label = 1;
  skin.width = p.macro_w;
  skin.height = p.macro_h;

  // Four-step probe: a countdown pulse d_1/d races the uptake chain b_1/b.
  // f survives only when the cell held between m and m+n-1 copies of c, and
  // a stimulus g or h then converts f into the activation marker r.
  skin.items.push_back(
      single({term("c", var("m")), term("a")}, {here({term("b_1"), term("d_1")})}));
  skin.items.push_back(single({term("c", var("n")), term("b_1")},
                              {here({term("c", add(var("n"), var("m"))), term("b")})}));
  skin.items.push_back(single({term("d_1")}, {here({term("d")})}));
  skin.items.push_back(single({term("d"), term("b")}, {}));
  skin.items.push_back(
      single({term("d"), term("b_1")}, {here({term("c", var("m")), term("f")})}));
  skin.items.push_back(single({term("f"), term("g")}, {here({term("r")})}));
  skin.items.push_back(single({term("f"), term("h")}, {here({term("r")})}));

  prog.membranes.push_back(std::move(skin));
  return prog;
}

Program micro_source(const BoneParams& p) {
  validate(p);
  Program prog;
  prog.objects = {"s", "s'", "Pc", "Pb", "o"};
  prog.me_objects = {"Oy", "C", "Oc"};
  if (p.rebuild_enabled) prog.me_objects.push_back("Ob");
  prog.params = {
      {"k", p.k}, {"l", p.ell}, {"N_OC", p.n_oc}, {"N_DC", p.n_dc}};

  MembraneDecl skin;
  skin.label = 1;
  skin.width = p.micro_w;
  skin.height = p.micro_h;

  // Activation signal: drifts east toward the marrow membrane, branching
  // north/south along the way; stray copies leave through the skin.
  skin.items.push_back(single({term("s")}, {to({term("s")}, 0, 1),
                                            to({term("s")}, 1, 0),
                                            to({term("s")}, 0, -1)}));
  skin.items.push_back(single({term("s")}, {to({term("s")}, 1, 0)}));
  skin.items.push_back(single({term("s")}, {into({term("s")}, 2)}));
  skin.items.push_back(single({term("s")}, {out({term("s")})}));

  // Pre-osteoclast random walk; staying put is a legal move.
  skin.items.push_back(single({term("Pc")}, {here({term("Pc")})}));
  skin.items.push_back(single({term("Pc")}, {to({term("Pc")}, 0, 1)}));
  skin.items.push_back(single({term("Pc")}, {to({term("Pc")}, 0, -1)}));
  skin.items.push_back(single({term("Pc")}, {to({term("Pc")}, -1, 0)}));
  skin.items.push_back(single({term("Pc")}, {to({term("Pc")}, 1, 0)}));

  // Aggregation: h colocated precursors seed a cluster C_h, clusters merge
  // with neighbours and absorb single precursors one by one, and a cluster
  // reaching N_OC members becomes a fresh osteoclast Oc_0. Cluster sizes
  // live in [4, N_OC), so the families below are empty or absent for small
  // N_OC; at N_OC = 4 formation degenerates to a single direct rule.
  if (p.n_oc >= 5) {
    skin.items.push_back(
        forall({range("h", num(4), sub(var("N_OC"), num(1)))}, {},
               single({term("Pc", var("h"))}, {here({fam("C", var("h"))})})));
    skin.items.push_back(forall(
        {range("h1", num(4), sub(var("N_OC"), num(1))),
         range("h2", num(4), sub(var("N_OC"), num(1)))},
        {{add(var("h1"), var("h2")), CmpOp::Lt, var("N_OC")}},
        pair_item({term("Pc", var("h1"))}, {term("Pc", var("h2"))}, {},
                  {here({fam("C", add(var("h1"), var("h2")))})})));
  }
  if (p.n_oc >= 6) {
    skin.items.push_back(
        forall({range("h", num(4), sub(var("N_OC"), num(2)))}, {},
               pair_item({fam("C", var("h"))}, {term("Pc")},
                         {here({fam("C", add(var("h"), num(1)))})}, {})));
    skin.items.push_back(
        forall({range("h", num(4), sub(var("N_OC"), num(2)))}, {},
               single({fam("C", var("h")), term("Pc")},
                      {here({fam("C", add(var("h"), num(1)))})})));
  }
  if (p.n_oc >= 5) {
    skin.items.push_back(pair_item({fam("C", sub(var("N_OC"), num(1)))},
                                   {term("Pc")}, {here({fam("Oc", num(0))})},
                                   {}));
    skin.items.push_back(single({fam("C", sub(var("N_OC"), num(1))), term("Pc")},
                                {here({fam("Oc", num(0))})}));
  } else {
    skin.items.push_back(
        single({term("Pc", num(4))}, {here({fam("Oc", num(0))})}));
  }

  // Resorption: osteoclasts march west, destroying mineralized matrix and
  // osteocytes; after N_DC kills the osteoclast dies, leaving the signal o.
  skin.items.push_back(
      forall({range("z", num(0), sub(var("N_DC"), num(1)))}, {},
             single({fam("Oc", var("z"))}, {to({fam("Oc", var("z"))}, -1, 0)})));
  if (p.n_dc >= 2) {
    skin.items.push_back(
        forall({range("z", num(0), sub(var("N_DC"), num(2)))}, {},
               pair_item({term("Oy")}, {fam("Oc", var("z"))},
                         {here({fam("Oc", add(var("z"), num(1)))})}, {},
                         kOrientE)));
    skin.items.push_back(
        forall({range("z", num(0), sub(var("N_DC"), num(2)))}, {},
               pair_item({term("C")}, {fam("Oc", var("z"))},
                         {here({fam("Oc", add(var("z"), num(1)))})}, {},
                         kOrientE)));
  }
  skin.items.push_back(pair_item({term("Oy")},
                                 {fam("Oc", sub(var("N_DC"), num(1)))}, {},
                                 {here({term("o")})}, kOrientE));
  skin.items.push_back(pair_item({term("C")},
                                 {fam("Oc", sub(var("N_DC"), num(1)))}, {},
                                 {here({term("o")})}, kOrientE));

  if (p.rebuild_enabled) {
    // Optional closure of the cycle: the death signal diffuses east like s,
    // recruits a waiting pre-osteoblast, and the builder Ob_z lays down new
    // matrix cell by cell while drifting east, dying after N_DC deposits.
    skin.items.push_back(single({term("o")}, {to({term("o")}, 0, 1),
                                              to({term("o")}, 1, 0),
                                              to({term("o")}, 0, -1)}));
    skin.items.push_back(single({term("o")}, {to({term("o")}, 1, 0)}));
    skin.items.push_back(
        single({term("o"), term("Pb")}, {here({fam("Ob", num(0))})}));
    if (p.n_dc >= 2) {
      skin.items.push_back(
          forall({range("z", num(0), sub(var("N_DC"), num(2)))}, {},
                 single({fam("Ob", var("z"))},
                        {here({term("C")}),
                         to({fam("Ob", add(var("z"), num(1)))}, 1, 0)})));
    }
    skin.items.push_back(single({fam("Ob", sub(var("N_DC"), num(1)))},
                                {here({term("C")})}));
  }

  prog.membranes.push_back(std::move(skin));

  // Marrow strip along the right edge: activation turns one s into a wave of
  // precursors pushed into the tissue, then the spent marker s' absorbs any
  // further s and copies itself along the strip.
  MembraneDecl marrow;
  marrow.label = 2;
  marrow.parent = 1;
  marrow.ox = p.micro_w - 3;
  marrow.oy = 1;
  marrow.width = 2;
  marrow.height = p.micro_h - 2;
  marrow.items.push_back(single({term("s")},
                                {here({term("s'")}),
                                 out({term("Pc", var("k"))}),
                                 out({term("Pb", var("l"))})}));
  marrow.items.push_back(single({term("s'"), term("s")}, {here({term("s'")})}));
  marrow.items.push_back(
      single({term("s'")}, {here({term("s'")}), to({term("s'")}, 0, 1)}));
  marrow.items.push_back(
      single({term("s'")}, {here({term("s'")}), to({term("s'")}, 0, -1)}));
  prog.membranes.push_back(std::move(marrow));

  return prog;
}

Program build_macro(const BoneParams& p) {
  return dsl::expand_families(macro_source(p));
}

Program build_micro(const BoneParams& p) {
  return dsl::expand_families(micro_source(p));
}

Model macro_model(const BoneParams& p) {
  return dsl::compile_model(build_macro(p));
}

Model micro_model(const BoneParams& p) {
  return dsl::compile_model(build_micro(p));
}

}  // namespace spsim
