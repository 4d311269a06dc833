#include <catch_amalgamated.hpp>

#include "properties.hpp"
#include "wifn/analyze.hpp"
#include "wifn/witness.hpp"

using namespace wifn;

namespace {

// Context of the worked selection example: two symmetric keys, a secret
// shared by three parties, identities C and D in the message.
Context example_context() {
  return load_context(R"(
principals A, B, C, D, S, I
intruder I
theory empty
key kab = shared A B
key kas = shared A S
inv kab = kab
inv kas = kas
type kab = {A,B}
type kas = {A,S}
type alpha = {A,B,S}
)");
}

SecurityLevel lv(std::initializer_list<std::string> ids) {
  return SecurityLevel::of(std::set<std::string>(ids));
}

struct Analyzed {
  Context ctx;
  Narration narr;
  std::vector<GeneralizedRole> roles;
  MessageSpace space;
  AtomTable table;

  Analyzed(const std::string& ctx_file, const std::string& prot_file)
      : ctx(load_context(wifn_test::fixture_text(ctx_file))),
        narr(parse_narration(wifn_test::fixture_text(prot_file), ctx)),
        roles(generalize(narr, ctx)),
        space(message_space(roles)),
        table(narr.atom_table(ctx)) {}

  Term t(const std::string& s) const { return parse_term(s, table, true); }

  SecurityLevel lower(const std::string& alpha, const std::string& r_plus) const {
    return lower_bound(SelectionVariant::Max, t(alpha), t(r_plus), space, ctx).collapsed();
  }
  SecurityLevel upper(const std::string& alpha, const std::vector<std::string>& r_minus) const {
    std::vector<Term> ms;
    for (const auto& m : r_minus) ms.push_back(t(m));
    return upper_bound(SelectionVariant::Max, t(alpha), ms, ctx).collapsed();
  }
};

}  // namespace

TEST_CASE("worked example: max selection under both theories") {
  Context ctx = example_context();
  AtomTable table;
  table.ctx = &ctx;
  // alpha is an opaque typed atom; use a plain constant
  Term alpha = mk_atom(Atom::plain("alpha"));
  Term kab = mk_atom(Atom::sh_key("kab", IdRef{"A", 0}, IdRef{"B", 0}, SessRef::none()));
  Term kas = mk_atom(Atom::sh_key("kas", IdRef{"A", 0}, IdRef{"S", 0}, SessRef::none()));
  Term A = mk_atom(Atom::ident("A"));
  Term C = mk_atom(Atom::ident("C"));
  Term D = mk_atom(Atom::ident("D"));
  // {A.C.{alpha.D}kas}kab
  Term m = mk_enc(mk_pair(A, mk_pair(C, mk_enc(mk_pair(alpha, D), kas))), kab);

  // empty theory: identities across the on-path nesting plus kab⁻¹
  auto sel = select(SelectionVariant::Max, alpha, m, ctx);
  REQUIRE(sel.has_value());
  Selection expect = {{SelToken::Identity, "A"},
                      {SelToken::Identity, "C"},
                      {SelToken::Identity, "D"},
                      {SelToken::InverseKey, "kab"}};
  CHECK(*sel == expect);
  CHECK(F(SelectionVariant::Max, alpha, m, ctx).collapsed() == lv({"A", "B", "C", "D"}));

  // homomorphic normal form splits the neighbours away
  Context hctx = ctx;
  hctx.theory = TheoryTag::Homomorphic;
  CHECK(F(SelectionVariant::Max, alpha, m, hctx).collapsed() == lv({"A", "B"}));

  // Ek keeps only the inverse key, N only the identities
  Term simple = mk_enc(mk_pair(alpha, D), kas);
  CHECK(F(SelectionVariant::Ek, alpha, simple, ctx).collapsed() == lv({"A", "S"}));
  CHECK(F(SelectionVariant::N, alpha, simple, ctx).collapsed() == lv({"D"}));
  // N with no co-travelling identity values to top (documented literal reading)
  CHECK(F(SelectionVariant::N, alpha, mk_enc(alpha, kas), ctx).collapsed().is_top());
}

TEST_CASE("psi maps identities to themselves and inverse keys to their knowers") {
  Context ctx = example_context();
  Selection sel = {{SelToken::Identity, "A"},
                   {SelToken::Identity, "C"},
                   {SelToken::Identity, "D"},
                   {SelToken::InverseKey, "kab"}};
  CHECK(psi(sel, ctx) == lv({"A", "B", "C", "D"}));
  CHECK(psi({{SelToken::InverseKey, "kab"}}, ctx) == lv({"A", "B"}));
  CHECK(psi({}, ctx).is_top());
  CHECK_THROWS_AS(psi({{SelToken::InverseKey, "nokey"}}, ctx), analysis_error);
}

TEST_CASE("external protective key candidates") {
  Context ctx = example_context();
  Term alpha = mk_atom(Atom::plain("alpha"));
  Term kab = mk_atom(Atom::sh_key("kab", IdRef{"A", 0}, IdRef{"B", 0}, SessRef::none()));
  Term kas = mk_atom(Atom::sh_key("kas", IdRef{"A", 0}, IdRef{"S", 0}, SessRef::none()));
  Term A = mk_atom(Atom::ident("A"));
  Term C = mk_atom(Atom::ident("C"));
  Term D = mk_atom(Atom::ident("D"));
  Term m = mk_enc(mk_pair(A, mk_pair(C, mk_enc(mk_pair(alpha, D), kas))), kab);

  // typed atom: the outermost protective key only
  auto ks = external_protective_keys(alpha, m, ctx);
  REQUIRE(ks.size() == 1);
  CHECK(ks[0].tag == "kab");

  // a variable gets every key on its path, outermost first
  Term v = mk_var("V");
  Term mv = mk_enc(mk_pair(A, mk_enc(mk_pair(C, v), kas)), kab);
  auto kv = external_protective_keys(v, mv, ctx);
  REQUIRE(kv.size() == 2);
  CHECK(kv[0].tag == "kab");
  CHECK(kv[1].tag == "kas");

  // an atom in clear has none
  CHECK(external_protective_keys(alpha, mk_pair(alpha, A), ctx).empty());
  // absence is an error
  CHECK_THROWS_AS(external_protective_keys(alpha, A, ctx), analysis_error);
}

TEST_CASE("valuation basics") {
  Analyzed nsl("nsl.ctx", "nsl.prot");
  // F(Na, {Na}kb.{A}kb) = {B}
  CHECK(F(SelectionVariant::Max, nsl.t("Na@i"), nsl.t("{Na@i.A}kb"), nsl.ctx).collapsed() ==
        lv({"B"}));
  // F(X, {X}ka) = {A}
  CHECK(F(SelectionVariant::Max, nsl.t("?X"), nsl.t("{?X}ka"), nsl.ctx).collapsed() == lv({"A"}));
  // clear atom values to ALL
  CHECK(F(SelectionVariant::Max, nsl.t("Na@i"), nsl.t("Na@i"), nsl.ctx).collapsed().is_all());
  // absent atom values to top
  CHECK(F(SelectionVariant::Max, nsl.t("Na@i"), nsl.t("{B.Nb@i}ka"), nsl.ctx).collapsed().is_top());
  // an unprotected occurrence dominates protected ones
  CHECK(F(SelectionVariant::Max, nsl.t("Na@i"), nsl.t("Na@i.{Na@i}kb"), nsl.ctx)
            .collapsed()
            .is_all());
  // atoms occurring only under a hash are unexposed
  CHECK(F(SelectionVariant::Max, nsl.t("Nb@i"), nsl.t("h(A.Nb@i)"), nsl.ctx).collapsed().is_top());
}

TEST_CASE("derivative valuation on unified sources") {
  Analyzed nsl("nsl.ctx", "nsl.prot");
  Term target = nsl.t("{Na@i.A}kb");
  Term alpha = nsl.t("Na@i");
  auto hits = unifiable_patterns(nsl.space.patterns, target, alpha);
  REQUIRE(hits.size() == 3);
  // every source values Na at {B}: its own pattern, the blind-forward
  // variable, and the responder echo pattern
  for (const auto& h : hits)
    CHECK(F_derivative(SelectionVariant::Max, alpha, h.pattern, h.sigma, nsl.ctx).collapsed() ==
          lv({"B"}));
}

TEST_CASE("NSL bounds under the homomorphic theory") {
  Analyzed nsl("nsl.ctx", "nsl.prot");
  CHECK(nsl.lower("Na@i", "{Na@i.A}kb") == lv({"B"}));          // (1.0)
  CHECK(nsl.upper("Na@i", {}).is_top());                        // (1.1)
  CHECK(nsl.lower("?X", "A.B.{?X}kb") == lv({"B"}));            // (2.1)
  CHECK(nsl.upper("?X", {"{B.Na@i}ka.{B.?X}ka"}) == lv({"A"})); // (2.2)
  CHECK(nsl.lower("Nb@i", "{B.?Y}ka.{B.Nb@i}ka") == lv({"A"})); // (3.1)
  CHECK(nsl.upper("Nb@i", {"{?Y.A}kb"}).is_top());              // (3.2)
  CHECK(nsl.lower("?Y", "{B.?Y}ka.{B.Nb@i}ka") == lv({"A"}));   // (3.4)
  CHECK(nsl.upper("?Y", {"{?Y.A}kb"}) == lv({"B"}));            // (3.5)
}

TEST_CASE("amended Woo-Lam bounds under the empty theory") {
  Analyzed wl("woolam.ctx", "woolam_amended.prot");
  CHECK(wl.lower("kab@i", "{B.kab@i}kas") == lv({"A", "B", "S"}));            // (1.1)
  CHECK(wl.upper("kab@i", {"?X"}).is_top());                                  // (1.0)
  CHECK(wl.upper("?U", {"{A.?U.{B.?V}kas}kbs"}) == lv({"A", "B", "S"}));      // (3.1)
  CHECK(wl.lower("?U", "{?U.{A.?V}kbs}kbs") == lv({"A", "B", "S"}));          // (3.2)
  CHECK(wl.lower("?V", "{?U.{A.?V}kbs}kbs") == lv({"A", "B", "S"}));          // (3.4)

  // the receive-side value of V is a two-case split, both at {A,B,S}
  CasedLevel up =
      upper_bound(SelectionVariant::Max, wl.t("?V"), {wl.t("{A.?U.{B.?V}kas}kbs")}, wl.ctx);
  REQUIRE(up.cases.size() >= 1);
  CHECK(up.collapsed() == lv({"A", "B", "S"}));
}

TEST_CASE("flawed Woo-Lam bounds expose the drop") {
  Analyzed wl("woolam.ctx", "woolam_flawed.prot");
  // lower(kab) picks up a renamed foreign identity
  SecurityLevel lo = wl.lower("kab@i", "{?X.kab@i}kas");
  CHECK_FALSE(lo.is_all());
  REQUIRE(lo.ids().size() == 3);
  CHECK(lo.ids().count("A"));
  CHECK(lo.ids().count("S"));
  bool renamed_a = false;
  for (const auto& id : lo.ids()) renamed_a = renamed_a || id.rfind("A#", 0) == 0;
  CHECK(renamed_a);

  // the upper bound of U splits on the protective key: {A,B,S} under kbs,
  // {A,S} under kas
  CasedLevel up =
      upper_bound(SelectionVariant::Max, wl.t("?U"), {wl.t("{A.{?U.?V}kas}kbs")}, wl.ctx);
  REQUIRE(up.cases.size() == 2);
  CHECK(up.cases[0].key == "kbs");
  CHECK(up.cases[0].value == lv({"A", "B", "S"}));
  CHECK(up.cases[1].key == "kas");
  CHECK(up.cases[1].value == lv({"A", "S"}));

  // lower(U) = {B,S}: sources are the session-key payload and the echo
  CHECK(wl.lower("?U", "{?U.?V}kbs") == lv({"B", "S"}));
}

TEST_CASE("check_step verdicts on NSL roles") {
  Analyzed nsl("nsl.ctx", "nsl.prot");
  std::map<std::string, bool> verdicts;
  for (const auto& role : nsl.roles)
    for (const auto& row : check_step(SelectionVariant::Max, role, nsl.space, nsl.ctx))
      verdicts[row.atom] = row.pass;
  REQUIRE(verdicts.size() == 4);
  CHECK(verdicts.at("Na@i"));
  CHECK_FALSE(verdicts.at("?X"));
  CHECK_FALSE(verdicts.at("?Y"));
  CHECK(verdicts.at("Nb@i"));
}

TEST_CASE("public atoms always pass") {
  Analyzed wl("woolam.ctx", "woolam_amended.prot");
  // Nb is declared public: the right-hand side collapses to ALL
  for (const auto& role : wl.roles) {
    for (const auto& row : check_step(SelectionVariant::Max, role, wl.space, wl.ctx)) {
      if (row.atom == "Nb@i") {
        CHECK(row.type.has_value());
        CHECK(row.type->is_all());
        CHECK(row.pass);
      }
    }
  }
}

TEST_CASE("valuation well-formedness properties") {
  CHECK(wifn_test::prop_wellformedness(1000, 31) == "");
}

TEST_CASE("selection monotonicity under theory rewriting") {
  CHECK(wifn_test::prop_condition1(1000, 37) == "");
}

TEST_CASE("the self-source bounds the lower bound from above") {
  for (auto [ctxf, protf] : std::vector<std::pair<const char*, const char*>>{
           {"nsl.ctx", "nsl.prot"},
           {"nsl.ctx", "nsl_amended.prot"},
           {"woolam.ctx", "woolam_amended.prot"},
           {"woolam.ctx", "woolam_flawed.prot"}}) {
    Analyzed fx(ctxf, protf);
    for (const auto& role : fx.roles) {
      const RoleStep* send = role.final_send();
      if (!send) continue;
      for (const auto& row : check_step(SelectionVariant::Max, role, fx.space, fx.ctx)) {
        Term alpha = fx.t(row.atom);
        Term d = alpha->is_var() ? derive_keep(send->payload, alpha->var)
                                 : derive(send->payload);
        SecurityLevel self = F(SelectionVariant::Max, alpha, d, fx.ctx).collapsed();
        SecurityLevel lo =
            lower_bound(SelectionVariant::Max, alpha, send->payload, fx.space, fx.ctx).collapsed();
        CHECK(geq(self, lo));
      }
    }
  }
}
