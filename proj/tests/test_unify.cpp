#include <catch_amalgamated.hpp>

#include "properties.hpp"
#include "wifn/analyze.hpp"
#include "wifn/unify.hpp"

using namespace wifn;

namespace {

struct NslSetup {
  Context ctx;
  Narration narr;
  std::vector<GeneralizedRole> roles;
  MessageSpace space;
  AtomTable table;

  NslSetup()
      : ctx(load_context(wifn_test::fixture_text("nsl.ctx"))),
        narr(parse_narration(wifn_test::fixture_text("nsl.prot"), ctx)),
        roles(generalize(narr, ctx)),
        space(message_space(roles)),
        table(narr.atom_table(ctx)) {}

  Term t(const std::string& s) const { return parse_term(s, table, true); }

  Term pattern_like(const std::string& s) const {
    Term probe = parameterize(t(s), 99);
    for (const auto& p : space.patterns)
      if (alpha_equivalent(p, probe)) return p;
    FAIL("no such pattern in space: " << s);
    return nullptr;
  }
};

std::string binding_of(const Substitution& s, const std::string& key_display) {
  for (const auto& e : s.entries())
    if (print(e.key) == key_display) return print(e.value);
  return "<unbound>";
}

}  // namespace

TEST_CASE("mgu reproduces the responder-forwarding unifier table") {
  NslSetup nsl;

  // {Y1.A4}kB5 against {Na.A}kb: nonce, identity and key all bind
  Term p5 = nsl.pattern_like("{?Y.A}kb");
  Term target = nsl.t("{Na@i.A}kb");
  auto s = mgu(p5, target);
  REQUIRE(s.has_value());
  int salt = p5->b->atom.display_salt();
  CHECK(binding_of(*s, "?Y#" + std::to_string(salt)) == "Na@i");
  CHECK(binding_of(*s, "A#" + std::to_string(salt)) == "A");
  CHECK(binding_of(*s, "kb#" + std::to_string(salt)) == "kb");

  // {X2}kB4 against {Na.A}kb: the variable absorbs the whole body and the
  // key parameter crosses owners
  Term p4 = nsl.pattern_like("{?X}kb");
  auto s2 = mgu(p4, target);
  REQUIRE(s2.has_value());
  int salt4 = p4->b->atom.display_salt();
  CHECK(binding_of(*s2, "?X#" + std::to_string(salt4)) == "Na@i.A");
  auto s3 = mgu(p4, nsl.t("{B.Nb@i}ka"));
  REQUIRE(s3.has_value());
  CHECK(binding_of(*s3, "kb#" + std::to_string(salt4)) == "ka");
}

TEST_CASE("owner consistency rules out mixed-owner sources") {
  NslSetup nsl;
  // {B2.Na2}ka2 cannot unify with {B.Nb}ka: the nonce owner and the key
  // owner would have to be two different principals at once.
  Term p2 = nsl.pattern_like("{B.Na@i}ka");
  CHECK_FALSE(mgu(p2, nsl.t("{B.Nb@i}ka")).has_value());
  // while {B7.Nb7}ka6 does unify
  Term p6 = nsl.pattern_like("{B.Nb@i}ka");
  CHECK(mgu(p6, nsl.t("{B.Nb@i}ka")).has_value());
}

TEST_CASE("rigid constants clash") {
  Term A = mk_atom(Atom::ident("A"));
  Term B = mk_atom(Atom::ident("B"));
  CHECK_FALSE(mgu(A, B).has_value());
  auto s = mgu(A, A);
  REQUIRE(s.has_value());
  CHECK(s->empty());
  Term t = mk_enc(mk_pair(A, B), mk_atom(Atom::pub_key("kb", IdRef{"B", 0})));
  auto s2 = mgu(t, t);
  REQUIRE(s2.has_value());
  CHECK(s2->empty());
}

TEST_CASE("occurs check") {
  Term x = mk_var("X");
  Term kb = mk_atom(Atom::pub_key("kb", IdRef{"B", 0}));
  CHECK_FALSE(mgu(x, mk_enc(x, kb)).has_value());
}

TEST_CASE("unifiable_patterns reproduces the source tables") {
  NslSetup nsl;
  auto hits = [&](const std::string& target, const std::string& alpha) {
    return unifiable_patterns(nsl.space.patterns, nsl.t(target), nsl.t(alpha));
  };
  CHECK(hits("{Na@i.A}kb", "Na@i").size() == 3);
  CHECK(hits("{?X}kb", "?X").size() == 1);
  CHECK(hits("{B.?Y}ka", "?Y").size() == 2);

  // {B.Nb}ka has three sources including the responder's own pattern
  auto h = hits("{B.Nb@i}ka", "Nb@i");
  REQUIRE(h.size() == 3);
  bool self = false;
  for (const auto& hit : h) self = self || equal(hit.pattern, nsl.pattern_like("{B.Nb@i}ka"));
  CHECK(self);
}

TEST_CASE("unifiers are idempotent") {
  NslSetup nsl;
  for (const auto& target : {"{Na@i.A}kb", "{B.Nb@i}ka", "{B.?Y}ka"}) {
    Term tgt = nsl.t(target);
    for (const auto& p : nsl.space.patterns) {
      auto s = mgu(p, tgt);
      if (!s) continue;
      Term once = wifn::apply(*s, p);
      CHECK(equal(wifn::apply(*s, once), once));
    }
  }
}

TEST_CASE("unifiable_patterns keeps space order and returns sound unifiers") {
  NslSetup nsl;
  Term tgt = nsl.t("{Na@i.A}kb");
  auto hits = unifiable_patterns(nsl.space.patterns, tgt, nsl.t("Na@i"));
  REQUIRE(hits.size() == 3);
  size_t last = 0;
  for (const auto& h : hits) {
    CHECK(equal(wifn::apply(h.sigma, h.pattern), wifn::apply(h.sigma, tgt)));
    size_t idx = 0;
    for (; idx < nsl.space.patterns.size(); ++idx)
      if (equal(nsl.space.patterns[idx], h.pattern)) break;
    CHECK(idx >= last);
    last = idx;
  }
}

TEST_CASE("renaming invariance of unifiability") {
  NslSetup nsl;
  Term p = nsl.pattern_like("{?X}kb");
  Term tgt = nsl.t("{B.Nb@i}ka");
  CHECK(mgu(p, tgt).has_value() == mgu(alpha_rename(p, 57), tgt).has_value());
}

TEST_CASE("mgu soundness and symmetry on random terms") {
  CHECK(wifn_test::prop_mgu_sound(1000, 23) == "");
}

TEST_CASE("mgu most-generality by brute force on a small universe") {
  CHECK(wifn_test::prop_mgu_most_general(1000, 29) == "");
}
