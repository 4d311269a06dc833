#pragma once

// The valuation core: protective-key search, the Max/Ek/N selections on
// normal forms, the morphism to security levels, the derivative application,
// and the static lower/upper bounds checked per send step.
//
// For an element alpha inside a component, the external protective key is
// the outermost encryption key k on the path to alpha with ⌜k⁻¹⌝ ⊒ ⌜alpha⌝.
// A clear or unprotected occurrence values to ALL. When alpha is a variable
// its type is unknown, so every key on the path yields one case ("k is the
// external protective key") and a verdict must hold in all cases.
//
// Selections gather what travels with alpha under k: an identity is
// co-travelling unless an encryption boundary separates it from alpha — a
// boundary being any Enc that is not on alpha's path and whose key differs
// from k. Hash contents never travel anywhere: digests are opaque, both for
// occurrences of alpha and for identity selection.

#include <algorithm>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wifn/context.hpp"
#include "wifn/errors.hpp"
#include "wifn/report.hpp"
#include "wifn/rewrite.hpp"
#include "wifn/roles.hpp"
#include "wifn/unify.hpp"

namespace wifn {

// ---------------------------------------------------------------------------
// Cased levels
// ---------------------------------------------------------------------------

// A level computed under one or more protective-key hypotheses. The key is
// empty when the value is unconditional.
struct BoundCase {
  std::string key;
  SecurityLevel value;
};

struct CasedLevel {
  std::vector<BoundCase> cases;  // never empty

  static CasedLevel single(SecurityLevel v, std::string key = "") {
    CasedLevel c;
    c.cases.push_back(BoundCase{std::move(key), std::move(v)});
    return c;
  }

  SecurityLevel collapsed() const {
    SecurityLevel acc = SecurityLevel::top();
    for (const auto& c : cases) acc = meet(acc, c.value);
    return acc;
  }
};

namespace detail {

// Joins case labels as an ordered set of key names.
inline std::string join_label(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  std::string out = a;
  size_t pos = 0;
  while (pos <= b.size()) {
    size_t bar = b.find('|', pos);
    if (bar == std::string::npos) bar = b.size();
    std::string part = b.substr(pos, bar - pos);
    if (!part.empty() && ("|" + out + "|").find("|" + part + "|") == std::string::npos)
      out += "|" + part;
    pos = bar + 1;
  }
  return out;
}

}  // namespace detail

// Pointwise meet over every case combination; identical values are merged.
inline CasedLevel meet_cases(const CasedLevel& a, const CasedLevel& b) {
  CasedLevel out;
  for (const auto& x : a.cases) {
    for (const auto& y : b.cases) {
      SecurityLevel v = meet(x.value, y.value);
      std::string label = detail::join_label(x.key, y.key);
      bool dup = false;
      for (auto& e : out.cases)
        if (e.value == v) {
          dup = true;
          break;
        }
      if (!dup) out.cases.push_back(BoundCase{label, v});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Selections
// ---------------------------------------------------------------------------

struct SelToken {
  enum Kind { Identity, InverseKey } kind = Identity;
  std::string name;  // identity display, or the inverse key's base name

  friend bool operator<(const SelToken& a, const SelToken& b) {
    return std::tie(a.kind, a.name) < std::tie(b.kind, b.name);
  }
  friend bool operator==(const SelToken& a, const SelToken& b) {
    return a.kind == b.kind && a.name == b.name;
  }
};

using Selection = std::set<SelToken>;

// The morphism from selections to levels: an identity maps to itself, an
// inverse key to the set of principals that know it; tokens combine by meet.
// The empty selection is top.
inline SecurityLevel psi(const Selection& sel, const Context& ctx) {
  SecurityLevel acc = SecurityLevel::top();
  for (const auto& tok : sel) {
    if (tok.kind == SelToken::Identity)
      acc = meet(acc, SecurityLevel::of({tok.name}));
    else
      acc = meet(acc, ctx.type_of(tok.name));
  }
  return acc;
}

namespace detail {

// One occurrence of the analyzed element: the Enc nodes strictly containing
// it, outermost first. Occurrences inside hashes or in key position are not
// collected.
struct Occurrence {
  std::vector<Term> enc_nodes;
};

inline void collect_occurrences(const Term& t, const Term& alpha, std::vector<Term>& encs,
                                std::vector<Occurrence>& out) {
  if (!t || t->is_eps()) return;
  switch (t->tag) {
    case TermNode::Tag::Atom:
      if (alpha->is_atom() && t->atom == alpha->atom) out.push_back(Occurrence{encs});
      return;
    case TermNode::Tag::Var:
      if (alpha->is_var() && t->var == alpha->var) out.push_back(Occurrence{encs});
      return;
    case TermNode::Tag::Pair:
      collect_occurrences(t->a, alpha, encs, out);
      collect_occurrences(t->b, alpha, encs, out);
      return;
    case TermNode::Tag::Enc:
      encs.push_back(t);
      collect_occurrences(t->a, alpha, encs, out);
      encs.pop_back();
      return;  // the key position is not an exposure of alpha
    case TermNode::Tag::Hash:
      return;  // digests are opaque
    case TermNode::Tag::Eps:
      return;
  }
}

inline bool same_key(const Term& enc_key, const Term& case_key) {
  return enc_key->is_atom() && case_key->is_atom() && enc_key->atom == case_key->atom;
}

// Identities travelling with alpha under the protection of enc_node's key.
inline void collect_zone_identities(const Term& t, const Term& alpha,
                                    const std::vector<Term>& alpha_path, const Term& case_key,
                                    Selection& sel) {
  if (!t || t->is_eps()) return;
  switch (t->tag) {
    case TermNode::Tag::Atom:
      if (t->atom.kind == AtomKind::Ident && !(alpha->is_atom() && t->atom == alpha->atom))
        sel.insert(SelToken{SelToken::Identity, t->atom.str()});
      return;
    case TermNode::Tag::Pair:
      collect_zone_identities(t->a, alpha, alpha_path, case_key, sel);
      collect_zone_identities(t->b, alpha, alpha_path, case_key, sel);
      return;
    case TermNode::Tag::Enc: {
      bool on_alpha_path = false;
      for (const auto& e : alpha_path)
        if (e.get() == t.get()) on_alpha_path = true;
      if (on_alpha_path || same_key(t->b, case_key))
        collect_zone_identities(t->a, alpha, alpha_path, case_key, sel);
      return;  // other ciphertexts (and all keys) are out of the zone
    }
    case TermNode::Tag::Hash:
      return;  // identities inside digests are never co-travellers
    default:
      return;
  }
}

}  // namespace detail

// The selection for alpha in a component, for the case where `enc_node` (one
// of the Enc nodes containing the occurrence) is the external protective
// key. Per variant: Max takes co-travelling identities plus k⁻¹, Ek only
// k⁻¹, N only the identities.
inline Selection select_at(SelectionVariant variant, const Term& alpha,
                           const detail::Occurrence& occ, const Term& enc_node,
                           const Context& ctx) {
  Selection sel;
  const Term& key = enc_node->b;
  if (variant != SelectionVariant::N && key->is_atom())
    sel.insert(SelToken{SelToken::InverseKey, ctx.inverse(key->atom.tag)});
  if (variant != SelectionVariant::Ek) {
    // alpha's path strictly below enc_node
    std::vector<Term> below;
    bool found = false;
    for (const auto& e : occ.enc_nodes) {
      if (found) below.push_back(e);
      if (e.get() == enc_node.get()) found = true;
    }
    detail::collect_zone_identities(enc_node->a, alpha, below, key, sel);
  }
  return sel;
}

// Candidate external protective keys of alpha in m, per occurrence. For a
// typed atom this is the outermost key whose inverse dominates ⌜alpha⌝ (none
// when unprotected); for a variable, every key on the path, outermost first.
inline std::vector<Atom> external_protective_keys(const Term& alpha, const Term& m,
                                                  const Context& ctx) {
  std::vector<detail::Occurrence> occs;
  std::vector<Term> encs;
  detail::collect_occurrences(m, alpha, encs, occs);
  if (occs.empty()) {
    bool present = alpha->is_atom() ? atoms(m).count(alpha->atom) > 0
                                    : vars(m).count(alpha->var) > 0;
    if (present) return {};  // only hash-covered or key-position occurrences: no exposure
    throw analysis_error("element " + print(alpha) + " does not occur in " + print(m));
  }
  std::vector<Atom> out;
  auto push = [&](const Atom& a) {
    for (const auto& e : out)
      if (e == a) return;
    out.push_back(a);
  };
  for (const auto& occ : occs) {
    if (alpha->is_atom()) {
      SecurityLevel t = ctx.type_of(alpha->atom);
      for (const auto& e : occ.enc_nodes) {
        if (!e->b->is_atom()) continue;
        if (geq(ctx.inverse_type(e->b->atom), t)) {
          push(e->b->atom);
          break;
        }
      }
    } else {
      for (const auto& e : occ.enc_nodes)
        if (e->b->is_atom()) push(e->b->atom);
    }
  }
  return out;
}

// Selection of a typed atom at its external protective key, unioned over its
// occurrences (pair components contribute the union of their
// subselections). nullopt when alpha has no occurrence or some occurrence
// lacks a protective key (the bottom selection, "all atoms").
inline std::optional<Selection> select(SelectionVariant variant, const Term& alpha, const Term& m,
                                       const Context& ctx) {
  std::vector<detail::Occurrence> occs;
  std::vector<Term> encs;
  detail::collect_occurrences(m, alpha, encs, occs);
  if (occs.empty()) return std::nullopt;
  SecurityLevel t = ctx.type_of(alpha->atom);
  Selection sel;
  for (const auto& occ : occs) {
    const Term* chosen = nullptr;
    for (const auto& e : occ.enc_nodes) {
      if (!e->b->is_atom()) continue;
      if (geq(ctx.inverse_type(e->b->atom), t)) {
        chosen = &e;
        break;
      }
    }
    if (!chosen) return std::nullopt;  // unprotected occurrence
    Selection s = select_at(variant, alpha, occ, *chosen, ctx);
    sel.insert(s.begin(), s.end());
  }
  return sel;
}

namespace detail {

inline CasedLevel value_of_occurrence(SelectionVariant variant, const Term& alpha,
                                      const Occurrence& occ, const Context& ctx,
                                      bool alpha_typed) {
  if (alpha_typed) {
    SecurityLevel t = ctx.type_of(alpha->atom);
    for (const auto& e : occ.enc_nodes) {
      if (!e->b->is_atom()) continue;
      if (geq(ctx.inverse_type(e->b->atom), t))
        return CasedLevel::single(psi(select_at(variant, alpha, occ, e, ctx), ctx));
    }
    return CasedLevel::single(SecurityLevel::all());  // unprotected occurrence
  }
  // unknown type: one case per candidate external key
  CasedLevel out;
  for (const auto& e : occ.enc_nodes) {
    if (!e->b->is_atom()) continue;
    SecurityLevel v = psi(select_at(variant, alpha, occ, e, ctx), ctx);
    bool dup = false;
    for (const auto& c : out.cases)
      if (c.value == v) dup = true;
    if (!dup) out.cases.push_back(BoundCase{e->b->atom.str(), v});
  }
  if (out.cases.empty()) return CasedLevel::single(SecurityLevel::all());  // clear variable
  return out;
}

inline CasedLevel F_component(SelectionVariant variant, const Term& alpha, const Term& comp,
                              const Context& ctx) {
  std::vector<Occurrence> occs;
  std::vector<Term> encs;
  collect_occurrences(comp, alpha, encs, occs);
  if (occs.empty()) return CasedLevel::single(SecurityLevel::top());
  bool typed = alpha->is_atom();
  CasedLevel acc = CasedLevel::single(SecurityLevel::top());
  for (const auto& occ : occs)
    acc = meet_cases(acc, value_of_occurrence(variant, alpha, occ, ctx, typed));
  return acc;
}

}  // namespace detail

// The valuation F = psi ∘ selection on the theory normal form. Components of
// a pairing combine by meet; an element that does not occur is top; a clear
// or unprotected occurrence makes the whole value ALL.
inline CasedLevel F(SelectionVariant variant, const Term& alpha, const Term& m,
                    const Context& ctx) {
  Term n = normalize(m, ctx.theory);
  CasedLevel acc = CasedLevel::single(SecurityLevel::top());
  for (const auto& comp : components(n))
    acc = meet_cases(acc, detail::F_component(variant, alpha, comp, ctx));
  return acc;
}

// F on the derivative of a unified source. The pattern is first rewritten by
// the atom-parameter part of the unifier (the static neighborhood); if alpha
// survives in the static part the valuation runs on ∂pattern, otherwise
// alpha arrived through a variable Z of the pattern and the valuation runs
// on Z in ∂[Z̄]pattern.
inline CasedLevel F_derivative(SelectionVariant variant, const Term& alpha, const Term& pattern,
                               const Substitution& sigma, const Context& ctx) {
  Term m2 = wifn::apply(sigma.param_part(), pattern);
  if (alpha->is_atom()) {
    Term d = derive(m2);
    if (visible_atoms(d).count(alpha->atom)) return F(variant, alpha, d, ctx);
  }
  if (auto z = traced_var(alpha, m2, sigma))
    return F(variant, mk_var(z->name, z->salt), derive_keep(m2, *z), ctx);
  throw analysis_error("element " + print(alpha) + " not traceable in source " + print(pattern));
}

// ---------------------------------------------------------------------------
// Static bounds and the per-step check
// ---------------------------------------------------------------------------

// Lower bound on a send: split at top-level pairs; components not mentioning
// alpha contribute top; otherwise meet of the derivative valuation over
// every source of the component.
inline CasedLevel lower_bound(SelectionVariant variant, const Term& alpha, const Term& r_plus,
                              const MessageSpace& space, const Context& ctx) {
  CasedLevel acc = CasedLevel::single(SecurityLevel::top());
  for (const auto& comp : components(r_plus)) {
    bool mentions = alpha->is_atom() ? atoms(comp).count(alpha->atom) > 0
                                     : vars(comp).count(alpha->var) > 0;
    if (!mentions) continue;
    for (const auto& hit : unifiable_patterns(space.patterns, comp, alpha))
      acc = meet_cases(acc, F_derivative(variant, alpha, hit.pattern, hit.sigma, ctx));
  }
  return acc;
}

// Upper bound from the received side: meet over every prior received message
// of F on its derivative (alpha kept when it is a variable).
inline CasedLevel upper_bound(SelectionVariant variant, const Term& alpha,
                              const std::vector<Term>& r_minus, const Context& ctx) {
  CasedLevel acc = CasedLevel::single(SecurityLevel::top());
  for (const auto& m : r_minus) {
    Term d = alpha->is_var() ? derive_keep(m, alpha->var) : derive(m);
    acc = meet_cases(acc, F(variant, alpha, d, ctx));
  }
  return acc;
}

namespace detail {

// The elements analyzed at a send: atoms of the payload in body position
// (principal identities and pure key material excluded) plus every variable
// of the payload or of the messages received before it.
inline std::vector<Term> analyzed_elements(const Term& r_plus, const std::vector<Term>& r_minus) {
  std::set<Atom> body;
  collect_leaves(r_plus, false, false, /*include_hash_covered=*/true, /*include_key_pos=*/false,
                 &body, nullptr);
  std::vector<std::pair<std::string, Term>> keyed;
  for (const auto& a : body) {
    if (a.kind == AtomKind::Ident) continue;
    keyed.emplace_back(a.str(), mk_atom(a));
  }
  std::set<VarKey> vs = vars(r_plus);
  for (const auto& m : r_minus)
    for (const auto& v : vars(m)) vs.insert(v);
  for (const auto& v : vs) keyed.emplace_back(v.name, mk_var(v.name, v.salt));
  std::sort(keyed.begin(), keyed.end(),
            [](const auto& x, const auto& y) { return x.first < y.first; });
  std::vector<Term> out;
  for (auto& [_, t] : keyed) out.push_back(t);
  return out;
}

}  // namespace detail

// Verdicts for one role at its final send. A row passes iff
// lower ⊒ ⌜alpha⌝ ⊓ upper holds for every case pairing; a variable's
// unknown type contributes top on the right.
inline std::vector<AnalysisRow> check_step(SelectionVariant variant, const GeneralizedRole& role,
                                           const MessageSpace& space, const Context& ctx) {
  std::vector<AnalysisRow> rows;
  const RoleStep* send = role.final_send();
  if (!send) return rows;

  std::vector<Term> r_minus;
  for (const auto& s : role.steps)
    if (!s.send) r_minus.push_back(s.payload);

  for (const auto& alpha : detail::analyzed_elements(send->payload, r_minus)) {
    CasedLevel lo = lower_bound(variant, alpha, send->payload, space, ctx);
    CasedLevel up = upper_bound(variant, alpha, r_minus, ctx);
    SecurityLevel tl = alpha->is_var() ? SecurityLevel::top() : ctx.type_of(alpha->atom);

    AnalysisRow row;
    row.role = role.label();
    row.session = role.session;
    row.step = int(role.steps.size());
    row.atom = print(alpha);
    row.is_var = alpha->is_var();
    if (!alpha->is_var()) row.type = tl;
    for (const auto& m : r_minus) row.r_minus.push_back(print(m));
    row.r_plus = print(send->payload);
    row.lower = lo.collapsed();
    row.upper = up.collapsed();

    bool all_pass = true;
    std::vector<CasePairing> pairings;
    for (const auto& lc : lo.cases) {
      for (const auto& uc : up.cases) {
        CasePairing p;
        p.key = detail::join_label(lc.key, uc.key);
        p.lower = lc.value;
        p.upper = uc.value;
        p.pass = geq(lc.value, meet(tl, uc.value));
        all_pass = all_pass && p.pass;
        pairings.push_back(std::move(p));
      }
    }
    row.pass = all_pass;
    if (pairings.size() > 1) row.cases = std::move(pairings);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace wifn
