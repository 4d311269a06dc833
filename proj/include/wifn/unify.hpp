#pragma once

// Sorted first-order syntactic unification.
//
// Constants are rigid. Atom parameters unify atom-against-atom with
// consistent identity and session slots: binding the nonce of agent A#2 to
// B's nonce forces A#2 to be B everywhere, including inside key atoms that
// share the slot. Variables bind to arbitrary terms under an occurs check.
// Unification is never performed modulo the equational theory: patterns are
// matched in their written form, normalization happens only inside the
// valuation.

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "wifn/rewrite.hpp"
#include "wifn/subst.hpp"
#include "wifn/term.hpp"

namespace wifn {

namespace detail {

struct UnifyState {
  std::map<std::pair<std::string, int>, IdRef> id_b;
  std::map<std::pair<std::string, int>, SessRef> sess_b;
  std::map<VarKey, Term> var_b;
  std::vector<std::pair<Atom, Atom>> atom_pairs;  // directly unified atoms

  IdRef rid(IdRef r) const {
    while (r.salt != 0) {
      auto it = id_b.find({r.name, r.salt});
      if (it == id_b.end()) break;
      r = it->second;
    }
    return r;
  }
  SessRef rsess(SessRef s) const {
    while (s.kind == SessRef::Param) {
      auto it = sess_b.find({s.tag, s.salt});
      if (it == sess_b.end()) break;
      s = it->second;
    }
    return s;
  }
  Term walk(Term t) const {
    while (t && t->is_var()) {
      auto it = var_b.find(t->var);
      if (it == var_b.end()) break;
      t = it->second;
    }
    return t;
  }

  bool unify_id(IdRef a, IdRef b) {
    a = rid(a);
    b = rid(b);
    if (a == b) return true;
    if (a.salt == 0 && b.salt == 0) return false;  // distinct concrete principals
    if (a.salt != 0)
      id_b[{a.name, a.salt}] = b;
    else
      id_b[{b.name, b.salt}] = a;
    return true;
  }

  bool unify_sess(SessRef a, SessRef b) {
    a = rsess(a);
    b = rsess(b);
    if (a == b) return true;
    if (a.kind == SessRef::Param) {
      sess_b[{a.tag, a.salt}] = b;
      return true;
    }
    if (b.kind == SessRef::Param) {
      sess_b[{b.tag, b.salt}] = a;
      return true;
    }
    return false;  // None vs Const, or two distinct session constants
  }

  bool unify_atom(const Atom& x, const Atom& y) {
    if (unify_atom_inner(x, y)) {
      atom_pairs.emplace_back(x, y);
      return true;
    }
    return false;
  }

  bool unify_atom_inner(const Atom& x, const Atom& y) {
    if (x.kind != y.kind) return false;
    switch (x.kind) {
      case AtomKind::Ident:
        return unify_id(x.owners[0], y.owners[0]);
      case AtomKind::Plain:
        return x.tag == y.tag;
      case AtomKind::Nonce:
        // nonce names are rigid: distinct protocol fields never collide
        if (x.tag != y.tag) return false;
        return unify_id(x.owners[0], y.owners[0]) && unify_sess(x.sess, y.sess);
      case AtomKind::PubKey:
        return unify_id(x.owners[0], y.owners[0]);
      case AtomKind::ShKey:
        return unify_id(x.owners[0], y.owners[0]) && unify_id(x.owners[1], y.owners[1]) &&
               unify_sess(x.sess, y.sess);
    }
    return false;
  }

  bool occurs(const VarKey& v, Term t) const {
    t = walk(t);
    if (!t) return false;
    switch (t->tag) {
      case TermNode::Tag::Var:
        return t->var == v;
      case TermNode::Tag::Pair:
      case TermNode::Tag::Enc:
        return occurs(v, t->a) || occurs(v, t->b);
      case TermNode::Tag::Hash:
        return occurs(v, t->a);
      default:
        return false;
    }
  }

  bool unify(Term x, Term y) {
    x = walk(x);
    y = walk(y);
    if (x->is_var() && y->is_var() && x->var == y->var) return true;
    if (x->is_var()) {
      if (occurs(x->var, y)) return false;
      var_b[x->var] = y;
      return true;
    }
    if (y->is_var()) {
      if (occurs(y->var, x)) return false;
      var_b[y->var] = x;
      return true;
    }
    if (x->tag != y->tag) return false;
    switch (x->tag) {
      case TermNode::Tag::Atom:
        return unify_atom(x->atom, y->atom);
      case TermNode::Tag::Eps:
        return true;
      case TermNode::Tag::Hash:
        return unify(x->a, y->a);
      case TermNode::Tag::Pair:
      case TermNode::Tag::Enc:
        return unify(x->a, y->a) && unify(x->b, y->b);
      default:
        return false;
    }
  }

  Atom resolve_atom(const Atom& a) const {
    Atom r = a;
    for (auto& o : r.owners) o = rid(o);
    r.sess = rsess(r.sess);
    return r;
  }

  Term resolve_term(Term t) const {
    t = walk(t);
    if (!t || t->is_eps()) return t;
    switch (t->tag) {
      case TermNode::Tag::Atom:
        return mk_atom(resolve_atom(t->atom));
      case TermNode::Tag::Var:
        return t;  // unbound
      case TermNode::Tag::Pair:
        return mk_pair(resolve_term(t->a), resolve_term(t->b));
      case TermNode::Tag::Enc:
        return mk_enc(resolve_term(t->a), resolve_term(t->b));
      case TermNode::Tag::Hash:
        return mk_hash(resolve_term(t->a));
      default:
        return t;
    }
  }
};

}  // namespace detail

// Most general unifier of two terms, or nullopt. The result is in solved
// form: variable bindings are fully expanded and every atom whose slots were
// constrained gets an atom-to-atom entry, so a single application
// instantiates the whole pattern.
inline std::optional<Substitution> mgu(const Term& pattern, const Term& target) {
  detail::UnifyState st;
  if (!st.unify(pattern, target)) return std::nullopt;

  auto fully_concrete = [](const Atom& a) {
    for (const auto& o : a.owners)
      if (o.salt != 0) return false;
    return a.sess.kind != SessRef::Param;
  };

  Substitution s;
  for (const auto& [v, t] : st.var_b) s.bind(mk_var(v.name, v.salt), st.resolve_term(t));
  // Atoms that met face to face take the concrete side's identity, so a key
  // parameter instantiates to the key actually used by the other term
  // rather than to a re-owned copy of itself.
  for (const auto& [x, y] : st.atom_pairs) {
    Atom rx = st.resolve_atom(x), ry = st.resolve_atom(y);
    if (rx != x && !s.find_atom(x)) s.bind(mk_atom(x), mk_atom(fully_concrete(ry) ? ry : rx));
    if (ry != y && !s.find_atom(y)) s.bind(mk_atom(y), mk_atom(fully_concrete(rx) ? rx : ry));
  }
  auto add_atoms = [&](const Term& t) {
    for (const auto& a : atoms(t)) {
      Atom r = st.resolve_atom(a);
      if (r != a && !s.find_atom(a)) s.bind(mk_atom(a), mk_atom(r));
    }
  };
  add_atoms(pattern);
  add_atoms(target);
  return s;
}

// True when the analyzed element (an atom or variable leaf) survives into
// the unified source: either it sits in the static part of the
// param-instantiated pattern, or it arrives through the image of one of the
// pattern's variables. Occurrences buried in hashes do not count — a digest
// cannot yield its preimage.
inline bool leaf_visible_in(const Term& alpha, const Term& t) {
  if (alpha->is_atom()) return visible_atoms(t).count(alpha->atom) > 0;
  return visible_vars(t).count(alpha->var) > 0;
}

inline std::optional<VarKey> traced_var(const Term& alpha, const Term& instantiated_pattern,
                                        const Substitution& sigma) {
  for (const auto& z : vars(instantiated_pattern)) {
    Term img = wifn::apply(sigma, mk_var(z.name, z.salt));
    if (leaf_visible_in(alpha, img)) return z;
  }
  return std::nullopt;
}

inline bool traceable(const Term& alpha, const Term& pattern, const Substitution& sigma) {
  Term m2 = wifn::apply(sigma.param_part(), pattern);
  if (alpha->is_atom() && visible_atoms(derive(m2)).count(alpha->atom)) return true;
  return traced_var(alpha, m2, sigma).has_value();
}

struct PatternHit {
  Term pattern;  // as stored in the space (already parameterized apart)
  Substitution sigma;
};

// The sources of a component for a given analyzed element: every pattern of
// the space unifiable with the component through which alpha remains
// traceable. Bare-variable patterns are never sources — a lone variable has
// no static neighborhood to contribute.
inline std::vector<PatternHit> unifiable_patterns(const std::vector<Term>& space,
                                                  const Term& target, const Term& alpha) {
  std::vector<PatternHit> hits;
  for (const auto& p : space) {
    if (p->is_var()) continue;
    auto s = mgu(p, target);
    if (!s) continue;
    if (!traceable(alpha, p, *s)) continue;
    hits.push_back(PatternHit{p, std::move(*s)});
  }
  return hits;
}

}  // namespace wifn
