#pragma once

// Equational normalization and the derivation operator.
//
// The homomorphic theory contributes one rule, {m.m'}_k -> {m}_k.{m'}_k,
// oriented so that the normal form carries the smallest selections (no
// foreign atom shares a ciphertext with a secret unless the protocol put it
// there). Epsilon elimination runs under every theory. Hash bodies are never
// split: the theory equation is about encryption only.
//
// Derivation erases variables: ∂m replaces every variable by eps, ∂[X̄]m
// keeps exactly X. Erasure is followed by eps elimination, so a ciphertext
// whose body vanished disappears entirely.

#include "wifn/term.hpp"

namespace wifn {

namespace detail {

inline Term normalize_rec(const Term& t, TheoryTag theory);

inline Term normalize_enc(Term body, Term key, TheoryTag theory) {
  if (body->is_eps()) return eps();
  if (theory == TheoryTag::Homomorphic && body->is_pair()) {
    Term l = normalize_enc(body->a, key, theory);
    Term r = normalize_enc(body->b, key, theory);
    if (l->is_eps()) return r;
    if (r->is_eps()) return l;
    return mk_pair(std::move(l), std::move(r));
  }
  return mk_enc(std::move(body), std::move(key));
}

inline Term normalize_rec(const Term& t, TheoryTag theory) {
  if (!t || t->is_eps() || t->is_atom() || t->is_var()) return t;
  switch (t->tag) {
    case TermNode::Tag::Pair: {
      Term l = normalize_rec(t->a, theory);
      Term r = normalize_rec(t->b, theory);
      if (l->is_eps()) return r;
      if (r->is_eps()) return l;
      return mk_pair(std::move(l), std::move(r));
    }
    case TermNode::Tag::Enc:
      return normalize_enc(normalize_rec(t->a, theory), t->b, theory);
    case TermNode::Tag::Hash: {
      Term b = normalize_rec(t->a, theory);
      if (b->is_eps()) return eps();
      return mk_hash(std::move(b));
    }
    default:
      return t;
  }
}

inline Term erase_vars(const Term& t, const VarKey* keep) {
  if (!t || t->is_eps() || t->is_atom()) return t;
  switch (t->tag) {
    case TermNode::Tag::Var:
      return (keep && t->var == *keep) ? t : eps();
    case TermNode::Tag::Pair:
      return mk_pair(erase_vars(t->a, keep), erase_vars(t->b, keep));
    case TermNode::Tag::Enc:
      return mk_enc(erase_vars(t->a, keep), t->b);
    case TermNode::Tag::Hash:
      return mk_hash(erase_vars(t->a, keep));
    default:
      return t;
  }
}

}  // namespace detail

// Fixpoint of the theory rules plus eps elimination. Innermost strategy;
// the system is confluent so only performance depends on the order.
inline Term normalize(const Term& t, TheoryTag theory) {
  return detail::normalize_rec(t, theory);
}

inline Term eps_normalize(const Term& t) { return normalize(t, TheoryTag::Empty); }

// ∂m: every variable replaced by eps, then eps-eliminated.
inline Term derive(const Term& t) {
  return eps_normalize(detail::erase_vars(t, nullptr));
}

// ∂[X̄]m: every variable except X replaced by eps.
inline Term derive_keep(const Term& t, const VarKey& keep) {
  return eps_normalize(detail::erase_vars(t, &keep));
}

}  // namespace wifn
