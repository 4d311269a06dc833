#pragma once

// Substitutions bind variables to arbitrary terms and atom parameters to
// atoms. Entries are kept in solved form: values never mention a bound key,
// so application is a single pass and applying twice equals applying once.

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wifn/term.hpp"

namespace wifn {

class Substitution {
public:
  struct Entry {
    Term key;    // Var or Atom node
    Term value;  // atoms may only be bound to atoms
  };

  Substitution() = default;

  void bind(Term key, Term value) {
    if (!key || (!key->is_var() && !key->is_atom()))
      throw std::invalid_argument("substitution key must be a variable or an atom");
    if (key->is_atom() && !value->is_atom())
      throw std::invalid_argument("atom parameter bound to a non-atomic term: " +
                                  print(key) + " -> " + print(value));
    if (equal(key, value)) return;  // identity bindings are dropped
    entries_.push_back(Entry{std::move(key), std::move(value)});
  }

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

  const Term* find_var(const VarKey& v) const {
    for (const auto& e : entries_)
      if (e.key->is_var() && e.key->var == v) return &e.value;
    return nullptr;
  }
  const Term* find_atom(const Atom& a) const {
    for (const auto& e : entries_)
      if (e.key->is_atom() && e.key->atom == a) return &e.value;
    return nullptr;
  }

  // The atom-parameter part: applying it to a pattern sets the static
  // neighborhood of a unified source (variable bindings stay pending).
  Substitution param_part() const {
    Substitution s;
    for (const auto& e : entries_)
      if (e.key->is_atom()) s.entries_.push_back(e);
    return s;
  }

  std::string str() const {
    std::string out = "{";
    bool first = true;
    for (const auto& e : entries_) {
      if (!first) out += ", ";
      out += print(e.key) + " -> " + print(e.value);
      first = false;
    }
    return out + "}";
  }

private:
  std::vector<Entry> entries_;
};

inline Term apply(const Substitution& s, const Term& t) {
  if (!t || t->is_eps()) return t;
  switch (t->tag) {
    case TermNode::Tag::Var:
      if (const Term* v = s.find_var(t->var)) return *v;
      return t;
    case TermNode::Tag::Atom:
      if (const Term* v = s.find_atom(t->atom)) return *v;
      return t;
    case TermNode::Tag::Pair:
      return mk_pair(wifn::apply(s, t->a), wifn::apply(s, t->b));
    case TermNode::Tag::Enc:
      return mk_enc(wifn::apply(s, t->a), wifn::apply(s, t->b));
    case TermNode::Tag::Hash:
      return mk_hash(wifn::apply(s, t->a));
    case TermNode::Tag::Eps:
      return t;
  }
  return t;
}

// wifn::apply(compose(s1, s2), m) == wifn::apply(s2, wifn::apply(s1, m)).
inline Substitution compose(const Substitution& s1, const Substitution& s2) {
  Substitution out;
  for (const auto& e : s1.entries()) out.bind(e.key, wifn::apply(s2, e.value));
  for (const auto& e : s2.entries()) {
    bool shadowed = e.key->is_var() ? s1.find_var(e.key->var) != nullptr
                                    : s1.find_atom(e.key->atom) != nullptr;
    if (!shadowed) out.bind(e.key, e.value);
  }
  return out;
}

}  // namespace wifn
