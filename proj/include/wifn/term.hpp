#pragma once

// Message algebra: atoms, variables, pairing, encryption, hashing, and the
// empty message. Terms are immutable values shared by pointer; every
// operation is pure.
//
// Atoms are structured. A session atom carries the identity that owns it and
// a session index as first-class slots: a slot with salt 0 is concrete, a
// slot with salt > 0 is a renameable parameter. Renaming a role payload into
// a space pattern turns every concrete slot into a parameter with the
// entry's salt, which is what lets unification bind "the nonce of agent
// A#2" to "B's nonce" consistently with "the key of agent A#2".

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace wifn {

enum class TheoryTag { Empty, Homomorphic };

inline std::string theory_name(TheoryTag t) {
  return t == TheoryTag::Homomorphic ? "homomorphic" : "empty";
}

// Identity slot: a principal name, concrete (salt 0) or parameterized.
struct IdRef {
  std::string name;
  int salt = 0;

  bool concrete() const { return salt == 0; }
  friend bool operator==(const IdRef& a, const IdRef& b) {
    return a.name == b.name && a.salt == b.salt;
  }
  friend bool operator<(const IdRef& a, const IdRef& b) {
    return std::tie(a.name, a.salt) < std::tie(b.name, b.salt);
  }
};

// Session slot: absent for long-term atoms, otherwise a tag that is concrete
// or parameterized like an identity slot.
struct SessRef {
  enum Kind { None, Const, Param } kind = None;
  std::string tag;
  int salt = 0;

  static SessRef none() { return SessRef{}; }
  static SessRef cst(std::string t) { return SessRef{Const, std::move(t), 0}; }
  static SessRef prm(std::string t, int s) { return SessRef{Param, std::move(t), s}; }

  friend bool operator==(const SessRef& a, const SessRef& b) {
    return a.kind == b.kind && a.tag == b.tag && a.salt == b.salt;
  }
  friend bool operator<(const SessRef& a, const SessRef& b) {
    return std::tie(a.kind, a.tag, a.salt) < std::tie(b.kind, b.tag, b.salt);
  }
};

enum class AtomKind { Ident, Nonce, PubKey, ShKey, Plain };

struct Atom {
  AtomKind kind = AtomKind::Plain;
  std::string tag;             // display/base name: "A", "Na", "ka", "kas", ...
  std::vector<IdRef> owners;   // Ident/Nonce/PubKey: 1; ShKey: 2; Plain: 0
  SessRef sess;                // Nonce and session keys

  static Atom ident(const std::string& name, int salt = 0) {
    Atom a;
    a.kind = AtomKind::Ident;
    a.tag = name;
    a.owners = {IdRef{name, salt}};
    return a;
  }
  static Atom nonce(const std::string& tag, IdRef owner, SessRef s) {
    Atom a;
    a.kind = AtomKind::Nonce;
    a.tag = tag;
    a.owners = {std::move(owner)};
    a.sess = std::move(s);
    return a;
  }
  static Atom pub_key(const std::string& tag, IdRef owner) {
    Atom a;
    a.kind = AtomKind::PubKey;
    a.tag = tag;
    a.owners = {std::move(owner)};
    return a;
  }
  static Atom sh_key(const std::string& tag, IdRef o1, IdRef o2, SessRef s) {
    Atom a;
    a.kind = AtomKind::ShKey;
    a.tag = tag;
    a.owners = {std::move(o1), std::move(o2)};
    a.sess = std::move(s);
    return a;
  }
  static Atom plain(const std::string& name) {
    Atom a;
    a.kind = AtomKind::Plain;
    a.tag = name;
    return a;
  }

  bool is_key() const { return kind == AtomKind::PubKey || kind == AtomKind::ShKey; }

  // Rename salt shown after '#'; 0 when every slot is concrete.
  int display_salt() const {
    for (const auto& o : owners)
      if (o.salt != 0) return o.salt;
    if (sess.kind == SessRef::Param) return sess.salt;
    return 0;
  }

  std::string str() const {
    // an identity is displayed by its owner slot; keys and nonces by their
    // declared name
    std::string s = kind == AtomKind::Ident ? owners[0].name : tag;
    int ds = display_salt();
    if (ds != 0)
      s += "#" + std::to_string(ds);
    else if (sess.kind == SessRef::Const)
      s += "@" + sess.tag;
    return s;
  }

  // Identity is semantic: an Ident is its owner slot, a key is its owner
  // set; the display tag only distinguishes nonces and plain constants
  // (there is one key of a given shape per owner set).
  std::string cmp_tag() const {
    return (kind == AtomKind::Nonce || kind == AtomKind::Plain) ? tag : std::string();
  }

  friend bool operator==(const Atom& a, const Atom& b) {
    return a.kind == b.kind && a.cmp_tag() == b.cmp_tag() && a.owners == b.owners &&
           a.sess == b.sess;
  }
  friend bool operator!=(const Atom& a, const Atom& b) { return !(a == b); }
  friend bool operator<(const Atom& a, const Atom& b) {
    auto ta = a.cmp_tag(), tb = b.cmp_tag();
    return std::tie(a.kind, ta, a.owners, a.sess) < std::tie(b.kind, tb, b.owners, b.sess);
  }
};

struct VarKey {
  std::string name;
  int salt = 0;

  friend bool operator==(const VarKey& a, const VarKey& b) {
    return a.name == b.name && a.salt == b.salt;
  }
  friend bool operator<(const VarKey& a, const VarKey& b) {
    return std::tie(a.name, a.salt) < std::tie(b.name, b.salt);
  }
  std::string str() const {
    return "?" + name + (salt ? "#" + std::to_string(salt) : "");
  }
};

class TermNode;
using Term = std::shared_ptr<const TermNode>;

class TermNode {
public:
  enum class Tag { Atom, Var, Pair, Enc, Hash, Eps };

  Tag tag;
  Atom atom;       // Tag::Atom
  VarKey var;      // Tag::Var
  Term a, b;       // Pair: (a,b); Enc: a=body, b=key; Hash: a=body

  bool is_atom() const { return tag == Tag::Atom; }
  bool is_var() const { return tag == Tag::Var; }
  bool is_pair() const { return tag == Tag::Pair; }
  bool is_enc() const { return tag == Tag::Enc; }
  bool is_hash() const { return tag == Tag::Hash; }
  bool is_eps() const { return tag == Tag::Eps; }
};

inline Term mk_atom(Atom a) {
  auto n = std::make_shared<TermNode>();
  n->tag = TermNode::Tag::Atom;
  n->atom = std::move(a);
  return n;
}

inline Term mk_var(std::string name, int salt = 0) {
  auto n = std::make_shared<TermNode>();
  n->tag = TermNode::Tag::Var;
  n->var = VarKey{std::move(name), salt};
  return n;
}

inline Term mk_pair(Term l, Term r) {
  auto n = std::make_shared<TermNode>();
  n->tag = TermNode::Tag::Pair;
  n->a = std::move(l);
  n->b = std::move(r);
  return n;
}

// Keys are atomic: an encryption key is an atom or a variable, never a
// compound term.
inline Term mk_enc(Term body, Term key) {
  if (!key || (!key->is_atom() && !key->is_var()))
    throw std::invalid_argument("encryption key must be atomic");
  auto n = std::make_shared<TermNode>();
  n->tag = TermNode::Tag::Enc;
  n->a = std::move(body);
  n->b = std::move(key);
  return n;
}

inline Term mk_hash(Term body) {
  auto n = std::make_shared<TermNode>();
  n->tag = TermNode::Tag::Hash;
  n->a = std::move(body);
  return n;
}

inline Term eps() {
  static const Term e = [] {
    auto n = std::make_shared<TermNode>();
    n->tag = TermNode::Tag::Eps;
    return Term(n);
  }();
  return e;
}

inline bool equal(const Term& x, const Term& y) {
  if (x.get() == y.get()) return true;
  if (!x || !y) return false;
  if (x->tag != y->tag) return false;
  switch (x->tag) {
    case TermNode::Tag::Atom: return x->atom == y->atom;
    case TermNode::Tag::Var: return x->var == y->var;
    case TermNode::Tag::Eps: return true;
    case TermNode::Tag::Hash: return equal(x->a, y->a);
    case TermNode::Tag::Pair:
    case TermNode::Tag::Enc: return equal(x->a, y->a) && equal(x->b, y->b);
  }
  return false;
}

// Canonical text form: pairing "." right-associative, encryption "{t}key",
// hash "h(t)", variables "?X", empty message "eps".
inline std::string print(const Term& t) {
  if (!t) return "<null>";
  switch (t->tag) {
    case TermNode::Tag::Eps: return "eps";
    case TermNode::Tag::Atom: return t->atom.str();
    case TermNode::Tag::Var: return t->var.str();
    case TermNode::Tag::Hash: return "h(" + print(t->a) + ")";
    case TermNode::Tag::Enc: return "{" + print(t->a) + "}" + print(t->b);
    case TermNode::Tag::Pair: {
      std::string l = t->a->is_pair() ? "(" + print(t->a) + ")" : print(t->a);
      return l + "." + print(t->b);
    }
  }
  return "";
}

namespace detail {

inline void collect_leaves(const Term& t, bool under_hash, bool in_key_pos,
                           bool include_hash_covered, bool include_key_pos,
                           std::set<Atom>* atoms, std::set<VarKey>* vars) {
  if (!t || t->is_eps()) return;
  switch (t->tag) {
    case TermNode::Tag::Atom:
      if (atoms && (include_hash_covered || !under_hash) &&
          (include_key_pos || !in_key_pos))
        atoms->insert(t->atom);
      return;
    case TermNode::Tag::Var:
      if (vars && (include_hash_covered || !under_hash)) vars->insert(t->var);
      return;
    case TermNode::Tag::Pair:
      collect_leaves(t->a, under_hash, false, include_hash_covered, include_key_pos, atoms, vars);
      collect_leaves(t->b, under_hash, false, include_hash_covered, include_key_pos, atoms, vars);
      return;
    case TermNode::Tag::Enc:
      collect_leaves(t->a, under_hash, false, include_hash_covered, include_key_pos, atoms, vars);
      collect_leaves(t->b, under_hash, true, include_hash_covered, include_key_pos, atoms, vars);
      return;
    case TermNode::Tag::Hash:
      collect_leaves(t->a, true, false, include_hash_covered, include_key_pos, atoms, vars);
      return;
    case TermNode::Tag::Eps:
      return;
  }
}

}  // namespace detail

// All atoms of m, including keys.
inline std::set<Atom> atoms(const Term& t) {
  std::set<Atom> out;
  detail::collect_leaves(t, false, false, true, true, &out, nullptr);
  return out;
}

inline std::set<VarKey> vars(const Term& t) {
  std::set<VarKey> out;
  detail::collect_leaves(t, false, false, true, true, nullptr, &out);
  return out;
}

// Atoms whose occurrence is not buried inside a hash (a digest reveals
// nothing about its preimage).
inline std::set<Atom> visible_atoms(const Term& t) {
  std::set<Atom> out;
  detail::collect_leaves(t, false, false, false, true, &out, nullptr);
  return out;
}

inline std::set<VarKey> visible_vars(const Term& t) {
  std::set<VarKey> out;
  detail::collect_leaves(t, false, false, false, true, nullptr, &out);
  return out;
}

inline bool contains_atom(const Term& t, const Atom& a) { return atoms(t).count(a) > 0; }
inline bool contains_var(const Term& t, const VarKey& v) { return vars(t).count(v) > 0; }

// Splits top-level pairing into components (right-associated or not).
inline void split_pairs(const Term& t, std::vector<Term>& out) {
  if (!t) return;
  if (t->is_pair()) {
    split_pairs(t->a, out);
    split_pairs(t->b, out);
  } else {
    out.push_back(t);
  }
}

inline std::vector<Term> components(const Term& t) {
  std::vector<Term> out;
  split_pairs(t, out);
  return out;
}

namespace detail {

inline IdRef rename_id(const IdRef& r, int salt) { return IdRef{r.name, salt}; }

inline SessRef rename_sess(const SessRef& s, int salt) {
  if (s.kind == SessRef::None) return s;
  return SessRef::prm(s.tag, salt);
}

inline Atom rename_atom(const Atom& a, int salt, bool parameterize) {
  Atom r = a;
  if (a.kind == AtomKind::Plain) return r;
  for (auto& o : r.owners)
    if (parameterize || o.salt != 0) o = rename_id(o, salt);
  if (r.sess.kind != SessRef::None && (parameterize || r.sess.kind == SessRef::Param))
    r.sess = rename_sess(r.sess, salt);
  return r;
}

inline Term rename(const Term& t, int salt, bool parameterize) {
  if (!t || t->is_eps()) return t;
  switch (t->tag) {
    case TermNode::Tag::Atom:
      return mk_atom(rename_atom(t->atom, salt, parameterize));
    case TermNode::Tag::Var:
      return mk_var(t->var.name, salt);
    case TermNode::Tag::Pair:
      return mk_pair(rename(t->a, salt, parameterize), rename(t->b, salt, parameterize));
    case TermNode::Tag::Enc:
      return mk_enc(rename(t->a, salt, parameterize), rename(t->b, salt, parameterize));
    case TermNode::Tag::Hash:
      return mk_hash(rename(t->a, salt, parameterize));
    case TermNode::Tag::Eps:
      return t;
  }
  return t;
}

}  // namespace detail

// Renames parameters and variables injectively with the given salt; concrete
// atoms and protocol constants are untouched.
inline Term alpha_rename(const Term& t, int salt) {
  return detail::rename(t, salt, false);
}

// Turns a role payload into a space pattern: every concrete identity and
// session slot becomes a parameter carrying the given salt; variables are
// re-salted; protocol constants stay rigid.
inline Term parameterize(const Term& t, int salt) {
  return detail::rename(t, salt, true);
}

namespace detail {

// Canonical renumbering used for alpha-equivalence: parameter slots keep
// their principal name but get canonical salts; variables lose their names
// entirely.
struct Canon {
  std::map<std::pair<std::string, int>, int> id_slots;
  std::map<std::pair<std::string, int>, int> sess_slots;
  std::map<VarKey, int> var_slots;
  int next_id = 1, next_sess = 1, next_var = 1;

  IdRef canon(const IdRef& r) {
    if (r.salt == 0) return r;
    auto key = std::make_pair(r.name, r.salt);
    auto it = id_slots.find(key);
    if (it == id_slots.end()) it = id_slots.emplace(key, next_id++).first;
    return IdRef{r.name, it->second};
  }
  SessRef canon(const SessRef& s) {
    if (s.kind != SessRef::Param) return s;
    auto key = std::make_pair(s.tag, s.salt);
    auto it = sess_slots.find(key);
    if (it == sess_slots.end()) it = sess_slots.emplace(key, next_sess++).first;
    return SessRef::prm(s.tag, it->second);
  }
  VarKey canon(const VarKey& v) {
    auto it = var_slots.find(v);
    if (it == var_slots.end()) it = var_slots.emplace(v, next_var++).first;
    return VarKey{"v", it->second};
  }

  Term run(const Term& t) {
    if (!t || t->is_eps()) return t;
    switch (t->tag) {
      case TermNode::Tag::Atom: {
        Atom a = t->atom;
        for (auto& o : a.owners) o = canon(o);
        a.sess = canon(a.sess);
        return mk_atom(a);
      }
      case TermNode::Tag::Var:
        return mk_var("v", canon(t->var).salt);
      case TermNode::Tag::Pair:
        return mk_pair(run(t->a), run(t->b));
      case TermNode::Tag::Enc:
        return mk_enc(run(t->a), run(t->b));
      case TermNode::Tag::Hash:
        return mk_hash(run(t->a));
      case TermNode::Tag::Eps:
        return t;
    }
    return t;
  }
};

}  // namespace detail

inline Term canonical_form(const Term& t) {
  detail::Canon c;
  return c.run(t);
}

// Equality up to renaming of parameters and variables.
inline bool alpha_equivalent(const Term& x, const Term& y) {
  return equal(canonical_form(x), canonical_form(y));
}

}  // namespace wifn
