#pragma once

// Verification context: principals, intruder, atom typing, key inverses,
// key structure, and the equational theory. Loaded from a line-oriented
// declarative file and immutable afterwards.
//
//   principals A, B, S, I
//   intruder I
//   theory homomorphic | empty
//   const c1, c2
//   key ka = pub A
//   key kas = shared A S
//   inv ka = ka_inv
//   type Na = {A,B}
//   type A = ALL
//
// '#' starts a comment. Principals without a type declaration default to
// ALL (identities are public). Every key reachable through `inv` must have a
// typed inverse, since protective-key checks consult it.

#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wifn/errors.hpp"
#include "wifn/lattice.hpp"
#include "wifn/term.hpp"

namespace wifn {

struct KeyDecl {
  enum Kind { Pub, Shared } kind = Pub;
  std::vector<std::string> owners;  // Pub: 1, Shared: 2
};

class Context {
public:
  std::set<std::string> principals;
  std::string intruder;
  TheoryTag theory = TheoryTag::Empty;
  std::set<std::string> consts;
  std::map<std::string, SecurityLevel> typing;
  std::map<std::string, std::string> inverses;  // involution, stored both ways
  std::map<std::string, KeyDecl> keys;

  bool is_principal(const std::string& n) const { return principals.count(n) > 0; }

  bool has_type(const std::string& n) const { return typing.count(n) > 0; }

  // ⌜.⌝ by base name. Principals default to ALL; anything else must be
  // declared.
  SecurityLevel type_of(const std::string& name) const {
    auto it = typing.find(name);
    if (it != typing.end()) return it->second;
    if (is_principal(name)) return SecurityLevel::all();
    throw analysis_error("no security type declared for atom '" + name + "'");
  }

  // Types are attached to base names; renamed copies and session instances
  // inherit them. Identity parameters are principals, hence public.
  SecurityLevel type_of(const Atom& a) const {
    if (a.kind == AtomKind::Ident) {
      auto it = typing.find(a.tag);
      return it != typing.end() ? it->second : SecurityLevel::all();
    }
    return type_of(a.tag);
  }

  std::string inverse(const std::string& key_name) const {
    auto it = inverses.find(key_name);
    if (it == inverses.end())
      throw analysis_error("no inverse declared for key '" + key_name + "'");
    return it->second;
  }

  // ⌜k⁻¹⌝, the level consulted by protective-key checks.
  SecurityLevel inverse_type(const Atom& key) const {
    return type_of(inverse(key.tag));
  }

  bool is_key_name(const std::string& n) const { return keys.count(n) > 0; }

  std::string str() const {
    std::ostringstream os;
    os << "principals ";
    bool first = true;
    for (const auto& p : principals) {
      if (!first) os << ", ";
      os << p;
      first = false;
    }
    os << "\nintruder " << intruder << "\ntheory " << theory_name(theory) << "\n";
    if (!consts.empty()) {
      os << "const ";
      first = true;
      for (const auto& c : consts) {
        if (!first) os << ", ";
        os << c;
        first = false;
      }
      os << "\n";
    }
    for (const auto& [name, kd] : keys) {
      os << "key " << name << " = ";
      if (kd.kind == KeyDecl::Pub)
        os << "pub " << kd.owners[0];
      else
        os << "shared " << kd.owners[0] << " " << kd.owners[1];
      os << "\n";
    }
    std::set<std::string> printed;
    for (const auto& [k, v] : inverses) {
      if (printed.count(k) || printed.count(v)) continue;
      os << "inv " << k << " = " << v << "\n";
      printed.insert(k);
      printed.insert(v);
    }
    for (const auto& [n, lvl] : typing) os << "type " << n << " = " << lvl.str() << "\n";
    return os.str();
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) {
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

inline SecurityLevel parse_level(const std::string& text, int line) {
  std::string s = trim(text);
  if (s == "ALL") return SecurityLevel::all();
  if (s.size() < 2 || s.front() != '{' || s.back() != '}')
    throw parse_error("expected ALL or {id,...}, got '" + s + "'", line);
  std::set<std::string> ids;
  for (const auto& id : split_list(s.substr(1, s.size() - 2))) ids.insert(id);
  return SecurityLevel::of(std::move(ids));
}

}  // namespace detail

inline Context load_context(const std::string& text) {
  Context ctx;
  bool have_theory = false, have_principals = false;
  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
    line = detail::trim(line);
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    std::string rest = detail::trim(line.substr(kw.size()));

    if (kw == "principals") {
      for (const auto& p : detail::split_list(rest)) ctx.principals.insert(p);
      have_principals = true;
    } else if (kw == "intruder") {
      ctx.intruder = rest;
    } else if (kw == "theory") {
      if (rest == "homomorphic")
        ctx.theory = TheoryTag::Homomorphic;
      else if (rest == "empty")
        ctx.theory = TheoryTag::Empty;
      else
        throw parse_error("unknown theory '" + rest + "'", lineno);
      have_theory = true;
    } else if (kw == "const") {
      for (const auto& c : detail::split_list(rest)) ctx.consts.insert(c);
    } else if (kw == "key") {
      auto eq = rest.find('=');
      if (eq == std::string::npos) throw parse_error("expected 'key <name> = pub <P> | shared <P> <Q>'", lineno);
      std::string name = detail::trim(rest.substr(0, eq));
      std::istringstream ds(detail::trim(rest.substr(eq + 1)));
      std::string kind;
      ds >> kind;
      KeyDecl kd;
      if (kind == "pub") {
        kd.kind = KeyDecl::Pub;
        std::string o;
        ds >> o;
        if (o.empty()) throw parse_error("pub key needs an owner", lineno);
        kd.owners = {o};
      } else if (kind == "shared") {
        kd.kind = KeyDecl::Shared;
        std::string o1, o2;
        ds >> o1 >> o2;
        if (o1.empty() || o2.empty()) throw parse_error("shared key needs two owners", lineno);
        kd.owners = {o1, o2};
      } else {
        throw parse_error("key kind must be 'pub' or 'shared'", lineno);
      }
      if (ctx.keys.count(name)) throw parse_error("duplicate key declaration '" + name + "'", lineno);
      ctx.keys[name] = kd;
    } else if (kw == "inv") {
      auto eq = rest.find('=');
      if (eq == std::string::npos) throw parse_error("expected 'inv <key> = <key>'", lineno);
      std::string k = detail::trim(rest.substr(0, eq));
      std::string v = detail::trim(rest.substr(eq + 1));
      auto it = ctx.inverses.find(k);
      if (it != ctx.inverses.end() && it->second != v)
        throw parse_error("conflicting inverse for '" + k + "'", lineno);
      auto jt = ctx.inverses.find(v);
      if (jt != ctx.inverses.end() && jt->second != k)
        throw parse_error("non-involutive inverse declaration for '" + v + "'", lineno);
      ctx.inverses[k] = v;
      ctx.inverses[v] = k;
    } else if (kw == "type") {
      auto eq = rest.find('=');
      if (eq == std::string::npos) throw parse_error("expected 'type <atom> = <level>'", lineno);
      std::string n = detail::trim(rest.substr(0, eq));
      if (ctx.typing.count(n)) throw parse_error("duplicate type declaration for '" + n + "'", lineno);
      ctx.typing[n] = detail::parse_level(rest.substr(eq + 1), lineno);
    } else {
      throw parse_error("unknown declaration '" + kw + "'", lineno);
    }
  }

  if (!have_principals || ctx.principals.empty()) throw parse_error("missing principals declaration");
  if (ctx.intruder.empty()) throw parse_error("missing intruder declaration");
  if (!ctx.principals.count(ctx.intruder))
    throw parse_error("intruder '" + ctx.intruder + "' is not a declared principal");
  if (!have_theory) throw parse_error("missing theory declaration");
  for (const auto& [name, kd] : ctx.keys) {
    for (const auto& o : kd.owners)
      if (!ctx.is_principal(o))
        throw parse_error("key '" + name + "' owned by undeclared principal '" + o + "'");
    for (const auto& [other, okd] : ctx.keys)
      if (other != name && okd.kind == kd.kind && okd.owners == kd.owners)
        throw parse_error("keys '" + name + "' and '" + other +
                          "' declare the same shape for the same owners");
    if (!ctx.inverses.count(name))
      throw parse_error("key '" + name + "' has no inverse declaration");
    if (!ctx.typing.count(ctx.inverses.at(name)))
      throw parse_error("inverse of key '" + name + "' ('" + ctx.inverses.at(name) +
                        "') has no type declaration");
  }
  for (const auto& [k, v] : ctx.inverses) {
    if (ctx.inverses.at(v) != k) throw parse_error("inverse map is not an involution at '" + k + "'");
  }
  return ctx;
}

}  // namespace wifn
