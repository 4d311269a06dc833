#pragma once

// Protocol narrations, role-based projection, and the pattern message space.
//
// A narration is the global protocol script. Generalization projects it onto
// each agent: within a received payload, every maximal subterm the agent can
// neither recognize from its own knowledge nor check by decryption becomes a
// fresh variable, and that variable is reused wherever the agent later
// forwards the unknown content. The agent's own fresh atoms carry the
// session index. One role is produced per prefix of the agent's step
// sequence ending in a send; if the sequence ends with receives, the full
// sequence is kept as a final role as well — it has nothing to analyze but
// its received patterns belong to the message space.

#include <cctype>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "wifn/context.hpp"
#include "wifn/errors.hpp"
#include "wifn/rewrite.hpp"
#include "wifn/term.hpp"

namespace wifn {

// ---------------------------------------------------------------------------
// Term text form
//
//   term := enc ('.' term)?
//   enc  := '{' term '}' key | 'h(' term ')' | 'eps' | '?'ident | atom('@'sess)?
//
// Pairing is right-associative. Keys must be declared key atoms.
// ---------------------------------------------------------------------------

// Resolves bare names to structured atoms using the context plus the
// narration's fresh declarations.
struct AtomTable {
  const Context* ctx = nullptr;
  std::map<std::string, std::string> fresh_owner;  // fresh atom -> creating principal
  std::string session_tag = "i";

  bool is_fresh(const std::string& n) const { return fresh_owner.count(n) > 0; }

  Atom resolve(const std::string& name, const std::optional<std::string>& sess, int line) const {
    if (ctx->is_principal(name)) {
      if (sess) throw parse_error("principal '" + name + "' cannot carry a session index", line);
      return Atom::ident(name);
    }
    auto kit = ctx->keys.find(name);
    if (kit != ctx->keys.end()) {
      const KeyDecl& kd = kit->second;
      if (kd.kind == KeyDecl::Pub) {
        if (sess) throw parse_error("public key '" + name + "' cannot carry a session index", line);
        return Atom::pub_key(name, IdRef{kd.owners[0], 0});
      }
      SessRef s = is_fresh(name) ? SessRef::cst(sess.value_or(session_tag))
                                 : (sess ? SessRef::cst(*sess) : SessRef::none());
      return Atom::sh_key(name, IdRef{kd.owners[0], 0}, IdRef{kd.owners[1], 0}, s);
    }
    if (is_fresh(name))
      return Atom::nonce(name, IdRef{fresh_owner.at(name), 0}, SessRef::cst(sess.value_or(session_tag)));
    if (ctx->consts.count(name)) {
      if (sess) throw parse_error("constant '" + name + "' cannot carry a session index", line);
      return Atom::plain(name);
    }
    throw parse_error("undeclared atom '" + name + "'", line);
  }
};

namespace detail {

class TermParser {
public:
  TermParser(std::string src, const AtomTable& table, bool allow_vars, int line)
      : src_(std::move(src)), table_(table), allow_vars_(allow_vars), line_(line) {}

  Term parse() {
    Term t = parse_term();
    skip_ws();
    if (pos_ != src_.size())
      throw parse_error("trailing input after term: '" + src_.substr(pos_) + "'", line_,
                        int(pos_) + 1);
    return t;
  }

private:
  std::string src_;
  const AtomTable& table_;
  bool allow_vars_;
  int line_;
  size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t')) ++pos_;
  }
  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }
  void expect(char c) {
    if (peek() != c)
      throw parse_error(std::string("expected '") + c + "'", line_, int(pos_) + 1);
    ++pos_;
  }
  static bool ident_start(char c) { return std::isalpha((unsigned char)c) || c == '_'; }
  static bool ident_char(char c) { return std::isalnum((unsigned char)c) || c == '_'; }

  std::string identifier() {
    skip_ws();
    if (pos_ >= src_.size() || !ident_start(src_[pos_]))
      throw parse_error("expected identifier", line_, int(pos_) + 1);
    size_t b = pos_;
    while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
    return src_.substr(b, pos_ - b);
  }

  Term parse_term() {
    Term left = parse_enc();
    if (peek() == '.') {
      ++pos_;
      return mk_pair(std::move(left), parse_term());
    }
    return left;
  }

  Term key_atom() {
    skip_ws();
    int col = int(pos_) + 1;
    std::string name = identifier();
    std::optional<std::string> sess;
    if (peek() == '@') {
      ++pos_;
      sess = identifier();
    }
    Atom a = table_.resolve(name, sess, line_);
    if (!a.is_key() && a.kind != AtomKind::Plain)
      throw parse_error("'" + name + "' is not a declared key", line_, col);
    return mk_atom(a);
  }

  Term parse_enc() {
    char c = peek();
    if (c == '{') {
      ++pos_;
      Term body = parse_term();
      expect('}');
      return mk_enc(std::move(body), key_atom());
    }
    if (c == '?') {
      ++pos_;
      if (!allow_vars_) throw parse_error("variables are not allowed here", line_, int(pos_));
      return mk_var(identifier());
    }
    if (c == '\0') throw parse_error("unexpected end of term", line_, int(pos_) + 1);
    int col = int(pos_) + 1;
    std::string name = identifier();
    if (name == "eps") return eps();
    if (name == "h" && peek() == '(') {
      ++pos_;
      Term body = parse_term();
      expect(')');
      return mk_hash(std::move(body));
    }
    std::optional<std::string> sess;
    if (peek() == '@') {
      ++pos_;
      sess = identifier();
    }
    (void)col;
    return mk_atom(table_.resolve(name, sess, line_));
  }
};

}  // namespace detail

inline Term parse_term(const std::string& text, const AtomTable& table, bool allow_vars = false,
                       int line = 0) {
  return detail::TermParser(text, table, allow_vars, line).parse();
}

// ---------------------------------------------------------------------------
// Narrations
// ---------------------------------------------------------------------------

struct NarrStep {
  int index = 0;
  std::string sender, receiver;
  Term payload;
};

struct Narration {
  std::string name;
  std::vector<std::string> principals;                      // declaration order
  std::vector<std::pair<std::string, std::string>> fresh;   // (principal, atom)
  std::vector<NarrStep> steps;
  std::string context_name;  // informational

  AtomTable atom_table(const Context& ctx) const {
    AtomTable t;
    t.ctx = &ctx;
    for (const auto& [p, a] : fresh) t.fresh_owner[a] = p;
    return t;
  }
};

inline Narration parse_narration(const std::string& text, const Context& ctx) {
  Narration n;
  std::vector<std::pair<int, std::string>> step_lines;  // parse after headers
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

    if (kw == "protocol") {
      n.name = rest;
    } else if (kw == "principals") {
      for (const auto& p : detail::split_list(rest)) {
        if (!ctx.is_principal(p))
          throw parse_error("principal '" + p + "' not declared in context", lineno);
        n.principals.push_back(p);
      }
    } else if (kw == "fresh") {
      auto colon = rest.find(':');
      if (colon == std::string::npos) throw parse_error("expected 'fresh <P>: <atoms>'", lineno);
      std::string p = detail::trim(rest.substr(0, colon));
      if (!ctx.is_principal(p))
        throw parse_error("fresh declaration for undeclared principal '" + p + "'", lineno);
      for (const auto& a : detail::split_list(rest.substr(colon + 1))) n.fresh.emplace_back(p, a);
    } else if (kw == "intruder") {
      if (rest != ctx.intruder)
        throw parse_error("narration names intruder '" + rest + "' but the context declares '" +
                          ctx.intruder + "'", lineno);
    } else if (kw == "uses-context") {
      n.context_name = rest;
    } else if (kw == "step") {
      step_lines.emplace_back(lineno, rest);
    } else {
      throw parse_error("unknown narration line '" + kw + "'", lineno);
    }
  }
  if (n.name.empty()) throw parse_error("missing protocol name");
  if (n.principals.empty()) throw parse_error("missing principals line");

  AtomTable table = n.atom_table(ctx);
  for (const auto& [ln, rest] : step_lines) {
    // "N: P -> Q : term"
    auto colon1 = rest.find(':');
    if (colon1 == std::string::npos) throw parse_error("expected 'step N: P -> Q : term'", ln);
    int idx = 0;
    try {
      idx = std::stoi(detail::trim(rest.substr(0, colon1)));
    } catch (...) {
      throw parse_error("bad step number '" + detail::trim(rest.substr(0, colon1)) + "'", ln);
    }
    std::string tail = rest.substr(colon1 + 1);
    auto arrow = tail.find("->");
    if (arrow == std::string::npos) throw parse_error("expected 'P -> Q' in step", ln);
    std::string sender = detail::trim(tail.substr(0, arrow));
    std::string rest2 = tail.substr(arrow + 2);
    auto colon2 = rest2.find(':');
    if (colon2 == std::string::npos) throw parse_error("expected ': term' in step", ln);
    std::string receiver = detail::trim(rest2.substr(0, colon2));
    std::string term_text = rest2.substr(colon2 + 1);

    auto declared = [&](const std::string& p) {
      for (const auto& q : n.principals)
        if (q == p) return true;
      return false;
    };
    if (!declared(sender)) throw parse_error("undeclared sender '" + sender + "'", ln);
    if (!declared(receiver)) throw parse_error("undeclared receiver '" + receiver + "'", ln);

    NarrStep step;
    step.index = idx;
    step.sender = sender;
    step.receiver = receiver;
    step.payload = parse_term(term_text, table, /*allow_vars=*/false, ln);
    n.steps.push_back(std::move(step));
  }
  if (n.steps.empty()) throw parse_error("narration has no steps");
  for (size_t i = 0; i < n.steps.size(); ++i)
    if (n.steps[i].index != int(i) + 1)
      throw parse_error("step numbering must be contiguous from 1 (found " +
                        std::to_string(n.steps[i].index) + " at position " +
                        std::to_string(i + 1) + ")");
  return n;
}

// ---------------------------------------------------------------------------
// Generalized roles
// ---------------------------------------------------------------------------

struct RoleStep {
  bool send = false;
  Term payload;
};

struct GeneralizedRole {
  std::string agent;
  int index = 0;        // per-agent counter
  std::string session;  // session salt carried by the agent's fresh atoms
  std::vector<RoleStep> steps;

  std::string label() const { return agent + "." + std::to_string(index); }

  // The step this role is analyzed at; roles kept only for their received
  // patterns end in a receive and have none.
  const RoleStep* final_send() const {
    if (!steps.empty() && steps.back().send) return &steps.back();
    return nullptr;
  }
};

namespace detail {

// Per-agent projection state.
struct AgentView {
  const Context* ctx;
  const Narration* narr;
  std::string agent;
  std::vector<std::pair<Term, Term>> env;  // narration subterm -> variable
  std::function<std::string()> fresh_var;

  bool created_by_agent(const Atom& a) const {
    for (const auto& [p, name] : narr->fresh)
      if (name == a.tag) return p == agent;
    return false;
  }

  bool is_fresh_atom(const Atom& a) const {
    for (const auto& [p, name] : narr->fresh)
      if (name == a.tag) return true;
    return false;
  }

  // Initial knowledge plus own fresh data: identities and public keys are
  // public, long-term shared keys are known to their owners, fresh atoms to
  // their creator only.
  bool knows(const Atom& a) const {
    switch (a.kind) {
      case AtomKind::Ident:
      case AtomKind::Plain:
      case AtomKind::PubKey:
        return true;
      case AtomKind::Nonce:
        return created_by_agent(a);
      case AtomKind::ShKey:
        if (is_fresh_atom(a)) return created_by_agent(a);
        for (const auto& o : a.owners)
          if (o.name == agent) return true;
        return false;
    }
    return false;
  }

  const Term* lookup(const Term& t) const {
    for (const auto& [k, v] : env)
      if (equal(k, t)) return &v;
    return nullptr;
  }

  Term bind_fresh_var(const Term& t) {
    Term v = mk_var(fresh_var());
    env.emplace_back(t, v);
    return v;
  }

  bool readable(const Atom& key) const {
    SecurityLevel inv = ctx->inverse_type(key);
    return inv.is_all() || inv.ids().count(agent) > 0;
  }

  // Can the agent reconstruct this term from what it knows and what it has
  // already received? Used for hash verification and send translation.
  bool reconstructible(const Term& t) const {
    if (!t || t->is_eps()) return true;
    if (lookup(t)) return true;
    switch (t->tag) {
      case TermNode::Tag::Atom:
        return knows(t->atom);
      case TermNode::Tag::Pair:
      case TermNode::Tag::Enc:
        return reconstructible(t->a) && reconstructible(t->b);
      case TermNode::Tag::Hash:
        return reconstructible(t->a);
      default:
        return false;
    }
  }

  // Variable introduction must follow reading order, so pair fields are
  // translated with explicit sequencing.
  Term translate_send(const Term& t, int step_index) {
    if (!t || t->is_eps()) return t;
    if (const Term* v = lookup(t)) return *v;
    switch (t->tag) {
      case TermNode::Tag::Atom:
        if (knows(t->atom)) return t;
        throw parse_error("agent " + agent + " sends atom '" + t->atom.str() +
                              "' it can neither know nor have received (step " +
                              std::to_string(step_index) + ")");
      case TermNode::Tag::Pair: {
        Term l = translate_send(t->a, step_index);
        Term r = translate_send(t->b, step_index);
        return mk_pair(std::move(l), std::move(r));
      }
      case TermNode::Tag::Enc:
        return mk_enc(translate_send(t->a, step_index), t->b);
      case TermNode::Tag::Hash:
        return mk_hash(translate_send(t->a, step_index));
      default:
        return t;
    }
  }

  Term translate_recv(const Term& t) {
    if (!t || t->is_eps()) return t;
    if (const Term* v = lookup(t)) return *v;
    switch (t->tag) {
      case TermNode::Tag::Atom:
        return knows(t->atom) ? t : bind_fresh_var(t);
      case TermNode::Tag::Pair: {
        // clear pairing is transparent: fields are checked independently
        Term l = translate_recv(t->a);
        Term r = translate_recv(t->b);
        return mk_pair(std::move(l), std::move(r));
      }
      case TermNode::Tag::Enc:
        if (t->b->is_atom() && readable(t->b->atom))
          return mk_enc(translate_recv(t->a), t->b);
        return bind_fresh_var(t);
      case TermNode::Tag::Hash:
        // a digest is checkable only when the agent can recompute it
        if (reconstructible(t->a)) return mk_hash(translate_send(t->a, 0));
        return bind_fresh_var(t);
      default:
        return t;
    }
  }
};

}  // namespace detail

inline std::vector<GeneralizedRole> generalize(const Narration& narr, const Context& ctx,
                                               const std::string& session = "i") {
  static const char* kVarPool[] = {"X", "Y", "Z", "U", "V", "W"};
  int var_counter = 0;
  auto next_var = [&]() -> std::string {
    std::string name = var_counter < 6 ? kVarPool[var_counter]
                                       : "V" + std::to_string(var_counter - 4);
    ++var_counter;
    return name;
  };

  std::vector<GeneralizedRole> roles;
  for (const auto& agent : narr.principals) {
    detail::AgentView view;
    view.ctx = &ctx;
    view.narr = &narr;
    view.agent = agent;
    view.fresh_var = next_var;

    std::vector<RoleStep> seq;
    for (const auto& step : narr.steps) {
      if (step.sender == agent)
        seq.push_back(RoleStep{true, view.translate_send(step.payload, step.index)});
      else if (step.receiver == agent)
        seq.push_back(RoleStep{false, view.translate_recv(step.payload)});
    }
    if (seq.empty()) continue;

    int idx = 0;
    for (size_t i = 0; i < seq.size(); ++i) {
      if (!seq[i].send) continue;
      GeneralizedRole r;
      r.agent = agent;
      r.index = ++idx;
      r.session = session;
      r.steps.assign(seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(i) + 1);
      roles.push_back(std::move(r));
    }
    // an agent that sent something and then keeps receiving contributes the
    // trailing receives to the space through one final role
    if (!seq.back().send && idx > 0) {
      GeneralizedRole r;
      r.agent = agent;
      r.index = ++idx;
      r.session = session;
      r.steps = seq;
      roles.push_back(std::move(r));
    }
  }
  return roles;
}

// ---------------------------------------------------------------------------
// Explicit role files
//
//   role <Agent> <k> session <salt>
//   recv: term
//   send: term
//
// Variables are written ?X; an agent's fresh atoms carry @salt.
// ---------------------------------------------------------------------------

inline std::vector<GeneralizedRole> parse_roles(const std::string& text, const Context& ctx,
                                                const Narration& narr) {
  std::vector<GeneralizedRole> roles;
  AtomTable table = narr.atom_table(ctx);

  std::istringstream is(text);
  std::string raw;
  int lineno = 0;
  GeneralizedRole* cur = nullptr;
  while (std::getline(is, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
    line = detail::trim(line);
    if (line.empty()) continue;

    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "role") {
      GeneralizedRole r;
      std::string sess_kw;
      ls >> r.agent >> r.index >> sess_kw >> r.session;
      if (r.agent.empty() || r.index <= 0 || sess_kw != "session" || r.session.empty())
        throw parse_error("expected 'role <Agent> <k> session <salt>'", lineno);
      if (!ctx.is_principal(r.agent))
        throw parse_error("role agent '" + r.agent + "' is not a declared principal", lineno);
      roles.push_back(std::move(r));
      cur = &roles.back();
      table.session_tag = cur->session;
    } else if (kw == "recv:" || kw == "send:") {
      if (!cur) throw parse_error("step line outside a role", lineno);
      std::string term_text = detail::trim(line.substr(kw.size()));
      RoleStep s;
      s.send = (kw == "send:");
      s.payload = parse_term(term_text, table, /*allow_vars=*/true, lineno);
      cur->steps.push_back(std::move(s));
    } else {
      throw parse_error("unknown role-file line '" + kw + "'", lineno);
    }
  }
  if (roles.empty()) throw parse_error("role file declares no roles");
  for (const auto& r : roles) {
    if (r.steps.empty()) throw parse_error("role " + r.label() + " has no steps");
    bool has_send = false;
    std::set<VarKey> seen;
    for (const auto& s : r.steps) {
      if (s.send) {
        has_send = true;
        for (const auto& v : vars(s.payload))
          if (!seen.count(v))
            throw parse_error("role " + r.label() + " sends variable ?" + v.name +
                              " never received");
      } else {
        for (const auto& v : vars(s.payload)) seen.insert(v);
      }
    }
    if (!has_send) throw parse_error("role " + r.label() + " has no send step");
  }
  return roles;
}

// ---------------------------------------------------------------------------
// Message space
// ---------------------------------------------------------------------------

struct MessageSpace {
  std::vector<Term> patterns;  // parameterized apart, salts 1..n
};

// Collects every payload of every role, splits top-level pairs, drops bare
// principal identities (they are public and analyzed nowhere), removes
// alpha-duplicates keeping the first occurrence, and parameterizes each kept
// entry with its position as rename salt.
inline MessageSpace message_space(const std::vector<GeneralizedRole>& roles) {
  std::vector<Term> kept;
  for (const auto& role : roles) {
    for (const auto& step : role.steps) {
      for (const auto& c : components(step.payload)) {
        if (c->is_eps()) continue;
        if (c->is_atom() && c->atom.kind == AtomKind::Ident) continue;
        bool dup = false;
        for (const auto& k : kept)
          if (alpha_equivalent(k, c)) {
            dup = true;
            break;
          }
        if (!dup) kept.push_back(c);
      }
    }
  }
  MessageSpace sp;
  int salt = 0;
  for (const auto& c : kept) sp.patterns.push_back(parameterize(c, ++salt));
  return sp;
}

}  // namespace wifn
