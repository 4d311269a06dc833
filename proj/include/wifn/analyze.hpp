#pragma once

// Orchestration: load a context and a narration (plus optional explicit
// roles), project roles, build the pattern space, and check every role's
// final send.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "wifn/context.hpp"
#include "wifn/report.hpp"
#include "wifn/roles.hpp"
#include "wifn/witness.hpp"

namespace wifn {

inline Report analyze(const Context& ctx, const Narration& narr,
                      const std::vector<GeneralizedRole>& roles,
                      SelectionVariant variant = SelectionVariant::Max) {
  MessageSpace space = message_space(roles);

  Report report;
  report.protocol = narr.name;
  report.theory = ctx.theory;
  report.variant = variant;
  for (const auto& role : roles)
    for (auto& row : check_step(variant, role, space, ctx)) report.rows.push_back(std::move(row));
  report.increasing = true;
  for (const auto& row : report.rows) report.increasing = report.increasing && row.pass;

  std::function<bool(const Term&)> has_hash = [&](const Term& t) {
    if (!t || t->is_eps()) return false;
    if (t->is_hash()) return true;
    if (t->is_pair() || t->is_enc()) return has_hash(t->a) || has_hash(t->b);
    return false;
  };
  bool any_hash = false;
  for (const auto& role : roles)
    for (const auto& step : role.steps) any_hash = any_hash || has_hash(step.payload);
  if (any_hash)
    report.notes.push_back(
        "hash digests are treated as opaque: h(...) contents are neither "
        "extractable nor co-travelling");
  return report;
}

inline Report analyze(const std::string& context_text, const std::string& narration_text,
                      const std::optional<std::string>& roles_text,
                      SelectionVariant variant = SelectionVariant::Max,
                      std::optional<TheoryTag> theory_override = std::nullopt) {
  Context ctx = load_context(context_text);
  if (theory_override) ctx.theory = *theory_override;
  Narration narr = parse_narration(narration_text, ctx);
  std::vector<GeneralizedRole> roles =
      roles_text ? parse_roles(*roles_text, ctx, narr) : generalize(narr, ctx);
  return analyze(ctx, narr, roles, variant);
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw parse_error("cannot open file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// File-level entry point; diagnostics name the offending file.
inline Report analyze_files(const std::string& context_path, const std::string& protocol_path,
                            const std::optional<std::string>& roles_path,
                            SelectionVariant variant = SelectionVariant::Max,
                            std::optional<TheoryTag> theory_override = std::nullopt) {
  Context ctx;
  try {
    ctx = load_context(read_file(context_path));
    if (theory_override) ctx.theory = *theory_override;
  } catch (const parse_error& e) {
    throw parse_error(context_path + ": " + e.what());
  }
  Narration narr;
  try {
    narr = parse_narration(read_file(protocol_path), ctx);
  } catch (const parse_error& e) {
    throw parse_error(protocol_path + ": " + e.what());
  }
  std::vector<GeneralizedRole> roles;
  if (roles_path) {
    try {
      roles = parse_roles(read_file(*roles_path), ctx, narr);
    } catch (const parse_error& e) {
      throw parse_error(*roles_path + ": " + e.what());
    }
  } else {
    roles = generalize(narr, ctx);
  }
  return analyze(ctx, narr, roles, variant);
}

}  // namespace wifn
