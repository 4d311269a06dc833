#pragma once

// Analysis results and their text/JSON renderings.
//
// The verdicts report a sufficient condition: a failing row means the
// security level of that element may drop at that step, not that an attack
// exists.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wifn/lattice.hpp"
#include "wifn/term.hpp"

namespace wifn {

enum class SelectionVariant { Max, Ek, N };

inline std::string variant_name(SelectionVariant v) {
  switch (v) {
    case SelectionVariant::Max: return "max";
    case SelectionVariant::Ek: return "ek";
    case SelectionVariant::N: return "n";
  }
  return "max";
}

struct CasePairing {
  std::string key;  // protective-key case label
  SecurityLevel lower, upper;
  bool pass = false;
};

struct AnalysisRow {
  std::string role;     // "A.1"
  std::string session;  // "i"
  int step = 0;         // position of the analyzed send within the role
  std::string atom;     // display form; variables keep the '?' prefix
  bool is_var = false;
  std::optional<SecurityLevel> type;  // absent for variables
  std::vector<std::string> r_minus;
  std::string r_plus;
  SecurityLevel lower, upper;  // collapsed over cases
  bool pass = false;
  std::vector<CasePairing> cases;  // present only when >1 pairing
};

struct Report {
  std::string protocol;
  TheoryTag theory = TheoryTag::Empty;
  SelectionVariant variant = SelectionVariant::Max;
  bool increasing = false;
  std::vector<AnalysisRow> rows;
  std::vector<std::string> notes;
};

inline int exit_code(const Report& r) { return r.increasing ? 0 : 1; }

// --------------------------------------------------------------------------
// Text rendering
// --------------------------------------------------------------------------

inline std::string render_text(const Report& r, bool color = false) {
  auto paint = [&](const std::string& s, const char* code) {
    return color ? std::string("\033[") + code + "m" + s + "\033[0m" : s;
  };
  std::ostringstream os;
  os << "protocol: " << r.protocol << "   theory: " << theory_name(r.theory)
     << "   variant: " << variant_name(r.variant) << "\n\n";

  if (r.rows.empty()) {
    os << "#  atom  role  R-  r+  verdict\nno analyzable atoms\n";
  } else {
    std::vector<std::vector<std::string>> cells;
    cells.push_back({"#", "atom", "role", "R-", "r+", "verdict"});
    int i = 0;
    for (const auto& row : r.rows) {
      std::string rm;
      if (row.r_minus.empty())
        rm = "(none)";
      else
        for (size_t k = 0; k < row.r_minus.size(); ++k)
          rm += (k ? "; " : "") + row.r_minus[k];
      cells.push_back({std::to_string(++i), row.atom, row.role, rm, row.r_plus,
                       row.pass ? "pass" : "FAIL"});
    }
    std::vector<size_t> width(6, 0);
    for (const auto& line : cells)
      for (size_t c = 0; c < 6; ++c) width[c] = std::max(width[c], line[c].size());
    for (size_t li = 0; li < cells.size(); ++li) {
      std::ostringstream ls;
      for (size_t c = 0; c < 6; ++c) {
        std::string cell = cells[li][c];
        if (c + 1 < 6) cell += std::string(width[c] - cell.size() + 2, ' ');
        ls << cell;
      }
      std::string line = ls.str();
      if (li > 0) {
        bool pass = r.rows[li - 1].pass;
        std::string glyph = pass ? paint("✓", "32") : paint("✗", "31");
        line += " " + glyph;
      }
      os << line << "\n";
    }
    os << "\n";
    for (size_t ri = 0; ri < r.rows.size(); ++ri) {
      const auto& row = r.rows[ri];
      os << "  [" << ri + 1 << "] " << row.atom << " @ " << row.role << ": lower "
         << row.lower.str() << ", type "
         << (row.type ? row.type->str() : std::string("unknown")) << ", upper "
         << row.upper.str() << (row.pass ? "  (holds)" : "  (drops)") << "\n";
      for (const auto& cp : row.cases)
        os << "        case " << (cp.key.empty() ? "-" : cp.key) << ": lower "
           << cp.lower.str() << " vs " << cp.upper.str() << " -> "
           << (cp.pass ? "pass" : "FAIL") << "\n";
    }
  }

  os << "\noverall: ";
  if (r.increasing)
    os << paint("INCREASING", "32")
       << " — every analyzed element keeps or raises its security level.\n";
  else
    os << paint("NOT INCREASING", "31")
       << " — some element's level can drop. The check is a sufficient condition:"
          " a failing step means the protocol may involve a flaw, not that an"
          " attack was found.\n";
  for (const auto& n : r.notes) os << "note: " << n << "\n";
  return os.str();
}

// --------------------------------------------------------------------------
// JSON rendering
// --------------------------------------------------------------------------

inline nlohmann::json level_json(const SecurityLevel& l) {
  if (l.is_all()) return "ALL";
  nlohmann::json a = nlohmann::json::array();
  for (const auto& id : l.ids()) a.push_back(id);
  return a;
}

inline SecurityLevel level_from_json(const nlohmann::json& j) {
  if (j.is_string() && j.get<std::string>() == "ALL") return SecurityLevel::all();
  std::set<std::string> ids;
  for (const auto& e : j) ids.insert(e.get<std::string>());
  return SecurityLevel::of(std::move(ids));
}

inline std::string render_json(const Report& r) {
  nlohmann::json j;
  j["protocol"] = r.protocol;
  j["theory"] = theory_name(r.theory);
  j["variant"] = variant_name(r.variant);
  j["overall"] = r.increasing ? "increasing" : "not-increasing";
  j["rows"] = nlohmann::json::array();
  for (const auto& row : r.rows) {
    nlohmann::json rj;
    rj["role"] = row.role;
    rj["session"] = row.session;
    rj["step"] = row.step;
    rj["atom"] = row.atom;
    rj["kind"] = row.is_var ? "variable" : "atom";
    rj["type"] = row.type ? level_json(*row.type) : nlohmann::json(nullptr);
    rj["lower"] = level_json(row.lower);
    rj["upper"] = level_json(row.upper);
    rj["verdict"] = row.pass ? "pass" : "fail";
    if (!row.cases.empty()) {
      rj["cases"] = nlohmann::json::array();
      for (const auto& cp : row.cases) {
        nlohmann::json cj;
        cj["key"] = cp.key;
        cj["lower"] = level_json(cp.lower);
        cj["upper"] = level_json(cp.upper);
        cj["verdict"] = cp.pass ? "pass" : "fail";
        rj["cases"].push_back(cj);
      }
    }
    j["rows"].push_back(rj);
  }
  return j.dump(2) + "\n";
}

// Inverse of render_json on the JSON-visible fields (display columns of the
// text table are not serialized).
inline Report parse_report_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  Report r;
  r.protocol = j.at("protocol").get<std::string>();
  r.theory = j.at("theory").get<std::string>() == "homomorphic" ? TheoryTag::Homomorphic
                                                                : TheoryTag::Empty;
  std::string v = j.at("variant").get<std::string>();
  r.variant = v == "ek" ? SelectionVariant::Ek : v == "n" ? SelectionVariant::N : SelectionVariant::Max;
  r.increasing = j.at("overall").get<std::string>() == "increasing";
  for (const auto& rj : j.at("rows")) {
    AnalysisRow row;
    row.role = rj.at("role").get<std::string>();
    row.session = rj.at("session").get<std::string>();
    row.step = rj.at("step").get<int>();
    row.atom = rj.at("atom").get<std::string>();
    row.is_var = rj.at("kind").get<std::string>() == "variable";
    if (!rj.at("type").is_null()) row.type = level_from_json(rj.at("type"));
    row.lower = level_from_json(rj.at("lower"));
    row.upper = level_from_json(rj.at("upper"));
    row.pass = rj.at("verdict").get<std::string>() == "pass";
    if (rj.contains("cases")) {
      for (const auto& cj : rj.at("cases")) {
        CasePairing cp;
        cp.key = cj.at("key").get<std::string>();
        cp.lower = level_from_json(cj.at("lower"));
        cp.upper = level_from_json(cj.at("upper"));
        cp.pass = cj.at("verdict").get<std::string>() == "pass";
        row.cases.push_back(cp);
      }
    }
    r.rows.push_back(std::move(row));
  }
  return r;
}

}  // namespace wifn
