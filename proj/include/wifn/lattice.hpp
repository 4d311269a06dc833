#pragma once

// Security lattice (2^I, ⊆, ∩, ∪, I, ∅) with a symbolic ALL element.
//
// A level is the set of principals allowed to know a message. The principal
// universe is open-ended, so the bottom element ("everybody") is kept
// symbolic instead of being materialized as a finite set. Smaller sets are
// higher (more secret): top is the empty set, bottom is ALL.

#include <set>
#include <sstream>
#include <string>

namespace wifn {

class SecurityLevel {
public:
  SecurityLevel() = default;

  static SecurityLevel all() {
    SecurityLevel l;
    l.all_ = true;
    return l;
  }

  static SecurityLevel top() { return SecurityLevel(); }

  static SecurityLevel of(std::set<std::string> ids) {
    SecurityLevel l;
    l.ids_ = std::move(ids);
    return l;
  }

  bool is_all() const { return all_; }
  bool is_top() const { return !all_ && ids_.empty(); }
  const std::set<std::string>& ids() const { return ids_; }

  bool operator==(const SecurityLevel& o) const {
    return all_ == o.all_ && (all_ || ids_ == o.ids_);
  }
  bool operator!=(const SecurityLevel& o) const { return !(*this == o); }

  std::string str() const {
    if (all_) return "ALL";
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (const auto& id : ids_) {
      if (!first) os << ',';
      os << id;
      first = false;
    }
    os << '}';
    return os.str();
  }

private:
  bool all_ = false;
  std::set<std::string> ids_;
};

// ⊓: the lattice meet is set union (security can only drop when combining).
inline SecurityLevel meet(const SecurityLevel& a, const SecurityLevel& b) {
  if (a.is_all() || b.is_all()) return SecurityLevel::all();
  std::set<std::string> u = a.ids();
  u.insert(b.ids().begin(), b.ids().end());
  return SecurityLevel::of(std::move(u));
}

// ⊔: the lattice join is set intersection.
inline SecurityLevel join(const SecurityLevel& a, const SecurityLevel& b) {
  if (a.is_all()) return b;
  if (b.is_all()) return a;
  std::set<std::string> r;
  for (const auto& id : a.ids())
    if (b.ids().count(id)) r.insert(id);
  return SecurityLevel::of(std::move(r));
}

// a ⊒ b, i.e. a ⊆ b under the powerset instance. ALL on the right always
// holds; ALL on the left holds only against ALL.
inline bool geq(const SecurityLevel& a, const SecurityLevel& b) {
  if (b.is_all()) return true;
  if (a.is_all()) return false;
  for (const auto& id : a.ids())
    if (!b.ids().count(id)) return false;
  return true;
}

}  // namespace wifn
