#include <catch_amalgamated.hpp>

#include "properties.hpp"
#include "wifn/lattice.hpp"

using namespace wifn;

TEST_CASE("meet is set union with absorbing ALL") {
  CHECK(meet(SecurityLevel::of({"A"}), SecurityLevel::of({"B"})) == SecurityLevel::of({"A", "B"}));
  CHECK(meet(SecurityLevel::all(), SecurityLevel::of({"A"})).is_all());
  // {A,C,D} combined with the key level {A,B}
  CHECK(meet(SecurityLevel::of({"A", "C", "D"}), SecurityLevel::of({"A", "B"})) ==
        SecurityLevel::of({"A", "B", "C", "D"}));
}

TEST_CASE("join is intersection with ALL as identity") {
  CHECK(join(SecurityLevel::of({"A", "B"}), SecurityLevel::of({"B", "C"})) ==
        SecurityLevel::of({"B"}));
  CHECK(join(SecurityLevel::all(), SecurityLevel::of({"A"})) == SecurityLevel::of({"A"}));
  CHECK(join(SecurityLevel::top(), SecurityLevel::of({"A"})).is_top());
}

TEST_CASE("geq is subset inclusion") {
  CHECK(geq(SecurityLevel::of({"B"}), SecurityLevel::of({"A", "B"})));
  CHECK_FALSE(geq(SecurityLevel::of({"A", "B", "S"}), SecurityLevel::of({"A", "S"})));
  CHECK(geq(SecurityLevel::of({"A"}), SecurityLevel::all()));
  CHECK(geq(SecurityLevel::all(), SecurityLevel::all()));
  CHECK_FALSE(geq(SecurityLevel::all(), SecurityLevel::of({"A"})));
  CHECK(geq(SecurityLevel::top(), SecurityLevel::of({"A"})));
}

TEST_CASE("printing") {
  CHECK(SecurityLevel::all().str() == "ALL");
  CHECK(SecurityLevel::of({"B", "A"}).str() == "{A,B}");
  CHECK(SecurityLevel::top().str() == "{}");
}

TEST_CASE("lattice laws hold on random levels") {
  CHECK(wifn_test::prop_lattice_laws(1200, 42) == "");
}
