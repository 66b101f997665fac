#include <doctest.h>

#include "support/properties.hpp"

using namespace pga::testing;

namespace {

int total_cases = 0;

void report(const std::vector<PropertyResult>& results) {
  for (const PropertyResult& r : results) {
    INFO(r.name << ": " << r.first_failure);
    CHECK(r.failures == 0);
    total_cases += r.cases;
  }
}

}  // namespace

TEST_CASE("graph-core properties") { report(graph_core_properties()); }
TEST_CASE("selection properties") { report(selection_properties()); }
TEST_CASE("attack properties") { report(attack_properties()); }
TEST_CASE("evaluation properties") { report(evaluation_properties()); }

TEST_CASE("property case count") {
  // Registered last in the file; doctest runs cases in file order.
  CHECK(total_cases >= 1000);
}
