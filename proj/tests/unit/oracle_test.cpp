#include "doctest.h"

#include "support/allen_cahn_fd.hpp"

#include <cmath>

TEST_CASE("Allen-Cahn FD reference") {
  SUBCASE("matches an independent sparse-solver run at every 512th node") {
    // scipy spsolve on the same stencil and linearization.
    const double want[] = {-0.5, -0.7620162188113089, -0.0017050583263325456, 0.11905976863373086,
                          0.0005421281320246795, 0.1190597686337309, -0.0017050583263325074,
                          -0.7620162188113071, -0.5};
    const auto s = oracle::allen_cahn_fd(4096, 1e-4, 1.0);
    for (int k = 0; k <= 8; ++k) CHECK(std::abs(s.u[static_cast<std::size_t>(512 * k)] - want[k]) <= 1e-10);
  }
  SUBCASE("Thomas solve") {
    std::vector<double> d{1, 2, 3};
    oracle::thomas({0, 1, 1}, {4, 4, 4}, {1, 1, 0}, d);
    // [[4,1,0],[1,4,1],[0,1,4]] x = [1,2,3]
    CHECK(4 * d[0] + d[1] == doctest::Approx(1.0));
    CHECK(d[0] + 4 * d[1] + d[2] == doctest::Approx(2.0));
    CHECK(d[1] + 4 * d[2] == doctest::Approx(3.0));
  }
  SUBCASE("interpolation is exact at nodes") {
    const auto s = oracle::allen_cahn_fd(64, 0.1, 0.2);
    CHECK(s.at(s.x[10]) == doctest::Approx(s.u[10]));
    CHECK(s.at(1.0) == doctest::Approx(-0.5));
  }
}
