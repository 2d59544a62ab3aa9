#include "doctest.h"

#include "deepoly/geometry.hpp"

#include <random>

using namespace deepoly;

TEST_CASE("partition_domain splits uniformly") {
  const auto unit = Domain<>::box({{0.0, 1.0}});
  const auto p = partition_domain(unit, {4});
  REQUIRE(p.size() == 4);
  for (Index i = 0; i < 4; ++i) CHECK(p.segment(i).lengths()[0] == doctest::Approx(0.25));

  const auto square = Domain<>::box({{0.0, 1.0}, {0.0, 1.0}});
  CHECK(partition_domain(square, {10, 10}).size() == 100);

  const auto sym = partition_domain(Domain<>::box({{-1.0, 1.0}}), {3});
  CHECK(sym.segment(0).lo[0] == -1.0);
  CHECK(sym.segment(0).hi[0] == doctest::Approx(-1.0 / 3.0).epsilon(1e-15));
  CHECK(sym.segment(1).hi[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(sym.segment(2).hi[0] == 1.0);
}

TEST_CASE("partition ordering is lexicographic, first axis most significant") {
  const auto p = partition_domain(Domain<>::box({{0.0, 1.0}, {0.0, 2.0}}), {2, 3});
  CHECK(p.segment(0).index == Eigen::Vector2i(0, 0));
  CHECK(p.segment(1).index == Eigen::Vector2i(0, 1));
  CHECK(p.segment(3).index == Eigen::Vector2i(1, 0));
  CHECK(p.segment(5).lo[1] == doctest::Approx(4.0 / 3.0));
  CHECK(p.interior_faces().size() == 7);  // 1*3 along x, 2*2 along y
}

TEST_CASE("partition rejects bad counts and bounds") {
  const auto unit = Domain<>::box({{0.0, 1.0}});
  CHECK_THROWS_AS(partition_domain(unit, {0}), InvalidArgument);
  CHECK_THROWS_AS(partition_domain(unit, {-2}), InvalidArgument);
  CHECK_THROWS_AS(partition_domain(unit, {2, 2}), InvalidArgument);
  CHECK_THROWS_AS(Domain<>::box({{1.0, 1.0}}), InvalidArgument);
}

TEST_CASE("normalize_point endpoints and midpoint") {
  const auto p = partition_domain(Domain<>::box({{0.0, 1.0}, {-2.0, 2.0}}), {2, 2});
  const auto& seg = p.segment(3);
  CHECK(normalize_point(seg.lo, seg).isZero());
  CHECK(normalize_point(seg.hi, seg).isOnes());

  const auto q = partition_domain(Domain<>::box({{0.5, 0.75}}), {1});
  Eigen::VectorXd x(1);
  x << 0.625;
  CHECK(normalize_point(x, q.segment(0))[0] == 0.5);

  x << 0.8;
  CHECK_THROWS_AS(normalize_point(x, q.segment(0)), OutOfSegment);
}

TEST_CASE("locate_segment tie-breaks upward") {
  const auto p = partition_domain(Domain<>::box({{0.0, 1.0}}), {4});
  auto at = [&](double v) {
    Eigen::VectorXd x(1);
    x << v;
    return locate_segment(x, p);
  };
  CHECK(at(0.25) == 1);
  CHECK(at(1.0) == 3);
  CHECK(at(0.1) == 0);
  CHECK(at(0.0) == 0);
  CHECK(at(0.5) == 2);
  CHECK_THROWS_AS(at(1.01), OutOfDomain);
  CHECK_THROWS_AS(at(-0.5), OutOfDomain);
}

TEST_CASE("geometry properties on random samples") {
  std::mt19937_64 rng(7);
  const auto domain = Domain<>::box({{-1.0, 2.0}, {0.0, 0.3}, {5.0, 9.0}});
  const auto p = partition_domain(domain, {3, 5, 2});

  double vol = 0;
  for (const auto& s : p.segments()) vol += s.volume();
  CHECK(std::abs(vol - domain.volume()) <= 1e-12 * domain.volume());

  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    Eigen::VectorXd x(3);
    for (Index i = 0; i < 3; ++i) x[i] = domain.lo()[i] + u(rng) * (domain.hi()[i] - domain.lo()[i]);
    const auto& seg = p.segment(locate_segment(x, p));
    const Eigen::VectorXd local = normalize_point(x, seg);
    CHECK((local.array() >= 0.0).all());
    CHECK((local.array() <= 1.0).all());
    const Eigen::VectorXd back = denormalize_point(local, seg);
    for (Index i = 0; i < 3; ++i) CHECK(std::abs(back[i] - x[i]) <= 1e-14 * std::max(1.0, std::abs(x[i])));
  }
}
