#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "capdim/pointset.hpp"
#include "capdim/rng.hpp"
#include "oracles.hpp"

using namespace capdim;

TEST_CASE("middle-thirds endpoints match interval subdivision") {
  const auto e = generate_cantor(1.0 / 3.0, 12);
  REQUIRE(e.count() == 4096);
  const auto ref = oracle::cantor_left_endpoints(1.0 / 3.0, 12);
  REQUIRE(ref.size() == e.count());
  for (std::size_t i = 0; i < e.count(); ++i)
    REQUIRE(e.coords[i] == Catch::Approx(ref[i]).margin(1e-15));
}

TEST_CASE("middle-thirds separation and spread at depth 12") {
  const auto e = generate_cantor(1.0 / 3.0, 12);
  // Interval-enumeration reference: the tightest pair of stage-12 endpoints
  // sits two minimal lengths apart, and the set spans [0, 1 - 3^-12].
  const double unit = std::pow(3.0, -12.0);
  const auto ref = oracle::cantor_left_endpoints(1.0 / 3.0, 12);
  // The gap subtracts two nearly equal endpoint sums, each rounded in its
  // last bit, so only about nine relative digits survive.
  REQUIRE(oracle::min_adjacent_gap(ref) == Catch::Approx(2 * unit).epsilon(1e-9));
  REQUIRE(min_gap(e) == Catch::Approx(2 * unit).epsilon(1e-9));
  REQUIRE(diameter(e) == Catch::Approx(1.0 - unit).epsilon(1e-12));
}

TEST_CASE("generated endpoints come out sorted") {
  const auto e = generate_cantor(0.4, 9);
  REQUIRE(std::is_sorted(e.coords.begin(), e.coords.end()));
  REQUIRE(e.count() == 512);
}

TEST_CASE("two-map contraction spec reproduces the cantor generator") {
  IfsSpec spec;
  spec.dim = 1;
  spec.maps = {{1.0 / 3.0, {0.0}, {}}, {1.0 / 3.0, {2.0 / 3.0}, {}}};
  const auto a = generate_ifs(spec, 7);
  const auto b = generate_cantor(1.0 / 3.0, 7);
  REQUIRE(a.count() == b.count());
  auto sorted = a.coords;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i)
    REQUIRE(sorted[i] == Catch::Approx(b.coords[i]).margin(1e-14));
}

TEST_CASE("triangle contraction system stays inside the unit square") {
  IfsSpec spec;
  spec.dim = 2;
  spec.maps = {{0.5, {0.0, 0.0}, {}},
               {0.5, {0.5, 0.0}, {}},
               {0.5, {0.25, 0.5}, {}}};
  const auto e = generate_ifs(spec, 6);
  REQUIRE(e.count() == 729);
  for (double c : e.coords) {
    REQUIRE(c >= -1e-12);
    REQUIRE(c <= 1.0 + 1e-12);
  }
  // Corner fixed points are present.
  bool has_origin = false;
  for (std::size_t i = 0; i < e.count(); ++i) {
    const double* p = e.point(i);
    if (std::fabs(p[0]) < 1e-12 && std::fabs(p[1]) < 1e-12) has_origin = true;
  }
  REQUIRE(has_origin);
}

TEST_CASE("rotation blocks must be orthogonal") {
  IfsSpec spec;
  spec.dim = 2;
  spec.maps = {{0.5, {0.0, 0.0}, {1.0, 1.0, 0.0, 1.0}}};
  REQUIRE_THROWS_AS(generate_ifs(spec, 2), invalid_parameter);
}

TEST_CASE("plane product squares the line counts and diameter") {
  const auto line = generate_cantor(1.0 / 3.0, 5);
  const auto sq = product_set(line, line);
  REQUIRE(sq.dim == 2);
  REQUIRE(sq.count() == line.count() * line.count());
  const double d1 = diameter(line);
  REQUIRE(diameter(sq) == Catch::Approx(d1 * std::sqrt(2.0)).epsilon(1e-12));
  REQUIRE(min_gap(sq) == Catch::Approx(min_gap(line)).epsilon(1e-12));
}

TEST_CASE("point budget is enforced before any allocation") {
  REQUIRE_THROWS_AS(generate_cantor(1.0 / 3.0, 30), resource_limit);
  IfsSpec spec;
  spec.dim = 1;
  spec.maps = {{0.25, {0.0}, {}}, {0.25, {0.75}, {}}};
  REQUIRE_THROWS_AS(generate_ifs(spec, 40), resource_limit);
  const auto a = generate_cantor(0.3, 4);
  const auto b = generate_cantor(0.3, 4);
  REQUIRE_THROWS_AS(product_set(a, b, 100), resource_limit);
}

TEST_CASE("generator input validation") {
  REQUIRE_THROWS_AS(generate_cantor(0.0, 3), invalid_parameter);
  REQUIRE_THROWS_AS(generate_cantor(0.6, 3), invalid_parameter);
  REQUIRE_THROWS_AS(generate_cantor(1.0 / 3.0, -1), invalid_parameter);
  REQUIRE_THROWS_AS(make_segment(1), invalid_parameter);
  IfsSpec empty;
  empty.dim = 1;
  REQUIRE_THROWS_AS(generate_ifs(empty, 3), invalid_parameter);
}

TEST_CASE("segment endpoints and spacing") {
  const auto e = make_segment(101);
  REQUIRE(e.count() == 101);
  REQUIRE(e.coords.front() == 0.0);
  REQUIRE(e.coords.back() == 1.0);
  REQUIRE(min_gap(e) == Catch::Approx(0.01).epsilon(1e-12));
  REQUIRE(diameter(e) == Catch::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("smallest positive distance skips exact duplicates") {
  PointSet e;
  e.dim = 1;
  e.coords = {0.0, 0.0, 0.5, 1.0};
  REQUIRE(min_gap(e) == Catch::Approx(0.5));
  PointSet one;
  one.dim = 2;
  one.coords = {1.0, 2.0, 1.0, 2.0};
  REQUIRE(min_gap(one) == 0.0);
}

TEST_CASE("stride decimation keeps first point and respects the cap") {
  const auto e = make_segment(1000);
  const auto s = subsample(e, 300);
  REQUIRE(s.count() <= 300);
  REQUIRE(s.count() >= 250);
  REQUIRE(s.coords.front() == e.coords.front());
  const auto untouched = subsample(e, 5000);
  REQUIRE(untouched.count() == e.count());
}

TEST_CASE("box sampler fills the unit cube deterministically") {
  Rng rng(2024);
  const auto e = random_box_sample(3, 500, rng);
  REQUIRE(e.count() == 500);
  for (double c : e.coords) {
    REQUIRE(c >= 0.0);
    REQUIRE(c < 1.0);
  }
  Rng rng2(2024);
  const auto f = random_box_sample(3, 500, rng2);
  REQUIRE(e.coords == f.coords);
}

TEST_CASE("seeded streams are reproducible and children are independent") {
  Rng a(77), b(77);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
  Rng root(77);
  Rng c1 = root.child("alpha");
  Rng c2 = root.child("beta");
  REQUIRE(c1.next_u64() != c2.next_u64());
  // Child derivation must not consume parent state.
  Rng root2(77);
  (void)root2.child("alpha");
  Rng root3(77);
  REQUIRE(root2.next_u64() == root3.next_u64());
}

TEST_CASE("normal generator has sane first moments") {
  Rng rng(5);
  double sum = 0, sumsq = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sumsq += z * z;
  }
  REQUIRE(sum / n == Catch::Approx(0.0).margin(0.01));
  REQUIRE(sumsq / n == Catch::Approx(1.0).margin(0.02));
}
