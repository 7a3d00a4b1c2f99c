// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <vector>

#include "effsearch/hypervolume.hpp"
#include "effsearch/rng.hpp"

using namespace effsearch;

namespace {

// Counts unit cells of an integer grid dominated by at least one point.
double grid_volume(const std::vector<Point4>& pts, const Point4& ref) {
  double count = 0;
  for (int a = 0; a < ref[0]; ++a)
    for (int b = 0; b < ref[1]; ++b)
      for (int c = 0; c < ref[2]; ++c)
        for (int d = 0; d < ref[3]; ++d) {
          for (const auto& p : pts) {
            if (p[0] <= a && p[1] <= b && p[2] <= c && p[3] <= d) {
              ++count;
              break;
            }
          }
        }
  return count;
}

}  // namespace

TEST_CASE("hypervolume matches grid counting on integer points") {
  Rng rng(13);
  const Point4 ref{6, 6, 6, 6};
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Point4> pts(1 + rng.uniform_index(12));
    for (auto& p : pts)
      for (auto& v : p) v = static_cast<double>(rng.uniform_index(6));
    CHECK(hypervolume(pts, ref) == doctest::Approx(grid_volume(pts, ref)));
  }
}

TEST_CASE("hypervolume in lower dimensions") {
  const std::vector<std::vector<double>> two{{1, 3}, {2, 2}, {3, 1}};
  // staircase area under reference (4, 4): 3 + 2 + 1
  CHECK(hypervolume(two, std::vector<double>{4, 4}) == doctest::Approx(6.0));
  const std::vector<std::vector<double>> one{{2}, {1}};
  CHECK(hypervolume(one, std::vector<double>{5}) == doctest::Approx(4.0));
  CHECK(hypervolume(std::vector<Point4>{}, Point4{1, 1, 1, 1}) == 0.0);
}

TEST_CASE("invalid reference points throw") {
  const std::vector<Point4> pts{{1, 1, 1, 1}};
  CHECK_THROWS_AS(hypervolume(pts, Point4{0.5, 2, 2, 2}), InvalidReferencePoint);
}

TEST_CASE("reference point adds ten percent of the worst magnitude") {
  const std::vector<PerformanceVector> pts{{60, 10, 2, 0.5}, {70, 30, 6, 1.5}};
  const auto ref = reference_point(pts);
  CHECK(ref[0] == doctest::Approx(-60 + 6));
  CHECK(ref[1] == doctest::Approx(33));
  CHECK(ref[2] == doctest::Approx(6.6));
  CHECK(ref[3] == doctest::Approx(1.65));
  CHECK_THROWS(reference_point(std::vector<PerformanceVector>{}));
  const auto m = to_minimization(pts[0]);
  CHECK(m == Point4{-60, 10, 2, 0.5});
}

TEST_CASE("dominated points do not change the volume") {
  const std::vector<Point4> a{{1, 1, 2, 2}, {2, 2, 1, 1}};
  auto b = a;
  b.push_back({2, 2, 2, 2});
  const Point4 ref{3, 3, 3, 3};
  CHECK(hypervolume(a, ref) == doctest::Approx(hypervolume(b, ref)));
  // inclusion-exclusion: 2*2*1*1 + 1*1*2*2 - 1*1*1*1
  CHECK(hypervolume(a, ref) == doctest::Approx(7.0));
}
