// SPDX-License-Identifier: Apache-2.0
#include "effsearch/hypervolume.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>

namespace effsearch {

namespace {

// Non-dominated 2D staircase (x ascending, y descending) with its dominated
// area against (rx, ry), maintained incrementally.
class Staircase {
 public:
  Staircase(double rx, double ry) : rx_(rx), ry_(ry) {}

  void insert(double x, double y) {
    if (x >= rx_ || y >= ry_) return;
    auto it = steps_.lower_bound(x);
    if (it != steps_.end() && it->first == x && it->second <= y) return;
    double cover = ry_;
    if (it != steps_.begin()) {
      const auto prev = std::prev(it);
      if (prev->second <= y) return;
      cover = prev->second;
    }
    double start = x;
    double added = 0.0;
    while (it != steps_.end() && it->second >= y) {
      added += (it->first - start) * (cover - y);
      start = it->first;
      cover = it->second;
      it = steps_.erase(it);
    }
    const double right = it == steps_.end() ? rx_ : it->first;
    added += (right - start) * (cover - y);
    steps_.emplace_hint(it, x, y);
    area_ += added;
  }

  double area() const { return area_; }

 private:
  std::map<double, double> steps_;
  double rx_;
  double ry_;
  double area_ = 0.0;
};

// Points sorted by coordinate 2 ascending.
double volume_3d(const std::vector<Point4>& by_z, const Point4& ref) {
  Staircase s(ref[0], ref[1]);
  double vol = 0.0;
  for (std::size_t i = 0; i < by_z.size(); ++i) {
    s.insert(by_z[i][0], by_z[i][1]);
    const double z_next = i + 1 < by_z.size() ? by_z[i + 1][2] : ref[2];
    vol += s.area() * (z_next - by_z[i][2]);
  }
  return vol;
}

}  // namespace

Point4 to_minimization(const PerformanceVector& p) {
  return {-p.accuracy_pct, p.latency_ms, p.memory_gb, p.energy_j};
}

Point4 reference_point(std::span<const PerformanceVector> points) {
  if (points.empty()) throw std::invalid_argument("reference point of an empty set");
  Point4 worst = to_minimization(points[0]);
  for (const auto& p : points) {
    const auto q = to_minimization(p);
    for (std::size_t d = 0; d < 4; ++d) worst[d] = std::max(worst[d], q[d]);
  }
  for (auto& w : worst) w += std::max(0.1 * std::abs(w), 1e-9);
  return worst;
}

double hypervolume(std::span<const Point4> points, const Point4& ref) {
  for (const auto& p : points)
    for (std::size_t d = 0; d < 4; ++d) {
      if (!std::isfinite(p[d]) || !std::isfinite(ref[d])) throw InvalidReferencePoint("non-finite coordinate");
      if (p[d] > ref[d]) throw InvalidReferencePoint("reference point is not weakly worse than every point");
    }
  std::vector<Point4> by_w(points.begin(), points.end());
  std::sort(by_w.begin(), by_w.end(), [](const Point4& a, const Point4& b) { return a[3] < b[3]; });
  std::vector<Point4> by_z;
  by_z.reserve(by_w.size());
  double vol = 0.0;
  for (std::size_t i = 0; i < by_w.size(); ++i) {
    const auto pos = std::upper_bound(by_z.begin(), by_z.end(), by_w[i],
                                      [](const Point4& a, const Point4& b) { return a[2] < b[2]; });
    by_z.insert(pos, by_w[i]);
    const double w_next = i + 1 < by_w.size() ? by_w[i + 1][3] : ref[3];
    if (w_next > by_w[i][3]) vol += volume_3d(by_z, ref) * (w_next - by_w[i][3]);
  }
  return vol;
}

double hypervolume(std::span<const std::vector<double>> points, const std::vector<double>& ref) {
  const std::size_t d = ref.size();
  if (d == 0 || d > 4) throw std::invalid_argument("hypervolume supports 1 to 4 objectives");
  // Unused dimensions become a unit-width slab: coordinate 0, reference 1.
  Point4 r{1.0, 1.0, 1.0, 1.0};
  for (std::size_t k = 0; k < d; ++k) r[k] = ref[k];
  std::vector<Point4> pts;
  pts.reserve(points.size());
  for (const auto& p : points) {
    if (p.size() != d) throw std::invalid_argument("point dimension differs from reference");
    Point4 q{0.0, 0.0, 0.0, 0.0};
    for (std::size_t k = 0; k < d; ++k) q[k] = p[k];
    pts.push_back(q);
  }
  return hypervolume(std::span<const Point4>(pts), r);
}

double hypervolume(std::span<const PerformanceVector> front, const Point4& ref) {
  std::vector<Point4> pts;
  pts.reserve(front.size());
  for (const auto& p : front) pts.push_back(to_minimization(p));
  return hypervolume(std::span<const Point4>(pts), ref);
}

}  // namespace effsearch
