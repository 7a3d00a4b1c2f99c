// SPDX-License-Identifier: Apache-2.0
//
// Exact hypervolume for up to four minimized objectives.
#pragma once

#include <array>
#include <span>
#include <stdexcept>
#include <vector>

#include "effsearch/objectives.hpp"

namespace effsearch {

class InvalidReferencePoint : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Point4 = std::array<double, 4>;

/// (-accuracy, latency, memory, energy): every coordinate minimized.
Point4 to_minimization(const PerformanceVector& p);

/// Per coordinate, the worst value over `points` plus 10% of its magnitude.
/// Throws std::invalid_argument for an empty set.
Point4 reference_point(std::span<const PerformanceVector> points);

/// Measure of the region dominated by `points` and bounded by `ref`, all
/// coordinates minimized. Points must be weakly better than `ref` in every
/// coordinate (InvalidReferencePoint otherwise); dimension is ref.size() <= 4.
double hypervolume(std::span<const std::vector<double>> points, const std::vector<double>& ref);
double hypervolume(std::span<const Point4> points, const Point4& ref);
double hypervolume(std::span<const PerformanceVector> front, const Point4& ref);

}  // namespace effsearch
