#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "bbo/core.hpp"

namespace bbo::bench {

/// A test fitness with a documented optimum, maximization convention.
/// Minimization benchmarks are negated here.
struct Landscape {
    std::string name;
    std::size_t dimension = 0;
    BoxDomain domain;
    double known_best = 0.0;
    /// Success level for evaluations-to-threshold, at most known_best.
    double threshold = 0.0;
    /// A point where the fitness equals known_best.
    Point optimizer;
    std::function<double(std::span<const double>)> evaluate;

    [[nodiscard]] FitnessFunction fitness(std::optional<std::size_t> budget = std::nullopt) const;
    [[nodiscard]] Landscape with_threshold(double t) const;
};

/// -sum x_i^2 on [-5, 5]^d; best 0 at the origin; threshold -0.01.
Landscape sphere(std::size_t d);

/// -(10 d + sum (x_i^2 - 10 cos 2 pi x_i)) on [-5.12, 5.12]^d; best 0 at the
/// origin; threshold -1.
Landscape rastrigin(std::size_t d);

/// Centre of the needle: c_i = 6 frac((i + 1) g) - 3 with g the golden-ratio
/// conjugate, so every coordinate is irrational and |c_i| < 3.
Point needle_center(std::size_t d);

/// 1 inside the open cube |x - c|_inf < width, 0 elsewhere, on [-5, 5]^d.
/// Requires 0 < width < 2 so the peak is interior. Best and threshold 1.
Landscape needle(std::size_t d, double width);

/// Geometry of step_discontinuous.
struct StepGeometry {
    static constexpr double kCell = 2.0;         ///< quantizer cell side on [-5, 5]
    static constexpr double kBowlCenter = 2.0;   ///< every coordinate
    static constexpr double kPlateauCenter = -2.0;
    static constexpr double kPlateauHalfWidth = 0.5;
    static constexpr double kJump = 2.0;
    /// kJump - 4/9: the plateau sits in a cell whose bowl level is -4/9.
    static constexpr double kKnownBest = 2.0 - 4.0 / 9.0;
};

/// Piecewise-constant landscape on [-5, 5]^d.
///
/// Each coordinate is snapped to the centre q(x) of its cell (side 2); the bowl
/// level is -|q(x) - a|^2 / (36 d) with a = (2, ..., 2), so the value is constant
/// on every cell. A jump ridge of height 2 surrounds the cube
/// |x - p|_inf < 0.5, p = (-2, ..., -2), which lies inside a single cell on the
/// downhill side of the bowl. That raised cube is the unique best plateau,
/// value 2 - 4/9; crossing its rim changes the fitness by exactly 2. Threshold
/// equals the best plateau value.
Landscape step_discontinuous(std::size_t d);

/// sphere, rastrigin, needle (width 0.05 * side), step. Throws InvalidArgument.
Landscape landscape_by_name(std::string_view name, std::size_t d);

} // namespace bbo::bench
