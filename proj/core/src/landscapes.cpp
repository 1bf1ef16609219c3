#include "bbo/landscapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bbo/error.hpp"

namespace bbo::bench {

FitnessFunction Landscape::fitness(std::optional<std::size_t> budget) const {
    return FitnessFunction(domain, evaluate, budget);
}

Landscape Landscape::with_threshold(double t) const {
    Landscape copy = *this;
    copy.threshold = t;
    return copy;
}

namespace {

void require_dimension(std::size_t d) {
    if (d == 0) {
        fail(ErrorCode::InvalidArgument, "landscape dimension must be at least 1");
    }
}

} // namespace

Landscape sphere(std::size_t d) {
    require_dimension(d);
    return Landscape{
        "sphere", d, BoxDomain::cube(d, -5.0, 5.0), 0.0, -0.01, Point(d, 0.0),
        [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) {
                s += v * v;
            }
            return -s;
        }};
}

Landscape rastrigin(std::size_t d) {
    require_dimension(d);
    return Landscape{"rastrigin", d, BoxDomain::cube(d, -5.12, 5.12), 0.0, -1.0, Point(d, 0.0),
                     [](std::span<const double> x) {
                         double s = 10.0 * static_cast<double>(x.size());
                         for (double v : x) {
                             s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
                         }
                         return -s;
                     }};
}

Point needle_center(std::size_t d) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    Point c(d);
    for (std::size_t i = 0; i < d; ++i) {
        const double t = static_cast<double>(i + 1) * g;
        c[i] = 6.0 * (t - std::floor(t)) - 3.0;
    }
    return c;
}

Landscape needle(std::size_t d, double width) {
    require_dimension(d);
    if (!(width > 0.0 && width < 2.0)) {
        fail(ErrorCode::InvalidArgument, "needle width must lie in (0, 2) to stay interior");
    }
    Point c = needle_center(d);
    return Landscape{"needle", d, BoxDomain::cube(d, -5.0, 5.0), 1.0, 1.0, c,
                     [c, width](std::span<const double> x) {
                         for (std::size_t i = 0; i < x.size(); ++i) {
                             if (!(std::abs(x[i] - c[i]) < width)) {
                                 return 0.0;
                             }
                         }
                         return 1.0;
                     }};
}

Landscape step_discontinuous(std::size_t d) {
    require_dimension(d);
    using G = StepGeometry;
    const double scale = 36.0 * static_cast<double>(d);
    return Landscape{
        "step", d, BoxDomain::cube(d, -5.0, 5.0), G::kKnownBest, G::kKnownBest,
        Point(d, G::kPlateauCenter), [scale](std::span<const double> x) {
            double level = 0.0;
            bool on_plateau = true;
            for (double v : x) {
                const double cell = std::min(std::floor((v + 5.0) / G::kCell), 4.0);
                const double q = -5.0 + G::kCell * (cell + 0.5);
                level += (q - G::kBowlCenter) * (q - G::kBowlCenter);
                if (!(std::abs(v - G::kPlateauCenter) < G::kPlateauHalfWidth)) {
                    on_plateau = false;
                }
            }
            return -level / scale + (on_plateau ? G::kJump : 0.0);
        }};
}

Landscape landscape_by_name(std::string_view name, std::size_t d) {
    if (name == "sphere") {
        return sphere(d);
    }
    if (name == "rastrigin") {
        return rastrigin(d);
    }
    if (name == "needle") {
        return needle(d, 0.05 * 10.0);
    }
    if (name == "step" || name == "step_discontinuous") {
        return step_discontinuous(d);
    }
    fail(ErrorCode::InvalidArgument, "unknown landscape '" + std::string(name) + "'");
}

} // namespace bbo::bench
