#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "psl/error.hpp"

namespace psl {

/// Soft truth value in [0, 1].
using Truth = double;

namespace truth {

/// Absolute slack accepted on [0,1] bounds before rejecting an input.
inline constexpr double kBoundTolerance = 1e-9;

/// Validates x as a truth value. Values within kBoundTolerance outside
/// [0,1] are clamped; anything further out raises DomainError.
inline Truth checked(double x, const char* what = "truth value") {
    if (std::isnan(x) || x < -kBoundTolerance || x > 1.0 + kBoundTolerance) {
        throw DomainError(std::string(what) + " out of range [0,1]: " + std::to_string(x));
    }
    return std::clamp(x, 0.0, 1.0);
}

/// Relaxed conjunction: max(0, a + b - 1).
inline Truth tnorm(Truth a, Truth b) {
    return std::max(0.0, a + b - 1.0);
}

/// Relaxed disjunction: min(1, a + b).
inline Truth tconorm(Truth a, Truth b) {
    return std::min(1.0, a + b);
}

/// Negation: 1 - a.
inline Truth negate(Truth a) {
    return 1.0 - a;
}

/// Truth of a disjunctive clause given the summed literal contributions
/// (positive literals contribute their value, negated ones 1 - value).
inline Truth clauseTruth(double contributionSum) {
    return std::min(1.0, contributionSum);
}

/// Distance from satisfaction of a clause: how far its truth falls short of 1.
inline double distanceFromSatisfaction(double contributionSum) {
    return std::max(0.0, 1.0 - contributionSum);
}

} // namespace truth
} // namespace psl
