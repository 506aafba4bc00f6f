#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mova/error.hpp"

namespace mova {

enum class TransformKind {
    Linear,
    Sfella,
    Ela,
    Lela,
    SebaPerformance,
    SebaAlignment,
};

const char* transform_kind_name(TransformKind kind);
TransformKind parse_transform_kind(const std::string& name);

// Arguments to exp() are clamped so extreme inputs saturate instead of
// overflowing to inf. exp(700) is still finite in double precision.
inline constexpr double kExpArgCap = 700.0;

// Maps a scaled objective value to utility. Every kind maps 0 to exactly 0
// and is monotone nondecreasing in x (flat once the exp term saturates).
inline double transform_value(TransformKind kind, double c, double x) {
    const double cx = c * x;
    switch (kind) {
    case TransformKind::Linear:
        return cx;
    case TransformKind::Sfella:
        if (x > 0.0) return std::log(cx + 1.0);
        return 1.0 - std::exp(std::min(-cx, kExpArgCap));
    case TransformKind::Ela:
        return 1.0 - std::exp(std::min(-cx, kExpArgCap));
    case TransformKind::Lela:
        return 1.0 - std::exp(std::min(-cx, kExpArgCap)) + cx;
    case TransformKind::SebaPerformance:
        return cx;
    case TransformKind::SebaAlignment:
        if (x > 0.0) return 0.0;
        return -(cx * cx);
    }
    return 0.0;
}

// Snaps x to the nearest multiple of g, ties away from zero. g == 0 keeps
// x untouched.
inline double granularize(double x, double g) {
    if (g == 0.0) return x;
    return std::round(x / g) * g;
}

struct TransformSpec {
    TransformKind kind = TransformKind::Linear;
    double scale = 1.0;
    double granularity = 0.0;
};

inline double apply_spec(const TransformSpec& spec, double x) {
    return transform_value(spec.kind, spec.scale, granularize(x, spec.granularity));
}

// Total utility of an objective vector: granularize each component, transform
// it, and sum. Arity mismatch is a configuration error.
inline double aggregate(const std::vector<TransformSpec>& specs,
                        const double* values, std::size_t count) {
    if (specs.size() != count) {
        throw ConfigError("aggregate: " + std::to_string(specs.size()) +
                          " transform specs for " + std::to_string(count) +
                          " objective values");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        total += apply_spec(specs[i], values[i]);
    }
    return total;
}

inline double aggregate(const std::vector<TransformSpec>& specs,
                        const std::vector<double>& values) {
    return aggregate(specs, values.data(), values.size());
}

struct CurveSample {
    double x;
    double f;
    double df; // central finite difference, per unit of x
};

// Samples f over [lo, hi] inclusive at the given step. The derivative column
// is (f(x+step) - f(x-step)) / (2*step).
std::vector<CurveSample> curve_samples(TransformKind kind, double c,
                                       double lo, double hi, double step);

} // namespace mova
