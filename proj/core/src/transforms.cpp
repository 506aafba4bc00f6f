#include "mova/transforms.hpp"

#include <cmath>

namespace mova {

const char* transform_kind_name(TransformKind kind) {
    switch (kind) {
    case TransformKind::Linear: return "linear";
    case TransformKind::Sfella: return "sfella";
    case TransformKind::Ela: return "ela";
    case TransformKind::Lela: return "lela";
    case TransformKind::SebaPerformance: return "seba_performance";
    case TransformKind::SebaAlignment: return "seba_alignment";
    }
    return "?";
}

TransformKind parse_transform_kind(const std::string& name) {
    if (name == "linear") return TransformKind::Linear;
    if (name == "sfella") return TransformKind::Sfella;
    if (name == "ela") return TransformKind::Ela;
    if (name == "lela") return TransformKind::Lela;
    if (name == "seba_performance") return TransformKind::SebaPerformance;
    if (name == "seba_alignment") return TransformKind::SebaAlignment;
    throw ConfigError("unknown transform kind: " + name);
}

std::vector<CurveSample> curve_samples(TransformKind kind, double c,
                                       double lo, double hi, double step) {
    if (step <= 0.0) throw ConfigError("curve step must be positive");
    if (!(lo < hi)) throw ConfigError("curve range needs lo < hi");
    // The small nudge keeps counts stable when (hi - lo) / step lands just
    // below an integer, e.g. 6 / 0.01.
    const auto rows =
        static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
    std::vector<CurveSample> out;
    out.reserve(rows);
    for (std::size_t i = 0; i < rows; ++i) {
        const double x = lo + static_cast<double>(i) * step;
        const double fwd = transform_value(kind, c, x + step);
        const double bwd = transform_value(kind, c, x - step);
        out.push_back({x, transform_value(kind, c, x), (fwd - bwd) / (2.0 * step)});
    }
    return out;
}

} // namespace mova
