#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include "fdet/errors.hpp"

namespace fdet {

/// Positive class = fault.
struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t fn = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fp + fn + tn; }

    bool operator==(const ConfusionCounts&) const = default;
};

inline ConfusionCounts confusion(std::span<const std::uint8_t> pred,
                                 std::span<const std::uint8_t> truth) {
    if (pred.size() != truth.size())
        throw ShapeError("prediction and truth lengths differ");
    if (pred.empty())
        throw ShapeError("cannot evaluate empty label sequences");
    ConfusionCounts c;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const bool p = pred[i] != 0;
        const bool t = truth[i] != 0;
        if (p && t)
            ++c.tp;
        else if (p && !t)
            ++c.fp;
        else if (!p && t)
            ++c.fn;
        else
            ++c.tn;
    }
    return c;
}

/// Scores with an undefined denominator are reported as absent rather than
/// silently coerced to 0 or 1.
struct Scores {
    std::optional<double> accuracy;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> specificity;
    std::optional<double> f1;
};

inline Scores scores(const ConfusionCounts& c) {
    if (c.total() == 0)
        throw DataError("cannot score an empty evaluation");
    Scores s;
    s.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0)
        s.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    if (c.tp + c.fn > 0)
        s.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (c.tn + c.fp > 0)
        s.specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    if (s.precision && s.recall && (*s.precision + *s.recall) > 0.0)
        s.f1 = 2.0 * *s.precision * *s.recall / (*s.precision + *s.recall);
    return s;
}

}  // namespace fdet
