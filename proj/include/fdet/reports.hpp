#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdet/detector.hpp"
#include "fdet/errors.hpp"
#include "fdet/metrics.hpp"

namespace fdet {

namespace detail {

inline std::string shortest(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream os(path, std::ios::trunc);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");
    return os;
}

}  // namespace detail

inline void write_window_errors_csv(const std::string& path, const DetectionResult& result) {
    auto os = detail::open_out(path);
    os << "index,error,flag\n";
    for (std::size_t w = 0; w < result.window_errors.size(); ++w)
        os << w << ',' << detail::shortest(result.window_errors[w]) << ','
           << int(result.window_flags[w]) << '\n';
}

inline void write_points_csv(const std::string& path, std::span<const std::uint8_t> labels) {
    auto os = detail::open_out(path);
    os << "index,label\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        os << i << ',' << int(labels[i]) << '\n';
}

inline void write_segments_json(const std::string& path, std::span<const Segment> segments) {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (const Segment& s : segments)
        j.push_back({{"start", s.start}, {"end", s.end}});
    auto os = detail::open_out(path);
    os << j.dump(2) << '\n';
}

/// Equal-width histogram of window errors; all-equal inputs get one bin.
inline void write_histogram_csv(const std::string& path, std::span<const double> errors,
                                std::size_t bins = 50) {
    if (bins == 0)
        throw ParameterError("histogram needs at least one bin");
    auto os = detail::open_out(path);
    os << "bin_left,bin_right,count\n";
    if (errors.empty())
        return;
    const auto [lo_it, hi_it] = std::minmax_element(errors.begin(), errors.end());
    const double lo = *lo_it, hi = *hi_it;
    if (lo == hi) {
        os << detail::shortest(lo) << ',' << detail::shortest(hi) << ',' << errors.size() << '\n';
        return;
    }
    std::vector<std::size_t> counts(bins, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double e : errors) {
        auto b = static_cast<std::size_t>((e - lo) / width);
        if (b >= bins)
            b = bins - 1;  // e == hi lands in the last bin
        ++counts[b];
    }
    for (std::size_t b = 0; b < bins; ++b)
        os << detail::shortest(lo + width * static_cast<double>(b)) << ','
           << detail::shortest(lo + width * static_cast<double>(b + 1)) << ',' << counts[b]
           << '\n';
}

inline nlohmann::ordered_json metrics_json(const ConfusionCounts& counts, const Scores& s) {
    nlohmann::ordered_json j;
    j["counts"] = {{"tp", counts.tp}, {"fp", counts.fp}, {"fn", counts.fn}, {"tn", counts.tn}};
    auto put = [&](const char* name, const std::optional<double>& v) {
        if (v)
            j["scores"][name] = *v;
        else
            j["scores"][name] = nullptr;
    };
    put("accuracy", s.accuracy);
    put("precision", s.precision);
    put("recall", s.recall);
    put("specificity", s.specificity);
    put("f1_score", s.f1);
    return j;
}

/// Aligned table with percentages, the shape used in the result reports.
inline std::string metrics_table(const ConfusionCounts& counts, const Scores& s) {
    auto pct = [](const std::optional<double>& v) {
        if (!v)
            return std::string("undefined");
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", *v * 100.0);
        return std::string(buf);
    };
    std::string out;
    out += "Metric       Value\n";
    out += "Accuracy     " + pct(s.accuracy) + "\n";
    out += "Precision    " + pct(s.precision) + "\n";
    out += "Recall       " + pct(s.recall) + "\n";
    out += "Specificity  " + pct(s.specificity) + "\n";
    out += "F1-score     " + pct(s.f1) + "\n";
    out += "Counts       tp=" + std::to_string(counts.tp) + " fp=" + std::to_string(counts.fp) +
           " fn=" + std::to_string(counts.fn) + " tn=" + std::to_string(counts.tn) + "\n";
    return out;
}

/// 2x2 matrix, rows = actual, columns = predicted.
inline void write_confusion_csv(const std::string& path, const ConfusionCounts& counts) {
    auto os = detail::open_out(path);
    os << ",pred_fault,pred_normal\n";
    os << "actual_fault," << counts.tp << ',' << counts.fn << '\n';
    os << "actual_normal," << counts.fp << ',' << counts.tn << '\n';
}

}  // namespace fdet
