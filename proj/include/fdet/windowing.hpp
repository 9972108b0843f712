#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "fdet/errors.hpp"

namespace fdet {

struct WindowConfig {
    std::size_t window_len = 320;
    std::size_t stride = 1;

    void validate() const {
        if (window_len < 4)
            throw ParameterError("window_len must be at least 4");
        if (stride < 1)
            throw ParameterError("stride must be at least 1");
    }
};

/// z-score parameters fitted on the training channel only.
struct Standardizer {
    double mean = 0.0;
    double std = 1.0;

    double apply(double x) const { return (x - mean) / std; }
    double invert(double z) const { return z * std + mean; }
};

/// Overlapping standardized windows, row-major count x window_len.
struct WindowSet {
    std::size_t count = 0;
    std::size_t window_len = 0;
    std::vector<double> data;
    std::vector<std::size_t> origins;
    WindowConfig config;

    std::span<const double> window(std::size_t w) const {
        return {data.data() + w * window_len, window_len};
    }
};

/// Sample mean and population standard deviation of a channel.
inline Standardizer fit_standardizer(std::span<const double> channel) {
    if (channel.size() < 2)
        throw DataError("standardizer needs at least two samples");
    double mean = 0.0;
    for (double x : channel)
        mean += x;
    mean /= static_cast<double>(channel.size());
    double var = 0.0;
    for (double x : channel)
        var += (x - mean) * (x - mean);
    var /= static_cast<double>(channel.size());
    if (!(var > 0.0))
        throw DegenerateSignalError("channel is constant; standardization undefined");
    return Standardizer{mean, std::sqrt(var)};
}

/// Stride-s slicing: floor((N - T) / stride) + 1 windows, each z-scored.
inline WindowSet make_windows(std::span<const double> channel, const Standardizer& std_params,
                              const WindowConfig& config) {
    config.validate();
    const std::size_t n = channel.size();
    const std::size_t t = config.window_len;
    if (n < t)
        throw InsufficientLengthError("channel shorter than the window length");

    WindowSet ws;
    ws.window_len = t;
    ws.config = config;
    ws.count = (n - t) / config.stride + 1;
    ws.data.resize(ws.count * t);
    ws.origins.resize(ws.count);
    for (std::size_t w = 0; w < ws.count; ++w) {
        const std::size_t origin = w * config.stride;
        ws.origins[w] = origin;
        double* dst = ws.data.data() + w * t;
        for (std::size_t i = 0; i < t; ++i)
            dst[i] = std_params.apply(channel[origin + i]);
    }
    return ws;
}

/// Window-level flags to point-level labels: a point is labeled 1 when at
/// least a fraction theta of the windows covering it are flagged. Points no
/// window covers stay 0.
inline std::vector<std::uint8_t> points_from_windows(std::span<const std::uint8_t> flags,
                                                     std::span<const std::size_t> origins,
                                                     std::size_t n, std::size_t window_len,
                                                     double theta) {
    if (flags.size() != origins.size())
        throw ShapeError("flags and origins disagree in length");
    if (!(theta > 0.0) || theta > 1.0)
        throw ParameterError("theta must lie in (0, 1]");

    std::vector<std::uint32_t> covered(n, 0), flagged(n, 0);
    for (std::size_t w = 0; w < origins.size(); ++w) {
        const std::size_t begin = origins[w];
        if (begin + window_len > n)
            throw RangeError("window extends past the end of the signal");
        for (std::size_t i = begin; i < begin + window_len; ++i) {
            ++covered[i];
            if (flags[w])
                ++flagged[i];
        }
    }
    std::vector<std::uint8_t> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i)
        if (covered[i] > 0 &&
            static_cast<double>(flagged[i]) >= theta * static_cast<double>(covered[i]))
            labels[i] = 1;
    return labels;
}

}  // namespace fdet
