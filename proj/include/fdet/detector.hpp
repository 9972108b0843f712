#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fdet/autoencoder.hpp"
#include "fdet/errors.hpp"
#include "fdet/signal.hpp"
#include "fdet/windowing.hpp"

namespace fdet {

/// Anomaly threshold: the largest per-window reconstruction loss seen on the
/// fault-free calibration windows. Errors strictly above alpha are anomalous,
/// so re-scoring the calibration set never raises a flag.
struct Threshold {
    double alpha = 0.0;
    std::size_t calibration_size = 0;
    LossKind loss_kind = LossKind::MAE;
};

struct Segment {
    std::size_t start = 0;  // inclusive
    std::size_t end = 0;    // exclusive

    bool operator==(const Segment&) const = default;
};

struct DetectionResult {
    std::vector<double> window_errors;
    std::vector<std::uint8_t> window_flags;
    std::vector<std::size_t> origins;
    std::vector<std::uint8_t> point_labels;
    std::vector<Segment> segments;
    Threshold threshold;
};

/// Maximal runs of 1s in a point-label sequence.
inline std::vector<Segment> segments_from_labels(std::span<const std::uint8_t> labels) {
    std::vector<Segment> segments;
    std::size_t i = 0;
    while (i < labels.size()) {
        if (labels[i]) {
            std::size_t j = i;
            while (j < labels.size() && labels[j])
                ++j;
            segments.push_back(Segment{i, j});
            i = j;
        } else {
            ++i;
        }
    }
    return segments;
}

inline Threshold calibrate(const AutoencoderModel& model, const WindowSet& train_windows,
                           LossKind kind = LossKind::MAE) {
    if (train_windows.count == 0)
        throw DataError("cannot calibrate on an empty window set");
    const std::vector<double> errors = window_losses(model, train_windows, kind);
    Threshold t;
    t.alpha = *std::max_element(errors.begin(), errors.end());
    t.calibration_size = train_windows.count;
    t.loss_kind = kind;
    return t;
}

/// Scores one channel. Windows are standardized with the *training*
/// standardizer (phases share amplitude statistics, so the phase-A fit is
/// reused for B and C), flagged by strict comparison against alpha, and
/// mapped to point labels by the covering-fraction rule.
inline DetectionResult detect(const AutoencoderModel& model, const Threshold& threshold,
                              std::span<const double> channel, const Standardizer& standardizer,
                              const WindowConfig& window_config, double theta) {
    const WindowSet ws = make_windows(channel, standardizer, window_config);
    DetectionResult r;
    r.threshold = threshold;
    r.origins = ws.origins;
    r.window_errors = window_losses(model, ws, threshold.loss_kind);
    r.window_flags.resize(ws.count);
    for (std::size_t w = 0; w < ws.count; ++w)
        r.window_flags[w] = r.window_errors[w] > threshold.alpha ? 1 : 0;
    r.point_labels = points_from_windows(r.window_flags, r.origins, channel.size(),
                                         ws.window_len, theta);
    r.segments = segments_from_labels(r.point_labels);
    return r;
}

struct PhaseDetection {
    DetectionResult phase_a, phase_b, phase_c;
    std::vector<std::uint8_t> merged_labels;  // logical OR across phases
    std::vector<Segment> merged_segments;

    const DetectionResult& phase(Phase p) const {
        return p == Phase::A ? phase_a : (p == Phase::B ? phase_b : phase_c);
    }
};

/// Runs the same model and threshold over each phase current independently
/// and ORs the point labels: a point is faulty if any phase says so.
inline PhaseDetection detect_all_phases(const AutoencoderModel& model, const Threshold& threshold,
                                        const ThreePhaseSignal& signal,
                                        const Standardizer& standardizer,
                                        const WindowConfig& window_config, double theta) {
    PhaseDetection d{
        detect(model, threshold, signal.ia, standardizer, window_config, theta),
        detect(model, threshold, signal.ib, standardizer, window_config, theta),
        detect(model, threshold, signal.ic, standardizer, window_config, theta),
        {},
        {},
    };
    d.merged_labels.resize(signal.size());
    for (std::size_t i = 0; i < signal.size(); ++i)
        d.merged_labels[i] = d.phase_a.point_labels[i] | d.phase_b.point_labels[i] |
                             d.phase_c.point_labels[i];
    d.merged_segments = segments_from_labels(d.merged_labels);
    return d;
}

}  // namespace fdet
