#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fdet/autoencoder.hpp"
#include "fdet/detector.hpp"
#include "fdet/errors.hpp"
#include "fdet/training.hpp"
#include "fdet/windowing.hpp"

namespace fdet {

/// Top-k principal directions of a window matrix.
struct PCABasis {
    std::vector<double> mean_vector;  // length T
    std::vector<double> components;   // k x T, orthonormal rows, leading first
    std::vector<double> eigenvalues;  // all T covariance eigenvalues, descending
    std::size_t k = 0;
    std::size_t dim = 0;
};

namespace detail {

/// Cyclic Jacobi eigendecomposition of a symmetric matrix (row-major n x n).
/// Returns eigenvalues in `values` and eigenvectors as columns of `vectors`.
inline void jacobi_eigen(std::vector<double> a, std::size_t n, std::vector<double>& values,
                         std::vector<double>& vectors) {
    vectors.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        vectors[i * n + i] = 1.0;

    auto off_norm = [&]() {
        double acc = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q)
                acc += a[p * n + q] * a[p * n + q];
        return std::sqrt(2.0 * acc);
    };
    double scale = 0.0;
    for (std::size_t i = 0; i < n * n; ++i)
        scale = std::max(scale, std::abs(a[i]));
    const double tol = std::max(scale, 1.0) * 1e-14;

    for (int sweep = 0; sweep < 64 && off_norm() > tol; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a[p * n + q];
                if (std::abs(apq) <= tol * 1e-2)
                    continue;
                const double theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = a[i * n + p];
                    const double aiq = a[i * n + q];
                    a[i * n + p] = c * aip - s * aiq;
                    a[i * n + q] = s * aip + c * aiq;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double api = a[p * n + i];
                    const double aqi = a[q * n + i];
                    a[p * n + i] = c * api - s * aqi;
                    a[q * n + i] = s * api + c * aqi;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = vectors[i * n + p];
                    const double viq = vectors[i * n + q];
                    vectors[i * n + p] = c * vip - s * viq;
                    vectors[i * n + q] = s * vip + c * viq;
                }
            }
        }
    }
    values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        values[i] = a[i * n + i];
}

}  // namespace detail

/// Principal components via eigendecomposition of the population covariance.
inline PCABasis fit_pca(const WindowSet& windows, std::size_t k) {
    const std::size_t t = windows.window_len;
    const std::size_t m = windows.count;
    if (k == 0 || k >= t)
        throw ParameterError("k must satisfy 1 <= k < window length");
    if (k > m)
        throw ParameterError("k exceeds the number of windows");

    PCABasis basis;
    basis.k = k;
    basis.dim = t;
    basis.mean_vector.assign(t, 0.0);
    for (std::size_t w = 0; w < m; ++w) {
        const auto win = windows.window(w);
        for (std::size_t i = 0; i < t; ++i)
            basis.mean_vector[i] += win[i];
    }
    for (double& x : basis.mean_vector)
        x /= static_cast<double>(m);

    std::vector<double> cov(t * t, 0.0);
    std::vector<double> centered(t);
    for (std::size_t w = 0; w < m; ++w) {
        const auto win = windows.window(w);
        for (std::size_t i = 0; i < t; ++i)
            centered[i] = win[i] - basis.mean_vector[i];
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = i; j < t; ++j)
                cov[i * t + j] += centered[i] * centered[j];
    }
    for (std::size_t i = 0; i < t; ++i)
        for (std::size_t j = i; j < t; ++j) {
            cov[i * t + j] /= static_cast<double>(m);
            cov[j * t + i] = cov[i * t + j];
        }

    std::vector<double> values, vectors;
    detail::jacobi_eigen(std::move(cov), t, values, vectors);

    std::vector<std::size_t> order(t);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] > values[b]; });

    basis.eigenvalues.resize(t);
    for (std::size_t i = 0; i < t; ++i)
        basis.eigenvalues[i] = values[order[i]];
    basis.components.resize(k * t);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t i = 0; i < t; ++i)
            basis.components[r * t + i] = vectors[i * t + order[r]];
    return basis;
}

/// mean + projection of (window - mean) onto the component span.
inline std::vector<double> pca_reconstruct(const PCABasis& basis, std::span<const double> window) {
    if (window.size() != basis.dim)
        throw ShapeError("window length does not match the PCA basis dimension");
    std::vector<double> out(basis.mean_vector);
    for (std::size_t r = 0; r < basis.k; ++r) {
        const double* comp = basis.components.data() + r * basis.dim;
        double coeff = 0.0;
        for (std::size_t i = 0; i < basis.dim; ++i)
            coeff += comp[i] * (window[i] - basis.mean_vector[i]);
        for (std::size_t i = 0; i < basis.dim; ++i)
            out[i] += coeff * comp[i];
    }
    return out;
}

/// Mean per-element squared reconstruction error over a window set, matching
/// the autoencoder's MSE loss definition.
inline double pca_mse(const PCABasis& basis, const WindowSet& windows) {
    if (windows.count == 0)
        throw DataError("empty window set");
    double acc = 0.0;
    for (std::size_t w = 0; w < windows.count; ++w) {
        const auto win = windows.window(w);
        const std::vector<double> rec = pca_reconstruct(basis, win);
        acc += loss(rec, win, LossKind::MSE);
    }
    return acc / static_cast<double>(windows.count);
}

/// Per-window PCA reconstruction losses, same definition as the autoencoder's.
inline std::vector<double> pca_window_losses(const PCABasis& basis, const WindowSet& windows,
                                             LossKind kind) {
    std::vector<double> out(windows.count);
    for (std::size_t w = 0; w < windows.count; ++w)
        out[w] = loss(pca_reconstruct(basis, windows.window(w)), windows.window(w), kind);
    return out;
}

inline Threshold pca_calibrate(const PCABasis& basis, const WindowSet& train_windows,
                               LossKind kind = LossKind::MAE) {
    if (train_windows.count == 0)
        throw DataError("cannot calibrate on an empty window set");
    const std::vector<double> errors = pca_window_losses(basis, train_windows, kind);
    return Threshold{*std::max_element(errors.begin(), errors.end()), train_windows.count, kind};
}

/// PCA-backed detector over one channel; the result uses the same shape and
/// export formats as the autoencoder path, for side-by-side comparisons.
inline DetectionResult pca_detect(const PCABasis& basis, const Threshold& threshold,
                                  std::span<const double> channel,
                                  const Standardizer& standardizer,
                                  const WindowConfig& window_config, double theta) {
    const WindowSet ws = make_windows(channel, standardizer, window_config);
    DetectionResult r;
    r.threshold = threshold;
    r.origins = ws.origins;
    r.window_errors = pca_window_losses(basis, ws, threshold.loss_kind);
    r.window_flags.resize(ws.count);
    for (std::size_t w = 0; w < ws.count; ++w)
        r.window_flags[w] = r.window_errors[w] > threshold.alpha ? 1 : 0;
    r.point_labels =
        points_from_windows(r.window_flags, r.origins, channel.size(), ws.window_len, theta);
    r.segments = segments_from_labels(r.point_labels);
    return r;
}

struct LinearAutoencoder {
    AutoencoderModel model;
    std::vector<EpochStats> history;
};

/// Dense-equivalent linear autoencoder: one full-width linear convolution
/// down to k channels of length 1 and one transposed convolution back.
/// Trained with MSE regardless of the loss in `config`.
inline LinearAutoencoder train_linear_ae(const WindowSet& windows, std::size_t k,
                                         TrainConfig config) {
    const std::size_t t = windows.window_len;
    if (k == 0 || k >= t)
        throw ParameterError("k must satisfy 1 <= k < window length");
    std::vector<LayerConfig> enc{
        LayerConfig::conv(1, k, t, 1, 0, Activation::Linear)};
    std::vector<LayerConfig> dec{
        LayerConfig::tconv(k, 1, t, 1, 0, 0, Activation::Linear)};
    AutoencoderModel model(t, std::move(enc), std::move(dec));
    model.init_weights(config.rng_seed);
    config.loss = LossKind::MSE;
    std::vector<EpochStats> history = train(model, windows, config);
    return LinearAutoencoder{std::move(model), std::move(history)};
}

}  // namespace fdet
