#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fdet/autoencoder.hpp"
#include "fdet/windowing.hpp"

namespace fdet {

struct TrainConfig {
    double learning_rate = 1e-3;
    std::size_t epochs = 50;
    std::size_t batch_size = 128;
    LossKind loss = LossKind::MAE;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t rng_seed = 0;
    std::size_t early_stop_patience = 10;  // epochs without a new best training loss
    double validation_fraction = 0.1;

    void validate() const {
        if (!(learning_rate > 0.0))
            throw ParameterError("learning_rate must be positive");
        if (batch_size == 0)
            throw ParameterError("batch_size must be positive");
        if (validation_fraction < 0.0 || validation_fraction >= 1.0)
            throw ParameterError("validation_fraction must lie in [0, 1)");
        if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
            throw ParameterError("Adam betas must lie in [0, 1)");
        if (!(adam_eps > 0.0))
            throw ParameterError("adam_eps must be positive");
    }
};

struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::uint64_t step_count = 0;

    static AdamState for_params(std::size_t n) {
        AdamState s;
        s.first_moment.assign(n, 0.0);
        s.second_moment.assign(n, 0.0);
        return s;
    }
};

/// One bias-corrected Adam update, in place.
inline void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
                      const TrainConfig& cfg) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size() ||
        params.size() != state.second_moment.size())
        throw ShapeError("Adam state, parameters and gradients must share one shape");
    state.step_count += 1;
    const double t = static_cast<double>(state.step_count);
    const double bc1 = 1.0 - std::pow(cfg.adam_beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.adam_beta2, t);
    for (std::size_t i = 0; i < params.size(); ++i) {
        double& m = state.first_moment[i];
        double& v = state.second_moment[i];
        const double g = grads[i];
        m = cfg.adam_beta1 * m + (1.0 - cfg.adam_beta1) * g;
        v = cfg.adam_beta2 * v + (1.0 - cfg.adam_beta2) * g * g;
        const double m_hat = m / bc1;
        const double v_hat = v / bc2;
        params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
    }
}

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = std::numeric_limits<double>::quiet_NaN();
};

/// Minibatch Adam over the window set. The shuffle order, the batch
/// accumulation order and the validation split are all fixed by the seed, so
/// two runs with the same inputs produce bit-identical parameters. The
/// parameters with the best observed training loss are kept.
inline std::vector<EpochStats> train(AutoencoderModel& model, const WindowSet& windows,
                                     const TrainConfig& cfg) {
    cfg.validate();
    if (windows.count == 0)
        throw DataError("cannot train on an empty window set");
    if (windows.window_len != model.input_len())
        throw ShapeError("window length does not match the model input length");
    if (cfg.epochs == 0)
        return {};

    // Every k-th window is held out for validation monitoring.
    std::vector<std::size_t> train_idx, val_idx;
    if (cfg.validation_fraction > 0.0) {
        const auto period = static_cast<std::size_t>(
            std::max<long long>(2, std::llround(1.0 / cfg.validation_fraction)));
        for (std::size_t i = 0; i < windows.count; ++i)
            (i % period == period - 1 ? val_idx : train_idx).push_back(i);
    } else {
        train_idx.resize(windows.count);
        std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
    }
    if (train_idx.empty())
        throw DataError("validation split left no training windows");

    std::mt19937_64 rng(cfg.rng_seed);
    AdamState adam = AdamState::for_params(model.params().size());
    Workspace ws;
    ws.prepare(model);
    std::vector<double> grad(model.params().size());

    std::vector<EpochStats> history;
    std::vector<double> best_params(model.params().begin(), model.params().end());
    double best_loss = std::numeric_limits<double>::infinity();
    std::size_t epochs_since_best = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(train_idx.begin(), train_idx.end(), rng);
        double loss_sum = 0.0;
        for (std::size_t pos = 0; pos < train_idx.size(); pos += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, train_idx.size() - pos);
            std::fill(grad.begin(), grad.end(), 0.0);
            for (std::size_t b = 0; b < count; ++b) {
                const auto win = windows.window(train_idx[pos + b]);
                forward_cached(model, win, ws);
                loss_sum += backward_cached(model, win, cfg.loss, ws, grad);
            }
            const double inv = 1.0 / static_cast<double>(count);
            for (double& g : grad)
                g *= inv;
            adam_step(model.params(), grad, adam, cfg);
        }

        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(train_idx.size());
        if (!val_idx.empty()) {
            double val_sum = 0.0;
            for (std::size_t i : val_idx)
                val_sum += loss(forward_cached(model, windows.window(i), ws), windows.window(i),
                                cfg.loss);
            stats.val_loss = val_sum / static_cast<double>(val_idx.size());
        }
        history.push_back(stats);

        if (!std::isfinite(stats.train_loss))
            throw DivergenceError("training loss became non-finite at epoch " +
                                  std::to_string(epoch + 1));

        if (stats.train_loss < best_loss) {
            best_loss = stats.train_loss;
            std::copy(model.params().begin(), model.params().end(), best_params.begin());
            epochs_since_best = 0;
        } else if (++epochs_since_best >= cfg.early_stop_patience) {
            break;
        }
    }

    std::copy(best_params.begin(), best_params.end(), model.params().begin());
    return history;
}

/// Mean reconstruction loss over a window set (diagnostics and tests).
inline double mean_loss(const AutoencoderModel& model, const WindowSet& windows, LossKind kind) {
    if (windows.count == 0)
        throw DataError("empty window set");
    const std::vector<double> losses = window_losses(model, windows, kind);
    return std::accumulate(losses.begin(), losses.end(), 0.0) /
           static_cast<double>(losses.size());
}

}  // namespace fdet
