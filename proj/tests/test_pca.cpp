#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>
#include <random>

#include "fdet/pca.hpp"
#include "fdet/signal.hpp"

using namespace fdet;

namespace {

WindowSet windows_from_rows(std::vector<std::vector<double>> rows) {
    WindowSet ws;
    ws.count = rows.size();
    ws.window_len = rows.front().size();
    ws.config = WindowConfig{ws.window_len, 1};
    ws.origins.resize(ws.count, 0);
    ws.data.reserve(ws.count * ws.window_len);
    for (const auto& r : rows)
        ws.data.insert(ws.data.end(), r.begin(), r.end());
    return ws;
}

// x = mean + U z + noise, with factor variances spread out.
WindowSet gaussian_factor_windows(std::size_t count, std::size_t dim, std::size_t rank,
                                  double noise, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> u(rank * dim);
    for (auto& v : u)
        v = gauss(rng);
    std::vector<std::vector<double>> rows(count, std::vector<double>(dim));
    for (auto& row : rows) {
        std::vector<double> z(rank);
        for (std::size_t r = 0; r < rank; ++r)
            z[r] = gauss(rng) * (2.0 / static_cast<double>(r + 1));
        for (std::size_t i = 0; i < dim; ++i) {
            double acc = 0.3;  // nonzero mean
            for (std::size_t r = 0; r < rank; ++r)
                acc += u[r * dim + i] * z[r];
            row[i] = acc + noise * gauss(rng);
        }
    }
    return windows_from_rows(std::move(rows));
}

}  // namespace

TEST_CASE("data in an exact 2-D affine subspace is recovered with k = 2") {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t dim = 12;
    std::vector<double> base(dim), u(dim), v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        base[i] = gauss(rng);
        u[i] = gauss(rng);
        v[i] = gauss(rng);
    }
    std::vector<std::vector<double>> rows;
    for (int n = 0; n < 60; ++n) {
        const double a = gauss(rng), b = gauss(rng);
        std::vector<double> row(dim);
        for (std::size_t i = 0; i < dim; ++i)
            row[i] = base[i] + a * u[i] + b * v[i];
        rows.push_back(std::move(row));
    }
    const WindowSet ws = windows_from_rows(std::move(rows));
    const PCABasis basis = fit_pca(ws, 2);
    for (std::size_t w = 0; w < ws.count; ++w) {
        const auto win = ws.window(w);
        const auto rec = pca_reconstruct(basis, win);
        for (std::size_t i = 0; i < dim; ++i)
            REQUIRE_THAT(rec[i], Catch::Matchers::WithinAbs(win[i], 1e-10));
    }
}

TEST_CASE("component rows are orthonormal and eigenpairs have tiny residuals") {
    const WindowSet ws = gaussian_factor_windows(400, 10, 10, 0.0, 77);
    const std::size_t k = 6;
    const PCABasis basis = fit_pca(ws, k);

    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t q = r; q < k; ++q) {
            double dot = 0.0;
            for (std::size_t i = 0; i < basis.dim; ++i)
                dot += basis.components[r * basis.dim + i] * basis.components[q * basis.dim + i];
            REQUIRE_THAT(dot, Catch::Matchers::WithinAbs(r == q ? 1.0 : 0.0, 1e-8));
        }

    // Rebuild the covariance independently and check C v = lambda v.
    const std::size_t t = basis.dim;
    std::vector<double> cov(t * t, 0.0);
    for (std::size_t w = 0; w < ws.count; ++w) {
        const auto win = ws.window(w);
        for (std::size_t i = 0; i < t; ++i)
            for (std::size_t j = 0; j < t; ++j)
                cov[i * t + j] += (win[i] - basis.mean_vector[i]) *
                                  (win[j] - basis.mean_vector[j]);
    }
    for (auto& c : cov)
        c /= static_cast<double>(ws.count);

    double trace = 0.0;
    for (std::size_t i = 0; i < t; ++i)
        trace += cov[i * t + i];
    double eig_sum = 0.0;
    for (double l : basis.eigenvalues)
        eig_sum += l;
    REQUIRE_THAT(eig_sum, Catch::Matchers::WithinRel(trace, 1e-10));

    for (std::size_t r = 0; r < k; ++r) {
        const double* v = basis.components.data() + r * t;
        for (std::size_t i = 0; i < t; ++i) {
            double cv = 0.0;
            for (std::size_t j = 0; j < t; ++j)
                cv += cov[i * t + j] * v[j];
            REQUIRE_THAT(cv, Catch::Matchers::WithinAbs(basis.eigenvalues[r] * v[i], 1e-10));
        }
    }
}

TEST_CASE("k = T-1 reconstruction error equals count times the smallest eigenvalue") {
    const WindowSet ws = gaussian_factor_windows(300, 8, 8, 0.2, 13);
    const PCABasis basis = fit_pca(ws, 7);
    double total_sq = 0.0;
    for (std::size_t w = 0; w < ws.count; ++w) {
        const auto win = ws.window(w);
        const auto rec = pca_reconstruct(basis, win);
        for (std::size_t i = 0; i < 8; ++i)
            total_sq += (win[i] - rec[i]) * (win[i] - rec[i]);
    }
    const double expected = static_cast<double>(ws.count) * basis.eigenvalues.back();
    REQUIRE_THAT(total_sq, Catch::Matchers::WithinRel(expected, 1e-8));
}

TEST_CASE("reconstruction geometry") {
    const WindowSet ws = gaussian_factor_windows(200, 9, 3, 0.05, 5);
    const PCABasis basis = fit_pca(ws, 3);

    SECTION("windows orthogonal to the span return the mean") {
        std::mt19937_64 rng(6);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> w(basis.dim);
        for (auto& x : w)
            x = gauss(rng);
        // Remove the component parts to get an orthogonal residual.
        for (std::size_t r = 0; r < basis.k; ++r) {
            double dot = 0.0;
            for (std::size_t i = 0; i < basis.dim; ++i)
                dot += w[i] * basis.components[r * basis.dim + i];
            for (std::size_t i = 0; i < basis.dim; ++i)
                w[i] -= dot * basis.components[r * basis.dim + i];
        }
        std::vector<double> probe(basis.dim);
        for (std::size_t i = 0; i < basis.dim; ++i)
            probe[i] = basis.mean_vector[i] + w[i];
        const auto rec = pca_reconstruct(basis, probe);
        for (std::size_t i = 0; i < basis.dim; ++i)
            REQUIRE_THAT(rec[i], Catch::Matchers::WithinAbs(basis.mean_vector[i], 1e-10));
    }

    SECTION("projection is a contraction around the mean") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(-3.0, 3.0);
        for (int round = 0; round < 50; ++round) {
            std::vector<double> x(basis.dim);
            for (auto& v : x)
                v = u(rng);
            const auto rec = pca_reconstruct(basis, x);
            double err = 0.0, norm = 0.0;
            for (std::size_t i = 0; i < basis.dim; ++i) {
                err += (x[i] - rec[i]) * (x[i] - rec[i]);
                norm += (x[i] - basis.mean_vector[i]) * (x[i] - basis.mean_vector[i]);
            }
            REQUIRE(err <= norm + 1e-12);
        }
    }

    SECTION("shape and parameter errors") {
        std::vector<double> wrong(basis.dim + 1, 0.0);
        CHECK_THROWS_AS(pca_reconstruct(basis, wrong), ShapeError);
        CHECK_THROWS_AS(fit_pca(ws, 0), ParameterError);
        CHECK_THROWS_AS(fit_pca(ws, 9), ParameterError);  // k = T
        const WindowSet few = gaussian_factor_windows(3, 9, 2, 0.0, 8);
        CHECK_THROWS_AS(fit_pca(few, 5), ParameterError);
    }
}

TEST_CASE("PCA-backed detection mirrors the autoencoder result shape") {
    SimConfig cfg;
    cfg.duration = 0.4;
    cfg.rng_seed = 71;
    const ThreePhaseSignal clean = generate_clean(cfg);
    const Standardizer st = fit_standardizer(clean.ia);
    const WindowConfig wc{64, 2};
    const WindowSet train_ws = make_windows(clean.ia, st, wc);
    const PCABasis basis = fit_pca(train_ws, 8);
    const Threshold thr = pca_calibrate(basis, train_ws, LossKind::MAE);

    // Its own calibration channel raises no flags.
    const DetectionResult silent = pca_detect(basis, thr, clean.ia, st, wc, 0.5);
    CHECK(std::accumulate(silent.window_flags.begin(), silent.window_flags.end(), 0) == 0);
    CHECK(silent.segments.empty());

    // A strong fault is flagged, with the usual flag/label/segment contract.
    const ThreePhaseSignal faulty =
        generate_dataset(cfg, {FaultSpec::lg(Phase::A, 3000)});
    const DetectionResult r = pca_detect(basis, thr, faulty.ia, st, wc, 0.5);
    REQUIRE(!r.segments.empty());
    for (std::size_t w = 0; w < r.window_errors.size(); ++w)
        REQUIRE(r.window_flags[w] == (r.window_errors[w] > thr.alpha ? 1 : 0));
    std::vector<std::uint8_t> from_segments(faulty.size(), 0);
    for (const Segment& s : r.segments)
        for (std::size_t i = s.start; i < s.end; ++i)
            from_segments[i] = 1;
    REQUIRE(from_segments == r.point_labels);
}

TEST_CASE("linear autoencoder converges to the PCA optimum") {
    const WindowSet train_set = gaussian_factor_windows(512, 8, 3, 0.1, 42);
    const std::size_t k = 3;
    const PCABasis basis = fit_pca(train_set, k);
    TrainConfig cfg;
    cfg.epochs = 800;
    cfg.learning_rate = 5e-3;
    cfg.batch_size = 64;
    cfg.rng_seed = 42;
    cfg.early_stop_patience = 800;
    cfg.validation_fraction = 0.0;
    LinearAutoencoder ae = train_linear_ae(train_set, k, cfg);
    // Fine-tune with a small step to settle onto the optimum.
    TrainConfig fine = cfg;
    fine.epochs = 400;
    fine.learning_rate = 2e-4;
    train(ae.model, train_set, fine);

    const double pca = pca_mse(basis, train_set);
    const double net = mean_loss(ae.model, train_set, LossKind::MSE);
    INFO("pca " << pca << " linear-ae " << net);
    CHECK(net >= pca * (1.0 - 1e-9));  // PCA is the MSE optimum
    CHECK(net <= pca * 1.02);

    // Rank-2 data with k = 2 reaches essentially zero error.
    const WindowSet lowrank = gaussian_factor_windows(256, 8, 2, 0.0, 43);
    TrainConfig cfg2 = cfg;
    cfg2.rng_seed = 43;
    const LinearAutoencoder exact = train_linear_ae(lowrank, 2, cfg2);
    const double low_mse = mean_loss(exact.model, lowrank, LossKind::MSE);
    const double low_var = pca_mse(fit_pca(lowrank, 2), lowrank);
    INFO("rank-2 mse " << low_mse << " pca floor " << low_var);
    CHECK(low_mse < 1e-3);

    // The compression invariant rules out k = T.
    CHECK_THROWS_AS(train_linear_ae(train_set, 8, cfg), ParameterError);

    // Determinism: same seed, same parameters.
    const LinearAutoencoder again = train_linear_ae(lowrank, 2, cfg2);
    REQUIRE(again.model.params().size() == exact.model.params().size());
    for (std::size_t i = 0; i < again.model.params().size(); ++i)
        REQUIRE(again.model.params()[i] == exact.model.params()[i]);
}
