#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "fdet/signal.hpp"

using namespace fdet;

namespace {

SimConfig noiseless(double duration = 0.1) {
    SimConfig cfg;
    cfg.duration = duration;
    cfg.current_amplitude = 100.0;
    cfg.noise_std = 0.0;
    return cfg;
}

double rms(const std::vector<double>& x, std::size_t count) {
    double acc = 0.0;
    for (std::size_t i = 0; i < count; ++i)
        acc += x[i] * x[i];
    return std::sqrt(acc / static_cast<double>(count));
}

}  // namespace

TEST_CASE("clean signal hits the sine identities") {
    const ThreePhaseSignal sig = generate_clean(noiseless());
    REQUIRE(sig.size() == 2000);
    REQUIRE(sig.fault_mask.size() == 2000);

    CHECK(sig.ia[0] == 0.0);

    // Quarter-cycle peak at t = 1/240 s; the nearest grid point is sample 83.
    const std::size_t quarter = static_cast<std::size_t>(
        std::llround((1.0 / 240.0) / noiseless().sample_interval));
    CHECK(std::abs(sig.ia[quarter] - 100.0) < 0.01);

    CHECK(std::accumulate(sig.fault_mask.begin(), sig.fault_mask.end(), 0) == 0);
}

TEST_CASE("noiseless phases sum to zero pointwise") {
    const ThreePhaseSignal sig = generate_clean(noiseless());
    for (std::size_t i = 0; i < sig.size(); ++i) {
        CHECK(std::abs(sig.ia[i] + sig.ib[i] + sig.ic[i]) < 1e-9);
        CHECK(std::abs(sig.va[i] + sig.vb[i] + sig.vc[i]) < 1e-9 * 11e3);
    }
}

TEST_CASE("RMS over whole cycles equals amplitude / sqrt(2)") {
    const ThreePhaseSignal sig = generate_clean(noiseless());
    // 1000 samples = exactly three 60 Hz cycles at 20 kHz.
    const double r = rms(sig.ia, 1000);
    const double expected = 100.0 / std::numbers::sqrt2;
    CHECK(std::abs(r - expected) < 0.001 * expected);
}

TEST_CASE("invalid configurations are rejected") {
    SimConfig cfg = noiseless();
    cfg.sample_interval = 0.0;
    CHECK_THROWS_AS(generate_clean(cfg), ConfigError);

    cfg = noiseless();
    cfg.system_frequency = -60.0;
    CHECK_THROWS_AS(generate_clean(cfg), ConfigError);

    cfg = noiseless();
    cfg.duration = 0.001;  // shorter than one cycle
    CHECK_THROWS_AS(generate_clean(cfg), ConfigError);

    cfg = noiseless();
    cfg.sample_interval = 1.0 / 60.0 / 4.0;  // only 4 samples per cycle
    CHECK_THROWS_AS(generate_clean(cfg), ConfigError);
}

TEST_CASE("LG fault scales only the involved phase") {
    const SimConfig cfg = noiseless(0.3);
    const ThreePhaseSignal clean = generate_clean(cfg);
    FaultSpec spec = FaultSpec::lg(Phase::A, 2000);
    const ThreePhaseSignal faulty = inject_fault(clean, spec, cfg.current_amplitude);

    double in_max = 0.0, out_max = 0.0;
    for (std::size_t i = 0; i < faulty.size(); ++i) {
        if (i >= 2000 && i < 4000)
            in_max = std::max(in_max, std::abs(faulty.ia[i]));
        else
            out_max = std::max(out_max, std::abs(faulty.ia[i]));
    }
    CHECK(in_max >= 4.0 * out_max);

    for (std::size_t i = 0; i < faulty.size(); ++i) {
        REQUIRE(faulty.ib[i] == clean.ib[i]);
        REQUIRE(faulty.ic[i] == clean.ic[i]);
    }

    // Involved voltage sags, the others stay put.
    for (std::size_t i = 2000; i < 4000; ++i)
        REQUIRE(faulty.va[i] == clean.va[i] * spec.voltage_sag);
    for (std::size_t i = 0; i < faulty.size(); ++i) {
        REQUIRE(faulty.vb[i] == clean.vb[i]);
        REQUIRE(faulty.vc[i] == clean.vc[i]);
    }
}

TEST_CASE("TLG fault touches all currents and fills the mask") {
    const SimConfig cfg = noiseless(0.3);
    const ThreePhaseSignal clean = generate_clean(cfg);
    FaultSpec spec = FaultSpec::tlg(1000);
    spec.duration_samples = 1500;
    const ThreePhaseSignal faulty = inject_fault(clean, spec, cfg.current_amplitude);

    std::size_t mask_sum = std::accumulate(faulty.fault_mask.begin(), faulty.fault_mask.end(),
                                           std::size_t{0});
    CHECK(mask_sum == 1500);

    bool a = false, b = false, c = false;
    for (std::size_t i = 1000; i < 2500; ++i) {
        a |= faulty.ia[i] != clean.ia[i];
        b |= faulty.ib[i] != clean.ib[i];
        c |= faulty.ic[i] != clean.ic[i];
    }
    CHECK(a);
    CHECK(b);
    CHECK(c);
}

TEST_CASE("LL fault sags the line-to-line voltage and spares ground reference") {
    const SimConfig cfg = noiseless(0.3);
    const ThreePhaseSignal clean = generate_clean(cfg);
    FaultSpec spec = FaultSpec::ll(Phase::A, Phase::B, 2000);
    const ThreePhaseSignal faulty = inject_fault(clean, spec, cfg.current_amplitude);

    for (std::size_t i = 2000; i < 4000; ++i) {
        const double diff_before = clean.va[i] - clean.vb[i];
        const double diff_after = faulty.va[i] - faulty.vb[i];
        REQUIRE(std::abs(diff_after - spec.voltage_sag * diff_before) < 1e-9 * 11e3);
        const double mid_before = 0.5 * (clean.va[i] + clean.vb[i]);
        const double mid_after = 0.5 * (faulty.va[i] + faulty.vb[i]);
        REQUIRE(std::abs(mid_after - mid_before) < 1e-9 * 11e3);
    }
    for (std::size_t i = 0; i < faulty.size(); ++i)
        REQUIRE(faulty.vc[i] == clean.vc[i]);
}

TEST_CASE("malformed fault specs are rejected") {
    const SimConfig cfg = noiseless(0.2);
    const ThreePhaseSignal clean = generate_clean(cfg);

    FaultSpec zero = FaultSpec::lg(Phase::A, 100);
    zero.duration_samples = 0;
    CHECK_THROWS_AS(inject_fault(clean, zero, cfg.current_amplitude), FaultSpecError);

    FaultSpec mismatched{FaultType::LLG, {Phase::A}, 100, 200};
    CHECK_THROWS_AS(inject_fault(clean, mismatched, cfg.current_amplitude), FaultSpecError);

    FaultSpec repeated{FaultType::LL, {Phase::A, Phase::A}, 100, 200};
    CHECK_THROWS_AS(inject_fault(clean, repeated, cfg.current_amplitude), FaultSpecError);

    FaultSpec outside = FaultSpec::lg(Phase::A, 3500);
    outside.duration_samples = 1000;
    CHECK_THROWS_AS(inject_fault(clean, outside, cfg.current_amplitude), RangeError);

    FaultSpec bad_sag = FaultSpec::lg(Phase::A, 100);
    bad_sag.voltage_sag = 0.0;
    CHECK_THROWS_AS(inject_fault(clean, bad_sag, cfg.current_amplitude), FaultSpecError);
}

TEST_CASE("default scenario masks 8000 samples") {
    SimConfig cfg;
    cfg.duration = 1.0;
    cfg.rng_seed = 7;
    const auto specs = default_fault_scenario(cfg.total_samples());
    const ThreePhaseSignal sig = generate_dataset(cfg, specs);

    REQUIRE(sig.size() == 20000);
    const std::size_t ones = std::accumulate(sig.fault_mask.begin(), sig.fault_mask.end(),
                                             std::size_t{0});
    CHECK(ones == 8000);

    // Mask is exactly the union of the spec intervals.
    std::vector<std::uint8_t> expected(sig.size(), 0);
    for (const auto& s : specs)
        for (std::size_t i = s.start_sample; i < s.start_sample + s.duration_samples; ++i)
            expected[i] = 1;
    CHECK(sig.fault_mask == expected);
}

TEST_CASE("empty spec list reproduces generate_clean bit-exactly") {
    SimConfig cfg;
    cfg.duration = 0.5;
    cfg.rng_seed = 42;
    const ThreePhaseSignal a = generate_clean(cfg);
    const ThreePhaseSignal b = generate_dataset(cfg, {});
    CHECK(a.ia == b.ia);
    CHECK(a.ib == b.ib);
    CHECK(a.ic == b.ic);
    CHECK(a.va == b.va);
    CHECK(a.vb == b.vb);
    CHECK(a.vc == b.vc);
}

TEST_CASE("same seed and specs give bit-identical datasets") {
    SimConfig cfg;
    cfg.duration = 1.0;
    cfg.rng_seed = 1234;
    const auto specs = default_fault_scenario(cfg.total_samples());
    const ThreePhaseSignal a = generate_dataset(cfg, specs);
    const ThreePhaseSignal b = generate_dataset(cfg, specs);
    CHECK(a.ia == b.ia);
    CHECK(a.vb == b.vb);
    CHECK(a.fault_mask == b.fault_mask);
}

TEST_CASE("overlapping faults are rejected") {
    SimConfig cfg;
    cfg.duration = 1.0;
    std::vector<FaultSpec> specs{FaultSpec::lg(Phase::A, 3000),
                                 FaultSpec::tlg(4500)};
    CHECK_THROWS_AS(generate_dataset(cfg, specs), FaultSpecError);
}

TEST_CASE("fault severity dominates the clean RMS inside the interval") {
    // Per-cycle RMS of an involved current during the fault stays above
    // current_scale * 0.8 * clean RMS.
    const SimConfig cfg = noiseless(1.0);
    const auto specs = default_fault_scenario(cfg.total_samples());
    const ThreePhaseSignal clean = generate_clean(cfg);
    const ThreePhaseSignal faulty = generate_dataset(cfg, specs);

    const std::size_t cycle = cfg.samples_per_cycle();
    const double clean_rms = 100.0 / std::numbers::sqrt2;
    for (const auto& spec : specs) {
        for (Phase p : spec.phases) {
            const auto& cur = faulty.current(p);
            for (std::size_t s = spec.start_sample;
                 s + cycle <= spec.start_sample + spec.duration_samples; s += cycle) {
                double acc = 0.0;
                for (std::size_t i = s; i < s + cycle; ++i)
                    acc += cur[i] * cur[i];
                const double r = std::sqrt(acc / static_cast<double>(cycle));
                REQUIRE(r >= spec.current_scale * 0.8 * clean_rms);
            }
        }
    }
    (void)clean;
}
