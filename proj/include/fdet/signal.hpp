#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "fdet/errors.hpp"

namespace fdet {

enum class Phase : int { A = 0, B = 1, C = 2 };

enum class FaultType { LG, LLG, TLG, LL };

/// Phenomenological generator settings for a balanced three-phase system.
struct SimConfig {
    double sample_interval = 5e-5;    // seconds
    double system_frequency = 60.0;   // hertz
    double duration = 1.0;            // seconds
    double current_amplitude = 100.0; // amperes, peak per phase
    double voltage_amplitude = 11e3;  // volts, peak per phase
    double noise_std = 0.01;          // fraction of amplitude
    std::uint64_t rng_seed = 0;

    std::size_t total_samples() const {
        return static_cast<std::size_t>(std::llround(duration / sample_interval));
    }

    std::size_t samples_per_cycle() const {
        return static_cast<std::size_t>(
            std::llround(1.0 / (system_frequency * sample_interval)));
    }

    void validate() const {
        if (!(sample_interval > 0.0))
            throw ConfigError("sample_interval must be positive");
        if (!(system_frequency > 0.0))
            throw ConfigError("system_frequency must be positive");
        if (!(duration >= 1.0 / system_frequency))
            throw ConfigError("duration must cover at least one full cycle");
        if (!(current_amplitude > 0.0) || !(voltage_amplitude > 0.0))
            throw ConfigError("amplitudes must be positive");
        if (noise_std < 0.0)
            throw ConfigError("noise_std must be nonnegative");
        if (samples_per_cycle() < 8)
            throw ConfigError("need at least 8 samples per cycle");
    }
};

/// One short-circuit event. Involved phases must match the fault type:
/// LG 1 phase, LLG 2, TLG 3, LL 2 (no ground path).
struct FaultSpec {
    FaultType type = FaultType::LG;
    std::vector<Phase> phases;
    std::size_t start_sample = 0;
    std::size_t duration_samples = 2000;
    double current_scale = 8.0;  // multiplier on involved-phase currents
    double voltage_sag = 0.4;    // multiplier in (0,1] on involved-phase voltages
    double dc_offset_tau = 0.02; // seconds, decay of the DC transient

    static FaultSpec lg(Phase p, std::size_t start) {
        return FaultSpec{FaultType::LG, {p}, start};
    }
    static FaultSpec llg(Phase p, Phase q, std::size_t start) {
        return FaultSpec{FaultType::LLG, {p, q}, start};
    }
    static FaultSpec tlg(std::size_t start) {
        return FaultSpec{FaultType::TLG, {Phase::A, Phase::B, Phase::C}, start};
    }
    static FaultSpec ll(Phase p, Phase q, std::size_t start) {
        return FaultSpec{FaultType::LL, {p, q}, start};
    }

    void validate() const {
        std::size_t expected = 0;
        switch (type) {
            case FaultType::LG: expected = 1; break;
            case FaultType::LLG: expected = 2; break;
            case FaultType::TLG: expected = 3; break;
            case FaultType::LL: expected = 2; break;
        }
        if (phases.size() != expected)
            throw FaultSpecError("involved phase count does not match fault type");
        for (std::size_t i = 0; i < phases.size(); ++i)
            for (std::size_t j = i + 1; j < phases.size(); ++j)
                if (phases[i] == phases[j])
                    throw FaultSpecError("involved phases must be distinct");
        if (duration_samples == 0)
            throw FaultSpecError("fault duration must be at least one sample");
        if (!(current_scale > 0.0))
            throw FaultSpecError("current_scale must be positive");
        if (!(voltage_sag > 0.0) || voltage_sag > 1.0)
            throw FaultSpecError("voltage_sag must lie in (0, 1]");
        if (!(dc_offset_tau > 0.0))
            throw FaultSpecError("dc_offset_tau must be positive");
    }

    bool involves(Phase p) const {
        for (Phase q : phases)
            if (q == p) return true;
        return false;
    }
};

/// Six aligned channels plus the ground-truth fault mask.
struct ThreePhaseSignal {
    double sample_interval = 5e-5;
    std::vector<double> ia, ib, ic, va, vb, vc;
    std::vector<std::uint8_t> fault_mask;
    std::vector<FaultSpec> fault_specs;

    std::size_t size() const { return ia.size(); }

    std::vector<double>& current(Phase p) {
        return p == Phase::A ? ia : (p == Phase::B ? ib : ic);
    }
    const std::vector<double>& current(Phase p) const {
        return p == Phase::A ? ia : (p == Phase::B ? ib : ic);
    }
    std::vector<double>& voltage(Phase p) {
        return p == Phase::A ? va : (p == Phase::B ? vb : vc);
    }
    const std::vector<double>& voltage(Phase p) const {
        return p == Phase::A ? va : (p == Phase::B ? vb : vc);
    }
};

namespace detail {

// Phase offsets: A = 0, B lags by 120 degrees, C leads by 120 degrees.
inline double phase_offset(Phase p) {
    constexpr double third = 2.0 * std::numbers::pi / 3.0;
    switch (p) {
        case Phase::B: return -third;
        case Phase::C: return +third;
        default: return 0.0;
    }
}

}  // namespace detail

/// Balanced sinusoids with optional gaussian noise; mask all zero.
/// Deterministic for a given rng_seed.
inline ThreePhaseSignal generate_clean(const SimConfig& config) {
    config.validate();
    const std::size_t n = config.total_samples();
    const double omega = 2.0 * std::numbers::pi * config.system_frequency;

    ThreePhaseSignal sig;
    sig.sample_interval = config.sample_interval;
    sig.fault_mask.assign(n, 0);

    std::mt19937_64 rng(config.rng_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto fill = [&](std::vector<double>& out, Phase p, double amplitude) {
        const double shift = detail::phase_offset(p);
        out.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i) * config.sample_interval;
            double v = amplitude * std::sin(omega * t + shift);
            if (config.noise_std > 0.0)
                v += config.noise_std * amplitude * gauss(rng);
            out[i] = v;
        }
    };

    // Channel order is fixed so the noise stream is reproducible.
    fill(sig.ia, Phase::A, config.current_amplitude);
    fill(sig.ib, Phase::B, config.current_amplitude);
    fill(sig.ic, Phase::C, config.current_amplitude);
    fill(sig.va, Phase::A, config.voltage_amplitude);
    fill(sig.vb, Phase::B, config.voltage_amplitude);
    fill(sig.vc, Phase::C, config.voltage_amplitude);
    return sig;
}

/// Applies one fault in place on a copy of the signal:
/// involved currents are scaled and given a decaying DC offset, involved
/// voltages sag, and the mask is raised over the interval. The untouched
/// samples are preserved bit-exactly.
inline ThreePhaseSignal inject_fault(const ThreePhaseSignal& signal, const FaultSpec& spec,
                                     double current_amplitude) {
    spec.validate();
    const std::size_t n = signal.size();
    if (spec.start_sample >= n || spec.duration_samples > n - spec.start_sample)
        throw RangeError("fault interval exceeds signal length");

    ThreePhaseSignal out = signal;
    const std::size_t begin = spec.start_sample;
    const std::size_t end = begin + spec.duration_samples;
    const double dc_amp = (spec.current_scale - 1.0) * current_amplitude;

    for (Phase p : spec.phases) {
        auto& cur = out.current(p);
        for (std::size_t i = begin; i < end; ++i) {
            const double dt = static_cast<double>(i - begin) * signal.sample_interval;
            cur[i] = cur[i] * spec.current_scale + dc_amp * std::exp(-dt / spec.dc_offset_tau);
        }
    }

    if (spec.type == FaultType::LL) {
        // No ground involvement: sag the differential voltage between the two
        // phases, keeping their common mode.
        auto& u = out.voltage(spec.phases[0]);
        auto& w = out.voltage(spec.phases[1]);
        for (std::size_t i = begin; i < end; ++i) {
            const double mid = 0.5 * (u[i] + w[i]);
            u[i] = mid + spec.voltage_sag * (u[i] - mid);
            w[i] = mid + spec.voltage_sag * (w[i] - mid);
        }
    } else {
        for (Phase p : spec.phases) {
            auto& vol = out.voltage(p);
            for (std::size_t i = begin; i < end; ++i)
                vol[i] *= spec.voltage_sag;
        }
    }

    for (std::size_t i = begin; i < end; ++i)
        out.fault_mask[i] = 1;
    out.fault_specs.push_back(spec);
    return out;
}

/// Overload that estimates the peak current amplitude (for the DC offset
/// term) from the fault-free samples of the first involved phase.
inline ThreePhaseSignal inject_fault(const ThreePhaseSignal& signal, const FaultSpec& spec) {
    spec.validate();
    if (signal.size() == 0)
        throw RangeError("cannot inject a fault into an empty signal");
    const auto& cur = signal.current(spec.phases.front());
    double peak = 0.0;
    for (std::size_t i = 0; i < signal.size(); ++i)
        if (!signal.fault_mask[i])
            peak = std::max(peak, std::abs(cur[i]));
    return inject_fault(signal, spec, peak);
}

/// Clean signal with all faults injected; specs must not overlap.
inline ThreePhaseSignal generate_dataset(const SimConfig& config,
                                         const std::vector<FaultSpec>& specs) {
    for (std::size_t i = 0; i < specs.size(); ++i) {
        specs[i].validate();
        for (std::size_t j = i + 1; j < specs.size(); ++j) {
            const std::size_t ai = specs[i].start_sample, bi = ai + specs[i].duration_samples;
            const std::size_t aj = specs[j].start_sample, bj = aj + specs[j].duration_samples;
            if (ai < bj && aj < bi)
                throw FaultSpecError("fault intervals overlap");
        }
    }
    ThreePhaseSignal sig = generate_clean(config);
    for (const FaultSpec& spec : specs)
        sig = inject_fault(sig, spec, config.current_amplitude);
    return sig;
}

/// The reference scenario: AG, ABG, ABCG and AB faults of 2000 samples each,
/// separated by at least 2000 clean samples. Needs >= 17000 samples total.
inline std::vector<FaultSpec> default_fault_scenario(std::size_t total_samples) {
    constexpr std::size_t dur = 2000;
    const std::size_t starts[4] = {3000, 7000, 11000, 15000};
    if (total_samples < starts[3] + dur)
        throw ConfigError("default scenario needs at least 17000 samples");
    std::vector<FaultSpec> specs;
    specs.push_back(FaultSpec::lg(Phase::A, starts[0]));
    specs.push_back(FaultSpec::llg(Phase::A, Phase::B, starts[1]));
    specs.push_back(FaultSpec::tlg(starts[2]));
    specs.push_back(FaultSpec::ll(Phase::A, Phase::B, starts[3]));
    for (FaultSpec& s : specs)
        s.duration_samples = dur;
    return specs;
}

}  // namespace fdet
