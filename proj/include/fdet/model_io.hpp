#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "fdet/autoencoder.hpp"
#include "fdet/detector.hpp"
#include "fdet/errors.hpp"
#include "fdet/windowing.hpp"

namespace fdet {

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; add byte swapping for this platform");

/// Everything detection needs in one file: architecture, weights, the
/// training standardizer and, once calibrated, the threshold.
struct ModelBundle {
    AutoencoderModel model;
    Standardizer standardizer;
    std::optional<Threshold> threshold;
};

namespace detail {

constexpr char kModelMagic[4] = {'F', 'D', 'A', 'E'};
constexpr std::uint32_t kModelVersion = 1;

template <typename T>
void write_pod(std::ostream& os, const T& value) {
    os.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const char* what) {
    T value;
    is.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!is)
        throw FormatError(std::string("model file truncated while reading ") + what);
    return value;
}

}  // namespace detail

/// Binary layout (all integers and floats little-endian):
///   magic "FDAE", u32 version, u32 input_len,
///   u32 encoder layer count, u32 decoder layer count,
///   per layer: u8 kind, u8 activation, u32 in_ch, u32 out_ch,
///              u32 kernel_len, u32 stride, u32 padding, u32 output_padding,
///   f64 standardizer mean, f64 standardizer std,
///   u8 has_threshold, then if set: f64 alpha, u64 calibration_size, u8 loss kind,
///   u64 parameter count, parameters as f64 in layer order (kernels then bias).
inline void save_model(const std::string& path, const ModelBundle& bundle) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os)
        throw IoError("cannot open '" + path + "' for writing");

    os.write(detail::kModelMagic, 4);
    detail::write_pod(os, detail::kModelVersion);
    detail::write_pod(os, static_cast<std::uint32_t>(bundle.model.input_len()));
    detail::write_pod(os, static_cast<std::uint32_t>(bundle.model.encoder_layers().size()));
    detail::write_pod(os, static_cast<std::uint32_t>(bundle.model.decoder_layers().size()));

    auto write_layer = [&](const LayerConfig& l) {
        detail::write_pod(os, static_cast<std::uint8_t>(l.kind));
        detail::write_pod(os, static_cast<std::uint8_t>(l.activation));
        detail::write_pod(os, static_cast<std::uint32_t>(l.in_channels));
        detail::write_pod(os, static_cast<std::uint32_t>(l.out_channels));
        detail::write_pod(os, static_cast<std::uint32_t>(l.kernel_len));
        detail::write_pod(os, static_cast<std::uint32_t>(l.stride));
        detail::write_pod(os, static_cast<std::uint32_t>(l.padding));
        detail::write_pod(os, static_cast<std::uint32_t>(l.output_padding));
    };
    for (const auto& l : bundle.model.encoder_layers())
        write_layer(l);
    for (const auto& l : bundle.model.decoder_layers())
        write_layer(l);

    detail::write_pod(os, bundle.standardizer.mean);
    detail::write_pod(os, bundle.standardizer.std);

    detail::write_pod(os, static_cast<std::uint8_t>(bundle.threshold.has_value() ? 1 : 0));
    if (bundle.threshold) {
        detail::write_pod(os, bundle.threshold->alpha);
        detail::write_pod(os, static_cast<std::uint64_t>(bundle.threshold->calibration_size));
        detail::write_pod(os, static_cast<std::uint8_t>(bundle.threshold->loss_kind));
    }

    const auto params = bundle.model.params();
    detail::write_pod(os, static_cast<std::uint64_t>(params.size()));
    os.write(reinterpret_cast<const char*>(params.data()),
             static_cast<std::streamsize>(params.size() * sizeof(double)));
    if (!os)
        throw IoError("failed while writing '" + path + "'");
}

inline ModelBundle load_model(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw IoError("cannot open '" + path + "' for reading");

    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, detail::kModelMagic, 4) != 0)
        throw FormatError("'" + path + "' is not a model file (bad magic)");
    const auto version = detail::read_pod<std::uint32_t>(is, "version");
    if (version != detail::kModelVersion)
        throw FormatError("unsupported model format version " + std::to_string(version) +
                          " (expected " + std::to_string(detail::kModelVersion) + ")");

    const auto input_len = detail::read_pod<std::uint32_t>(is, "input length");
    const auto enc_count = detail::read_pod<std::uint32_t>(is, "encoder layer count");
    const auto dec_count = detail::read_pod<std::uint32_t>(is, "decoder layer count");
    if (enc_count > 1024 || dec_count > 1024)
        throw FormatError("implausible layer count in model file");

    auto read_layer = [&]() {
        LayerConfig l;
        l.kind = static_cast<LayerKind>(detail::read_pod<std::uint8_t>(is, "layer kind"));
        l.activation =
            static_cast<Activation>(detail::read_pod<std::uint8_t>(is, "layer activation"));
        if (l.kind != LayerKind::Conv && l.kind != LayerKind::TransposedConv)
            throw FormatError("unknown layer kind in model file");
        if (l.activation != Activation::ReLU && l.activation != Activation::Linear)
            throw FormatError("unknown activation in model file");
        l.in_channels = detail::read_pod<std::uint32_t>(is, "in_channels");
        l.out_channels = detail::read_pod<std::uint32_t>(is, "out_channels");
        l.kernel_len = detail::read_pod<std::uint32_t>(is, "kernel_len");
        l.stride = detail::read_pod<std::uint32_t>(is, "stride");
        l.padding = detail::read_pod<std::uint32_t>(is, "padding");
        l.output_padding = detail::read_pod<std::uint32_t>(is, "output_padding");
        return l;
    };
    std::vector<LayerConfig> enc, dec;
    for (std::uint32_t i = 0; i < enc_count; ++i)
        enc.push_back(read_layer());
    for (std::uint32_t i = 0; i < dec_count; ++i)
        dec.push_back(read_layer());

    Standardizer standardizer;
    standardizer.mean = detail::read_pod<double>(is, "standardizer mean");
    standardizer.std = detail::read_pod<double>(is, "standardizer std");

    std::optional<Threshold> threshold;
    if (detail::read_pod<std::uint8_t>(is, "threshold flag") != 0) {
        Threshold t;
        t.alpha = detail::read_pod<double>(is, "threshold alpha");
        t.calibration_size =
            static_cast<std::size_t>(detail::read_pod<std::uint64_t>(is, "calibration size"));
        t.loss_kind = static_cast<LossKind>(detail::read_pod<std::uint8_t>(is, "loss kind"));
        if (t.loss_kind != LossKind::MAE && t.loss_kind != LossKind::MSE)
            throw FormatError("unknown loss kind in model file");
        threshold = t;
    }

    ModelBundle bundle{AutoencoderModel(input_len, std::move(enc), std::move(dec)), standardizer,
                       threshold};

    const auto param_count = detail::read_pod<std::uint64_t>(is, "parameter count");
    if (param_count != bundle.model.params().size())
        throw FormatError("parameter count " + std::to_string(param_count) +
                          " does not match the declared architecture");
    is.read(reinterpret_cast<char*>(bundle.model.params().data()),
            static_cast<std::streamsize>(param_count * sizeof(double)));
    if (!is)
        throw FormatError("model file truncated while reading parameters");

    // Anything after the parameters means the file was not written by us.
    is.peek();
    if (!is.eof())
        throw FormatError("trailing bytes after model parameters");
    return bundle;
}

}  // namespace fdet
