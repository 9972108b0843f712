#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fdet/errors.hpp"
#include "fdet/windowing.hpp"

namespace fdet {

enum class Activation : std::uint8_t { ReLU = 0, Linear = 1 };
enum class LossKind : std::uint8_t { MAE = 0, MSE = 1 };
enum class LayerKind : std::uint8_t { Conv = 0, TransposedConv = 1 };

/// One 1-D layer. Conv kernels are laid out [out][in][k], transposed-conv
/// kernels [in][out][k]; biases follow per output channel.
struct LayerConfig {
    LayerKind kind = LayerKind::Conv;
    std::size_t in_channels = 1;
    std::size_t out_channels = 1;
    std::size_t kernel_len = 3;
    std::size_t stride = 1;
    std::size_t padding = 0;
    std::size_t output_padding = 0;  // transposed layers only
    Activation activation = Activation::ReLU;

    static LayerConfig conv(std::size_t in_ch, std::size_t out_ch, std::size_t k,
                            std::size_t stride, std::size_t padding, Activation act) {
        return LayerConfig{LayerKind::Conv, in_ch, out_ch, k, stride, padding, 0, act};
    }
    static LayerConfig tconv(std::size_t in_ch, std::size_t out_ch, std::size_t k,
                             std::size_t stride, std::size_t padding, std::size_t out_pad,
                             Activation act) {
        return LayerConfig{LayerKind::TransposedConv, in_ch,  out_ch, k,
                           stride,                    padding, out_pad, act};
    }

    void validate() const {
        if (in_channels == 0 || out_channels == 0)
            throw ShapeError("layer channel counts must be positive");
        if (kernel_len == 0 || stride == 0)
            throw ShapeError("kernel length and stride must be positive");
        if (kind == LayerKind::Conv && output_padding != 0)
            throw ShapeError("output_padding applies only to transposed layers");
        if (kind == LayerKind::TransposedConv && output_padding >= stride)
            throw ShapeError("output_padding must be smaller than the stride");
    }

    std::size_t output_len(std::size_t input_len) const {
        if (kind == LayerKind::Conv) {
            if (input_len + 2 * padding < kernel_len)
                throw ShapeError("convolution input shorter than the kernel");
            return (input_len + 2 * padding - kernel_len) / stride + 1;
        }
        const std::size_t grown = (input_len - 1) * stride + kernel_len + output_padding;
        if (grown < 2 * padding + 1)
            throw ShapeError("transposed convolution output length would be non-positive");
        return grown - 2 * padding;
    }

    std::size_t weight_count() const { return in_channels * out_channels * kernel_len; }
    std::size_t param_count() const { return weight_count() + out_channels; }

    bool operator==(const LayerConfig&) const = default;
};

/// Convolutional autoencoder with a flat parameter store. The layer chain is
/// validated once at construction: channel counts must link up, the decoder
/// must land exactly on the input length, and the bottleneck must be strictly
/// smaller than the input (otherwise the model could pass anomalies through).
class AutoencoderModel {
public:
    struct Slot {
        LayerConfig cfg;
        std::size_t input_len = 0;
        std::size_t output_len = 0;
        std::size_t weight_offset = 0;
        std::size_t bias_offset = 0;
    };

    AutoencoderModel(std::size_t input_len, std::vector<LayerConfig> encoder,
                     std::vector<LayerConfig> decoder)
        : input_len_(input_len), encoder_(std::move(encoder)), decoder_(std::move(decoder)) {
        if (input_len_ == 0)
            throw ShapeError("input length must be positive");
        if (encoder_.empty() || decoder_.empty())
            throw ShapeError("encoder and decoder each need at least one layer");
        for (const auto& l : encoder_) {
            l.validate();
            if (l.kind != LayerKind::Conv)
                throw ShapeError("encoder layers must be convolutions");
        }
        for (const auto& l : decoder_) {
            l.validate();
            if (l.kind != LayerKind::TransposedConv)
                throw ShapeError("decoder layers must be transposed convolutions");
        }
        if (encoder_.front().in_channels != 1 || decoder_.back().out_channels != 1)
            throw ShapeError("model must map one channel to one channel");

        std::size_t len = input_len_;
        std::size_t channels = 1;
        std::size_t offset = 0;
        auto chain = [&](const LayerConfig& cfg) {
            if (cfg.in_channels != channels)
                throw ShapeError("layer input channels do not match the previous layer");
            Slot s;
            s.cfg = cfg;
            s.input_len = len;
            s.output_len = cfg.output_len(len);
            s.weight_offset = offset;
            s.bias_offset = offset + cfg.weight_count();
            offset += cfg.param_count();
            len = s.output_len;
            channels = cfg.out_channels;
            slots_.push_back(s);
        };
        for (const auto& l : encoder_)
            chain(l);
        latent_channels_ = channels;
        latent_len_ = len;
        if (latent_channels_ * latent_len_ >= input_len_)
            throw ConfigError("latent size " + std::to_string(latent_channels_ * latent_len_) +
                              " does not compress input of length " + std::to_string(input_len_));
        for (const auto& l : decoder_)
            chain(l);
        if (len != input_len_ || channels != 1)
            throw ShapeError("decoder output length " + std::to_string(len) +
                             " does not reproduce input length " + std::to_string(input_len_));
        params_.assign(offset, 0.0);
    }

    /// Reference architecture: two stride-2 ReLU conv layers into a
    /// three-channel bottleneck, mirrored by transposed convolutions.
    static AutoencoderModel standard(std::size_t input_len) {
        std::vector<LayerConfig> enc{
            LayerConfig::conv(1, 32, 7, 2, 3, Activation::ReLU),
            LayerConfig::conv(32, 3, 7, 2, 3, Activation::ReLU),
        };
        return AutoencoderModel(input_len, enc, mirror_decoder(enc, input_len));
    }

    /// Builds the transposed mirror of an encoder, choosing each
    /// output_padding so the length chain retraces the encoder exactly.
    static std::vector<LayerConfig> mirror_decoder(const std::vector<LayerConfig>& encoder,
                                                   std::size_t input_len) {
        std::vector<std::size_t> lens{input_len};
        for (const auto& l : encoder)
            lens.push_back(l.output_len(lens.back()));
        std::vector<LayerConfig> decoder;
        for (std::size_t i = encoder.size(); i-- > 0;) {
            const LayerConfig& e = encoder[i];
            const std::size_t in_len = lens[i + 1];
            const std::size_t target = lens[i];
            const std::size_t base = (in_len - 1) * e.stride + e.kernel_len;
            if (base < 2 * e.padding || target < base - 2 * e.padding ||
                target - (base - 2 * e.padding) >= e.stride)
                throw ShapeError("encoder layer cannot be mirrored to the target length");
            const std::size_t out_pad = target - (base - 2 * e.padding);
            const Activation act = (i == 0) ? Activation::Linear : Activation::ReLU;
            decoder.push_back(LayerConfig::tconv(e.out_channels, e.in_channels, e.kernel_len,
                                                 e.stride, e.padding, out_pad, act));
        }
        return decoder;
    }

    /// Glorot-uniform kernels, zero biases; deterministic per seed.
    void init_weights(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        for (const Slot& s : slots_) {
            const double fan_in = static_cast<double>(s.cfg.in_channels * s.cfg.kernel_len);
            const double fan_out = static_cast<double>(s.cfg.out_channels * s.cfg.kernel_len);
            const double limit = std::sqrt(6.0 / (fan_in + fan_out));
            std::uniform_real_distribution<double> u(-limit, limit);
            for (std::size_t i = 0; i < s.cfg.weight_count(); ++i)
                params_[s.weight_offset + i] = u(rng);
            for (std::size_t i = 0; i < s.cfg.out_channels; ++i)
                params_[s.bias_offset + i] = 0.0;
        }
    }

    std::size_t input_len() const { return input_len_; }
    std::size_t latent_size() const { return latent_channels_ * latent_len_; }
    const std::vector<LayerConfig>& encoder_layers() const { return encoder_; }
    const std::vector<LayerConfig>& decoder_layers() const { return decoder_; }
    const std::vector<Slot>& slots() const { return slots_; }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

private:
    std::size_t input_len_;
    std::vector<LayerConfig> encoder_, decoder_;
    std::vector<Slot> slots_;
    std::vector<double> params_;
    std::size_t latent_channels_ = 0, latent_len_ = 0;
};

/// Applies a single layer to a [in_channels x input_len] feature map.
/// Mostly a diagnostic surface; the model path reuses the same kernels.
std::vector<double> layer_forward(const LayerConfig& cfg, std::span<const double> layer_params,
                                  std::span<const double> input, std::size_t input_len);

namespace detail {

inline void apply_activation(Activation act, double* z, std::size_t n) {
    if (act == Activation::ReLU)
        for (std::size_t i = 0; i < n; ++i)
            z[i] = z[i] > 0.0 ? z[i] : 0.0;
}

// dL/dz = dL/dy * act'(z); ReLU derivative at 0 taken as 0.
inline void activation_backward(Activation act, const double* z, double* d, std::size_t n) {
    if (act == Activation::ReLU)
        for (std::size_t i = 0; i < n; ++i)
            if (!(z[i] > 0.0))
                d[i] = 0.0;
}

// Zero-pads each channel row of x into buf ([C x (len + 2*pad)]).
inline void fill_padded(const double* x, std::size_t channels, std::size_t len, std::size_t pad,
                        std::vector<double>& buf) {
    const std::size_t padded = len + 2 * pad;
    buf.assign(channels * padded, 0.0);
    for (std::size_t c = 0; c < channels; ++c)
        std::memcpy(buf.data() + c * padded + pad, x + c * len, len * sizeof(double));
}

inline void conv_forward(const AutoencoderModel::Slot& s, std::span<const double> params,
                         const double* x, double* z, std::vector<double>& pad_buf) {
    const LayerConfig& c = s.cfg;
    const std::size_t padded = s.input_len + 2 * c.padding;
    fill_padded(x, c.in_channels, s.input_len, c.padding, pad_buf);
    const double* w_all = params.data() + s.weight_offset;
    const double* bias = params.data() + s.bias_offset;
    for (std::size_t o = 0; o < c.out_channels; ++o) {
        double* zrow = z + o * s.output_len;
        for (std::size_t j = 0; j < s.output_len; ++j)
            zrow[j] = bias[o];
        for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
            const double* w = w_all + (o * c.in_channels + ci) * c.kernel_len;
            const double* row = pad_buf.data() + ci * padded;
            for (std::size_t j = 0; j < s.output_len; ++j) {
                const double* src = row + j * c.stride;
                double acc = 0.0;
                for (std::size_t k = 0; k < c.kernel_len; ++k)
                    acc += w[k] * src[k];
                zrow[j] += acc;
            }
        }
    }
}

inline void tconv_forward(const AutoencoderModel::Slot& s, std::span<const double> params,
                          const double* x, double* z, std::vector<double>& acc_buf) {
    const LayerConfig& c = s.cfg;
    const std::size_t grown = (s.input_len - 1) * c.stride + c.kernel_len;
    acc_buf.assign(c.out_channels * grown, 0.0);
    const double* w_all = params.data() + s.weight_offset;
    const double* bias = params.data() + s.bias_offset;
    for (std::size_t o = 0; o < c.out_channels; ++o) {
        double* arow = acc_buf.data() + o * grown;
        for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
            const double* w = w_all + (ci * c.out_channels + o) * c.kernel_len;
            const double* xrow = x + ci * s.input_len;
            for (std::size_t j = 0; j < s.input_len; ++j) {
                const double xv = xrow[j];
                double* dst = arow + j * c.stride;
                for (std::size_t k = 0; k < c.kernel_len; ++k)
                    dst[k] += w[k] * xv;
            }
        }
        double* zrow = z + o * s.output_len;
        for (std::size_t m = 0; m < s.output_len; ++m) {
            const std::size_t idx = m + c.padding;
            zrow[m] = (idx < grown ? arow[idx] : 0.0) + bias[o];
        }
    }
}

inline void conv_backward(const AutoencoderModel::Slot& s, std::span<const double> params,
                          const double* x, const double* dz, double* dx, double* grad,
                          std::vector<double>& pad_buf, std::vector<double>& dpad_buf) {
    const LayerConfig& c = s.cfg;
    const std::size_t padded = s.input_len + 2 * c.padding;
    fill_padded(x, c.in_channels, s.input_len, c.padding, pad_buf);
    dpad_buf.assign(c.in_channels * padded, 0.0);
    const double* w_all = params.data() + s.weight_offset;
    double* dw_all = grad + s.weight_offset;
    double* db = grad + s.bias_offset;
    for (std::size_t o = 0; o < c.out_channels; ++o) {
        const double* dzrow = dz + o * s.output_len;
        for (std::size_t j = 0; j < s.output_len; ++j)
            db[o] += dzrow[j];
        for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
            const double* w = w_all + (o * c.in_channels + ci) * c.kernel_len;
            double* dw = dw_all + (o * c.in_channels + ci) * c.kernel_len;
            const double* row = pad_buf.data() + ci * padded;
            double* drow = dpad_buf.data() + ci * padded;
            for (std::size_t j = 0; j < s.output_len; ++j) {
                const double d = dzrow[j];
                if (d == 0.0)
                    continue;
                const std::size_t base = j * c.stride;
                for (std::size_t k = 0; k < c.kernel_len; ++k) {
                    dw[k] += d * row[base + k];
                    drow[base + k] += d * w[k];
                }
            }
        }
    }
    if (dx)
        for (std::size_t ci = 0; ci < c.in_channels; ++ci)
            std::memcpy(dx + ci * s.input_len,
                        dpad_buf.data() + ci * padded + c.padding,
                        s.input_len * sizeof(double));
}

inline void tconv_backward(const AutoencoderModel::Slot& s, std::span<const double> params,
                           const double* x, const double* dz, double* dx, double* grad,
                           std::vector<double>& dacc_buf) {
    const LayerConfig& c = s.cfg;
    const std::size_t grown = (s.input_len - 1) * c.stride + c.kernel_len;
    dacc_buf.assign(c.out_channels * grown, 0.0);
    double* db = grad + s.bias_offset;
    for (std::size_t o = 0; o < c.out_channels; ++o) {
        const double* dzrow = dz + o * s.output_len;
        double* darow = dacc_buf.data() + o * grown;
        for (std::size_t m = 0; m < s.output_len; ++m) {
            db[o] += dzrow[m];
            const std::size_t idx = m + c.padding;
            if (idx < grown)
                darow[idx] = dzrow[m];
        }
    }
    const double* w_all = params.data() + s.weight_offset;
    double* dw_all = grad + s.weight_offset;
    if (dx)
        std::memset(dx, 0, c.in_channels * s.input_len * sizeof(double));
    for (std::size_t ci = 0; ci < c.in_channels; ++ci) {
        const double* xrow = x + ci * s.input_len;
        double* dxrow = dx ? dx + ci * s.input_len : nullptr;
        for (std::size_t o = 0; o < c.out_channels; ++o) {
            const double* w = w_all + (ci * c.out_channels + o) * c.kernel_len;
            double* dw = dw_all + (ci * c.out_channels + o) * c.kernel_len;
            const double* darow = dacc_buf.data() + o * grown;
            for (std::size_t j = 0; j < s.input_len; ++j) {
                const double* dslice = darow + j * c.stride;
                const double xv = xrow[j];
                double acc = 0.0;
                for (std::size_t k = 0; k < c.kernel_len; ++k) {
                    dw[k] += dslice[k] * xv;
                    acc += dslice[k] * w[k];
                }
                if (dxrow)
                    dxrow[j] += acc;
            }
        }
    }
}

}  // namespace detail

/// Reusable buffers for a forward/backward pass; one per thread of control.
struct Workspace {
    std::vector<std::vector<double>> acts;     // acts[l] = input of layer l; back() = output
    std::vector<std::vector<double>> preacts;  // preacts[l] = z of layer l
    std::vector<double> pad, dpad, dacc, da, db_buf;

    void prepare(const AutoencoderModel& m) {
        const auto& slots = m.slots();
        acts.resize(slots.size() + 1);
        preacts.resize(slots.size());
        acts[0].resize(m.input_len());
        std::size_t max_feat = m.input_len();
        for (std::size_t l = 0; l < slots.size(); ++l) {
            const std::size_t n = slots[l].cfg.out_channels * slots[l].output_len;
            preacts[l].resize(n);
            acts[l + 1].resize(n);
            max_feat = std::max(max_feat, n);
            max_feat = std::max(max_feat, slots[l].cfg.in_channels * slots[l].input_len);
        }
        da.resize(max_feat);
        db_buf.resize(max_feat);
    }

    bool matches(const AutoencoderModel& m) const {
        const auto& slots = m.slots();
        if (acts.size() != slots.size() + 1 || acts[0].size() != m.input_len())
            return false;
        for (std::size_t l = 0; l < slots.size(); ++l)
            if (preacts[l].size() != slots[l].cfg.out_channels * slots[l].output_len)
                return false;
        return true;
    }
};

/// Runs the full encoder/decoder chain; reconstruction lands in ws.acts.back().
inline std::span<const double> forward_cached(const AutoencoderModel& m,
                                              std::span<const double> window, Workspace& ws) {
    if (window.size() != m.input_len())
        throw ShapeError("window length does not match the model input length");
    if (!ws.matches(m))
        ws.prepare(m);
    std::memcpy(ws.acts[0].data(), window.data(), window.size() * sizeof(double));
    const auto& slots = m.slots();
    for (std::size_t l = 0; l < slots.size(); ++l) {
        const auto& s = slots[l];
        double* z = ws.preacts[l].data();
        if (s.cfg.kind == LayerKind::Conv)
            detail::conv_forward(s, m.params(), ws.acts[l].data(), z, ws.pad);
        else
            detail::tconv_forward(s, m.params(), ws.acts[l].data(), z, ws.dacc);
        std::memcpy(ws.acts[l + 1].data(), z, ws.preacts[l].size() * sizeof(double));
        detail::apply_activation(s.cfg.activation, ws.acts[l + 1].data(), ws.preacts[l].size());
    }
    return ws.acts.back();
}

inline std::vector<double> forward(const AutoencoderModel& m, std::span<const double> window) {
    Workspace ws;
    auto out = forward_cached(m, window, ws);
    return {out.begin(), out.end()};
}

inline std::vector<double> layer_forward(const LayerConfig& cfg,
                                         std::span<const double> layer_params,
                                         std::span<const double> input, std::size_t input_len) {
    cfg.validate();
    if (layer_params.size() != cfg.param_count())
        throw ShapeError("layer parameter count mismatch");
    if (input.size() != cfg.in_channels * input_len)
        throw ShapeError("layer input size mismatch");
    AutoencoderModel::Slot s;
    s.cfg = cfg;
    s.input_len = input_len;
    s.output_len = cfg.output_len(input_len);
    s.weight_offset = 0;
    s.bias_offset = cfg.weight_count();
    std::vector<double> z(cfg.out_channels * s.output_len);
    std::vector<double> scratch;
    if (cfg.kind == LayerKind::Conv)
        detail::conv_forward(s, layer_params, input.data(), z.data(), scratch);
    else
        detail::tconv_forward(s, layer_params, input.data(), z.data(), scratch);
    detail::apply_activation(cfg.activation, z.data(), z.size());
    return z;
}

inline double loss(std::span<const double> reconstruction, std::span<const double> target,
                   LossKind kind) {
    if (reconstruction.size() != target.size())
        throw ShapeError("reconstruction and target lengths differ");
    if (reconstruction.empty())
        throw ShapeError("loss of empty vectors is undefined");
    double acc = 0.0;
    if (kind == LossKind::MAE) {
        for (std::size_t i = 0; i < target.size(); ++i)
            acc += std::abs(reconstruction[i] - target[i]);
    } else {
        for (std::size_t i = 0; i < target.size(); ++i) {
            const double r = reconstruction[i] - target[i];
            acc += r * r;
        }
    }
    return acc / static_cast<double>(target.size());
}

/// Backpropagates the reconstruction loss of one window; parameter gradients
/// are ADDED to grad (callers accumulate over a batch). Requires a preceding
/// forward_cached on the same workspace. Returns the loss.
inline double backward_cached(const AutoencoderModel& m, std::span<const double> target,
                              LossKind kind, Workspace& ws, std::span<double> grad) {
    if (grad.size() != m.params().size())
        throw ShapeError("gradient buffer does not match the parameter count");
    if (!ws.matches(m))
        throw ShapeError("workspace does not hold a forward pass of this model");
    const std::span<const double> recon = ws.acts.back();
    const double loss_value = loss(recon, target, kind);

    const double inv_n = 1.0 / static_cast<double>(target.size());
    double* d = ws.da.data();  // dL/d(activation output) of the current layer
    for (std::size_t i = 0; i < target.size(); ++i) {
        const double r = recon[i] - target[i];
        if (kind == LossKind::MAE)
            d[i] = r > 0.0 ? inv_n : (r < 0.0 ? -inv_n : 0.0);
        else
            d[i] = 2.0 * r * inv_n;
    }

    const auto& slots = m.slots();
    double* d_in = ws.db_buf.data();
    for (std::size_t l = slots.size(); l-- > 0;) {
        const auto& s = slots[l];
        detail::activation_backward(s.cfg.activation, ws.preacts[l].data(), d,
                                    ws.preacts[l].size());
        double* dx = (l == 0) ? nullptr : d_in;
        if (s.cfg.kind == LayerKind::Conv)
            detail::conv_backward(s, m.params(), ws.acts[l].data(), d, dx, grad.data(), ws.pad,
                                  ws.dpad);
        else
            detail::tconv_backward(s, m.params(), ws.acts[l].data(), d, dx, grad.data(), ws.dacc);
        std::swap(d, d_in);
    }
    return loss_value;
}

/// Gradient of the reconstruction loss of `window` against itself,
/// in flat parameter order.
inline std::vector<double> backward(const AutoencoderModel& m, std::span<const double> window,
                                    LossKind kind) {
    Workspace ws;
    forward_cached(m, window, ws);
    std::vector<double> grad(m.params().size(), 0.0);
    backward_cached(m, window, kind, ws, grad);
    return grad;
}

inline double reconstruction_loss(const AutoencoderModel& m, std::span<const double> window,
                                  LossKind kind) {
    Workspace ws;
    return loss(forward_cached(m, window, ws), window, kind);
}

/// Per-window reconstruction losses over a whole window set.
inline std::vector<double> window_losses(const AutoencoderModel& m, const WindowSet& windows,
                                         LossKind kind) {
    Workspace ws;
    ws.prepare(m);
    std::vector<double> out(windows.count);
    for (std::size_t w = 0; w < windows.count; ++w)
        out[w] = loss(forward_cached(m, windows.window(w), ws), windows.window(w), kind);
    return out;
}

}  // namespace fdet
