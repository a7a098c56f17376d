#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "combnet/comb_core.hpp"
#include "combnet/signal.hpp"

namespace combnet {

// Learnable state of a layer is exactly the M values of w.
struct CombBankParams {
    std::vector<double> w;
    ScalingConfig scaling;
    double alpha = 0.9;
    int echo_count = 10;
    int sample_rate = 16000;

    int channels() const { return static_cast<int>(w.size()); }
};

struct EnvelopeConfig {
    int pool_window = 1024;
    int pool_stride = 512;
};

// M x T' envelope matrix, row-major.
struct FeatureMap {
    int channels = 0;
    int frames = 0;
    std::vector<float> values;
    double frame_rate = 0.0;

    float at(int m, int t) const { return values[static_cast<std::size_t>(m) * frames + t]; }
    float& at(int m, int t) { return values[static_cast<std::size_t>(m) * frames + t]; }
};

enum class CombMode { training, inference };

// Per-call state saved by the training-mode forward for the backward pass.
struct CombLayerActivations {
    AudioSignal input;
    std::vector<double> f0;     // per channel
    std::vector<double> k_bar;  // per channel
    std::vector<std::int64_t> argmax;   // M x T', sample index of the pooled max
    std::vector<float> value_at_argmax; // signed filter output there
    int frames = 0;
};

struct LayerGradients {
    std::vector<double> d_w;
    std::vector<std::int64_t> argmax_index_map;  // M x T'
};

int pooled_frames(std::size_t input_length, const EnvelopeConfig& env);

// filter -> abs -> max pool. Training mode runs sparse_comb with continuous
// delays; inference mode discretizes and runs the recursion. One channel's
// response is materialized at a time; the full M x T response never is.
FeatureMap comb_layer_forward(const AudioSignal& x, const CombBankParams& params,
                              const EnvelopeConfig& env, CombMode mode,
                              CombLayerActivations* saved = nullptr);

// d loss / d w via argmax routing, sign(y), delay sensitivity, and the
// chain d K_bar/d f0 = -fs/f0^2, d f0/d w from the scaling function.
LayerGradients comb_layer_backward(const std::vector<double>& upstream,
                                   const CombLayerActivations& saved,
                                   const CombBankParams& params);

// w ~ uniform [-2, 2], i.i.d., deterministic per seed.
CombBankParams init_params(int channels, const ScalingConfig& scaling, double alpha,
                           int echo_count, int sample_rate, std::uint64_t seed);

// Flat key-value text checkpoint; derived f0 values are informational and
// regenerated on load.
void save_comb_params(const std::filesystem::path& path, const CombBankParams& params);
CombBankParams load_comb_params(const std::filesystem::path& path);

}  // namespace combnet
