#include "combnet/comb_layer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace combnet {

int pooled_frames(std::size_t input_length, const EnvelopeConfig& env) {
    if (input_length < static_cast<std::size_t>(env.pool_window)) return 0;
    return static_cast<int>((input_length - env.pool_window) / env.pool_stride) + 1;
}

FeatureMap comb_layer_forward(const AudioSignal& x, const CombBankParams& params,
                              const EnvelopeConfig& env, CombMode mode,
                              CombLayerActivations* saved) {
    const int m_channels = params.channels();
    const int frames = pooled_frames(x.length(), env);

    FeatureMap out;
    out.channels = m_channels;
    out.frames = frames;
    out.frame_rate = static_cast<double>(params.sample_rate) / env.pool_stride;
    out.values.assign(static_cast<std::size_t>(m_channels) * frames, 0.0f);

    if (saved) {
        saved->input = x;
        saved->f0.assign(m_channels, 0.0);
        saved->k_bar.assign(m_channels, 0.0);
        saved->argmax.assign(static_cast<std::size_t>(m_channels) * frames, 0);
        saved->value_at_argmax.assign(static_cast<std::size_t>(m_channels) * frames, 0.0f);
        saved->frames = frames;
    }

    std::vector<double> k_bars(m_channels);
    for (int m = 0; m < m_channels; ++m) {
        const double f0 = scale_to_f0(params.w[m], params.scaling);
        const double k_bar = continuous_delay(f0, params.sample_rate);
        if (k_bar < 1.0) {
            throw std::runtime_error("comb_layer_forward: channel " + std::to_string(m) +
                                     " has delay < 1 sample (f0=" + std::to_string(f0) + " Hz)");
        }
        k_bars[m] = k_bar;
        if (saved) {
            saved->f0[m] = f0;
            saved->k_bar[m] = k_bar;
        }
    }

#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m < m_channels; ++m) {
        AudioSignal y;
        if (mode == CombMode::training) {
            y = sparse_comb(x, k_bars[m], params.alpha, params.echo_count);
        } else {
            y = iir_comb(x, discretize_for_inference(k_bars[m]), params.alpha);
        }
        for (int t = 0; t < frames; ++t) {
            const std::size_t start = static_cast<std::size_t>(t) * env.pool_stride;
            float best = -1.0f;
            std::size_t best_n = start;
            for (std::size_t n = start; n < start + env.pool_window; ++n) {
                const float v = std::fabs(y.samples[n]);
                if (v > best) {  // earliest argmax wins ties
                    best = v;
                    best_n = n;
                }
            }
            out.at(m, t) = best;
            if (saved) {
                const std::size_t cell = static_cast<std::size_t>(m) * frames + t;
                saved->argmax[cell] = static_cast<std::int64_t>(best_n);
                saved->value_at_argmax[cell] = y.samples[best_n];
            }
        }
    }
    return out;
}

LayerGradients comb_layer_backward(const std::vector<double>& upstream,
                                   const CombLayerActivations& saved,
                                   const CombBankParams& params) {
    const int m_channels = params.channels();
    const int frames = saved.frames;
    LayerGradients grads;
    grads.d_w.assign(m_channels, 0.0);
    grads.argmax_index_map = saved.argmax;

#pragma omp parallel for schedule(dynamic)
    for (int m = 0; m < m_channels; ++m) {
        const double f0 = saved.f0[m];
        const double dk_df0 = -static_cast<double>(params.sample_rate) / (f0 * f0);
        const double df0_dw = scale_to_f0_gradient(params.w[m], params.scaling);
        double d_kbar = 0.0;
        for (int t = 0; t < frames; ++t) {
            const std::size_t cell = static_cast<std::size_t>(m) * frames + t;
            const double up = upstream[cell];
            if (up == 0.0) continue;
            const float v = saved.value_at_argmax[cell];
            const double sgn = (v > 0.0f) ? 1.0 : (v < 0.0f ? -1.0 : 0.0);
            if (sgn == 0.0) continue;
            d_kbar += up * sgn *
                      sparse_comb_delay_sensitivity_at(saved.input, saved.k_bar[m],
                                                       params.alpha, params.echo_count,
                                                       saved.argmax[cell]);
        }
        grads.d_w[m] = d_kbar * dk_df0 * df0_dw;
    }
    return grads;
}

CombBankParams init_params(int channels, const ScalingConfig& scaling, double alpha,
                           int echo_count, int sample_rate, std::uint64_t seed) {
    if (channels < 1) {
        throw std::invalid_argument("init_params: need at least one channel");
    }
    CombBankParams params;
    params.scaling = scaling;
    params.alpha = alpha;
    params.echo_count = echo_count;
    params.sample_rate = sample_rate;
    params.w.resize(channels);
    Rng rng(seed);
    for (int m = 0; m < channels; ++m) {
        params.w[m] = rng.uniform(-2.0, 2.0);
    }
    return params;
}

void save_comb_params(const std::filesystem::path& path, const CombBankParams& params) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    char buf[64];
    auto full = [&buf](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    out << "channels " << params.channels() << "\n";
    out << "f_min_hz " << full(params.scaling.f_min_hz) << "\n";
    out << "f_max_hz " << full(params.scaling.f_max_hz) << "\n";
    out << "alpha " << full(params.alpha) << "\n";
    out << "echo_count " << params.echo_count << "\n";
    out << "sample_rate_hz " << params.sample_rate << "\n";
    for (int m = 0; m < params.channels(); ++m) {
        out << "w " << m << " " << full(params.w[m]) << "\n";
    }
    // derived, for humans; regenerated on load
    for (int m = 0; m < params.channels(); ++m) {
        out << "# f0_hz " << m << " " << scale_to_f0(params.w[m], params.scaling) << "\n";
    }
}

CombBankParams load_comb_params(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    CombBankParams params;
    int channels = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "channels") {
            ss >> channels;
            params.w.assign(channels, 0.0);
        } else if (key == "f_min_hz") {
            ss >> params.scaling.f_min_hz;
        } else if (key == "f_max_hz") {
            ss >> params.scaling.f_max_hz;
        } else if (key == "alpha") {
            ss >> params.alpha;
        } else if (key == "echo_count") {
            ss >> params.echo_count;
        } else if (key == "sample_rate_hz") {
            ss >> params.sample_rate;
        } else if (key == "w") {
            int idx;
            std::string value;
            ss >> idx >> value;
            if (idx < 0 || idx >= channels) {
                throw std::runtime_error("comb params: w index out of range in " + path.string());
            }
            params.w[idx] = std::strtod(value.c_str(), nullptr);
        }
    }
    if (channels < 1) {
        throw std::runtime_error("comb params: missing channel count in " + path.string());
    }
    return params;
}

}  // namespace combnet
