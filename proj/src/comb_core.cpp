#include "combnet/comb_core.hpp"

#include <cmath>
#include <stdexcept>

namespace combnet {

double CombChannelConfig::delay() const { return continuous_delay(f0_hz, sample_rate); }

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double scale_to_f0(double w, const ScalingConfig& cfg) {
    return cfg.f_min_hz * std::pow(cfg.f_max_hz / cfg.f_min_hz, sigmoid(w));
}

double scale_to_f0_gradient(double w, const ScalingConfig& cfg) {
    const double s = sigmoid(w);
    return scale_to_f0(w, cfg) * std::log(cfg.f_max_hz / cfg.f_min_hz) * s * (1.0 - s);
}

double continuous_delay(double f0_hz, double sample_rate) {
    if (f0_hz <= 0.0) {
        throw std::domain_error("continuous_delay: f0 must be positive");
    }
    return sample_rate / f0_hz;
}

double magnitude_response(const CombChannelConfig& cfg, double f_hz) {
    const double a = cfg.alpha;
    const double c = std::cos(2.0 * M_PI * f_hz / cfg.f0_hz);
    return 1.0 / std::sqrt(1.0 + a * a - 2.0 * a * c);
}

AudioSignal iir_comb(const AudioSignal& x, int delay_samples, double alpha) {
    if (delay_samples < 1) {
        throw std::domain_error("iir_comb: delay must be >= 1 sample");
    }
    AudioSignal y;
    y.sample_rate = x.sample_rate;
    y.samples.resize(x.length());
    const auto k = static_cast<std::size_t>(delay_samples);
    for (std::size_t n = 0; n < x.length(); ++n) {
        double acc = x.samples[n];
        if (n >= k) {
            acc += alpha * static_cast<double>(y.samples[n - k]);
        }
        y.samples[n] = static_cast<float>(acc);
    }
    return y;
}

FirKernel build_fir_kernel(int delay_samples, double alpha, int echo_count) {
    FirKernel kernel;
    kernel.taps.reserve(static_cast<std::size_t>(echo_count) + 1);
    kernel.taps.push_back({0, 1.0});
    double gain = 1.0;
    for (int t = 1; t <= echo_count; ++t) {
        gain *= alpha;
        kernel.taps.push_back({static_cast<std::int64_t>(t) * delay_samples, gain});
    }
    return kernel;
}

AudioSignal fir_comb_dense(const AudioSignal& x, const FirKernel& kernel) {
    AudioSignal y;
    y.sample_rate = x.sample_rate;
    y.samples.resize(x.length());
    const auto len = static_cast<std::int64_t>(x.length());
    for (std::int64_t n = 0; n < len; ++n) {
        double acc = 0.0;
        for (const auto& tap : kernel.taps) {
            const std::int64_t idx = n - tap.offset;
            if (idx < 0) break;  // offsets increase, all later reads out of range
            acc += tap.weight * static_cast<double>(x.samples[static_cast<std::size_t>(idx)]);
        }
        y.samples[static_cast<std::size_t>(n)] = static_cast<float>(acc);
    }
    return y;
}

namespace {

// out += w * shift(x, offset), causal with left zero padding
void add_shifted(std::vector<double>& out, const AudioSignal& x, std::int64_t offset,
                 double w) {
    if (w == 0.0) return;
    const auto len = static_cast<std::int64_t>(x.length());
    for (std::int64_t n = offset; n < len; ++n) {
        out[static_cast<std::size_t>(n)] +=
            w * static_cast<double>(x.samples[static_cast<std::size_t>(n - offset)]);
    }
}

AudioSignal to_signal(const std::vector<double>& acc, int sample_rate) {
    AudioSignal y;
    y.sample_rate = sample_rate;
    y.samples.resize(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
        y.samples[i] = static_cast<float>(acc[i]);
    }
    return y;
}

}  // namespace

AudioSignal interp_comb_wholekernel(const AudioSignal& x, double k_bar, double alpha,
                                    int echo_count) {
    const auto k_lo = static_cast<int>(std::floor(k_bar));
    const double beta = k_bar - std::floor(k_bar);
    std::vector<double> acc(x.length(), 0.0);
    add_shifted(acc, x, 0, 1.0);
    double gain = 1.0;
    for (int t = 1; t <= echo_count; ++t) {
        gain *= alpha;
        add_shifted(acc, x, static_cast<std::int64_t>(t) * k_lo, (1.0 - beta) * gain);
        if (beta != 0.0) {
            add_shifted(acc, x, static_cast<std::int64_t>(t) * (k_lo + 1), beta * gain);
        }
    }
    return to_signal(acc, x.sample_rate);
}

AudioSignal sparse_comb(const AudioSignal& x, double k_bar, double alpha, int echo_count) {
    std::vector<double> acc(x.length(), 0.0);
    add_shifted(acc, x, 0, 1.0);
    double gain = 1.0;
    for (int t = 1; t <= echo_count; ++t) {
        gain *= alpha;
        const double tk = static_cast<double>(t) * k_bar;
        const double fl = std::floor(tk);
        const double beta = tk - fl;
        const auto lo = static_cast<std::int64_t>(fl);
        add_shifted(acc, x, lo, (1.0 - beta) * gain);
        if (beta != 0.0) {
            add_shifted(acc, x, lo + 1, beta * gain);
        }
    }
    return to_signal(acc, x.sample_rate);
}

double sparse_comb_delay_sensitivity_at(const AudioSignal& x, double k_bar, double alpha,
                                        int echo_count, std::int64_t n) {
    // d beta(t K_bar) / d K_bar = t between integer crossings; the echo moves
    // weight from the floor tap to the ceil tap.
    const auto len = static_cast<std::int64_t>(x.length());
    auto sample = [&](std::int64_t i) -> double {
        if (i < 0 || i >= len) return 0.0;
        return static_cast<double>(x.samples[static_cast<std::size_t>(i)]);
    };
    double acc = 0.0;
    double gain = 1.0;
    for (int t = 1; t <= echo_count; ++t) {
        gain *= alpha;
        const auto lo = static_cast<std::int64_t>(std::floor(static_cast<double>(t) * k_bar));
        acc += static_cast<double>(t) * gain * (sample(n - lo - 1) - sample(n - lo));
    }
    return acc;
}

double sparse_comb_grad_delay(const AudioSignal& x, double k_bar, double alpha,
                              int echo_count, std::span<const double> upstream) {
    const auto len = static_cast<std::int64_t>(x.length());
    auto sample = [&](std::int64_t i) -> double {
        if (i < 0 || i >= len) return 0.0;
        return static_cast<double>(x.samples[static_cast<std::size_t>(i)]);
    };
    double acc = 0.0;
    double gain = 1.0;
    for (int t = 1; t <= echo_count; ++t) {
        gain *= alpha;
        const auto lo = static_cast<std::int64_t>(std::floor(static_cast<double>(t) * k_bar));
        const double scale = static_cast<double>(t) * gain;
        double dot = 0.0;
        for (std::int64_t n = 0; n < len; ++n) {
            dot += upstream[static_cast<std::size_t>(n)] *
                   (sample(n - lo - 1) - sample(n - lo));
        }
        acc += scale * dot;
    }
    return acc;
}

int discretize_for_inference(double k_bar) {
    const double fl = std::floor(k_bar);
    const double frac = k_bar - fl;
    double rounded;
    if (frac < 0.5) {
        rounded = fl;
    } else if (frac > 0.5) {
        rounded = fl + 1.0;
    } else {
        // tie: round half to even
        rounded = (std::fmod(fl, 2.0) == 0.0) ? fl : fl + 1.0;
    }
    if (rounded < 1.0) rounded = 1.0;
    return static_cast<int>(rounded);
}

}  // namespace combnet
