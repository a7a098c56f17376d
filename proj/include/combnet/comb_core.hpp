#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "combnet/signal.hpp"

namespace combnet {

// Frequency range covered by the learnable filters; f0 is mapped into
// (f_min, f_max) through a sigmoid-exponential scaling.
struct ScalingConfig {
    double f_min_hz = 200.0;
    double f_max_hz = 500.0;
};

struct CombChannelConfig {
    double f0_hz = 0.0;
    double alpha = 0.9;
    int echo_count = 10;
    int sample_rate = 16000;

    double delay() const;  // continuous delay in samples, sample_rate / f0
};

// Sparse FIR kernel: (offset, weight) taps sorted by offset.
// First tap is always (0, 1) so that convolving with the kernel keeps
// the passthrough term of the feedback recursion.
struct FirKernel {
    struct Tap {
        std::int64_t offset;
        double weight;
    };
    std::vector<Tap> taps;
};

double sigmoid(double x);

// f0 = f_min * (f_max/f_min)^sigmoid(w); strictly inside (f_min, f_max),
// monotone in w.
double scale_to_f0(double w, const ScalingConfig& cfg);

// df0/dw = f0(w) * ln(f_max/f_min) * sigmoid(w) * (1 - sigmoid(w))
double scale_to_f0_gradient(double w, const ScalingConfig& cfg);

// K_bar = sample_rate / f0. Throws std::domain_error for f0 <= 0.
double continuous_delay(double f0_hz, double sample_rate);

// Analytic gain 1 / sqrt(1 + a^2 - 2 a cos(2 pi f / f0)).
double magnitude_response(const CombChannelConfig& cfg, double f_hz);

// y[n] = x[n] + alpha * y[n - K], zero initial conditions.
// Throws std::domain_error for K < 1.
AudioSignal iir_comb(const AudioSignal& x, int delay_samples, double alpha);

// Taps (0, 1) and (t*K, alpha^t) for t = 1..echo_count.
FirKernel build_fir_kernel(int delay_samples, double alpha, int echo_count);

// Causal convolution with a sparse kernel, left zero padding, output
// length equals input length.
AudioSignal fir_comb_dense(const AudioSignal& x, const FirKernel& kernel);

// Linear interpolation of the whole kernel between floor(K_bar) and
// ceil(K_bar) with weight beta = frac(K_bar).
AudioSignal interp_comb_wholekernel(const AudioSignal& x, double k_bar, double alpha,
                                    int echo_count);

// Per-echo fractional delays (the canonical training path):
// y[n] = x[n] + sum_t (1-beta(t K_bar)) a^t x[n - floor(t K_bar)]
//                 + beta(t K_bar) a^t x[n - ceil(t K_bar)]
AudioSignal sparse_comb(const AudioSignal& x, double k_bar, double alpha, int echo_count);

// d y[n] / d K_bar at one output index (right-sided at integer t*K_bar).
double sparse_comb_delay_sensitivity_at(const AudioSignal& x, double k_bar, double alpha,
                                        int echo_count, std::int64_t n);

// <upstream, d y / d K_bar>
double sparse_comb_grad_delay(const AudioSignal& x, double k_bar, double alpha,
                              int echo_count, std::span<const double> upstream);

// Round half to even, clamped to >= 1.
int discretize_for_inference(double k_bar);

}  // namespace combnet
