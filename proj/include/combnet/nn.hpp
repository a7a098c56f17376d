#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "combnet/signal.hpp"

namespace combnet {

// Row-major rows x cols matrix of doubles. Rows are channels, cols are time.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> v;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c, 0.0) {}

    double at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }
    double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
};

struct Conv1dLayer {
    int c_in = 1;
    int c_out = 1;
    int kernel_len = 1;
    int stride = 1;
    std::vector<double> weight;  // c_out x c_in x kernel_len
    std::vector<double> bias;    // c_out

    double w(int co, int ci, int k) const {
        return weight[(static_cast<std::size_t>(co) * c_in + ci) * kernel_len + k];
    }
    double& w(int co, int ci, int k) {
        return weight[(static_cast<std::size_t>(co) * c_in + ci) * kernel_len + k];
    }
};

struct DenseLayer {
    int in = 0;
    int out = 0;
    std::vector<double> weight;  // out x in
    std::vector<double> bias;    // out
};

struct Conv1dGradients {
    std::vector<double> d_weight;
    std::vector<double> d_bias;
    Matrix d_input;
};

struct AdamState {
    long step = 0;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::vector<double> m;
    std::vector<double> v;
};

struct TrainConfig {
    double lr = 1e-3;
    int max_steps = 20000;
    int batch_size = 8;
    double grad_clip = 0.5;
    std::uint64_t seed = 0;
    int eval_interval = 200;
    int patience = 10;  // evaluations without val-F1 improvement before stopping
    double crop_seconds = 2.0;
};

int conv1d_output_len(int input_len, int kernel_len, int stride);

// Valid cross-correlation with stride. Throws std::invalid_argument when
// the input is shorter than the kernel.
Matrix conv1d_forward(const Matrix& x, const Conv1dLayer& layer);
Conv1dGradients conv1d_backward(const Matrix& x, const Conv1dLayer& layer,
                                const Matrix& upstream, bool need_input_grad = true);

Conv1dLayer make_conv1d(int c_in, int c_out, int kernel_len, int stride, Rng& rng);

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> x);

double elu(double x);
double elu_gradient(double x);  // d elu / dx, expressed in terms of the pre-activation
void elu_inplace(Matrix& x);

// Zero-pad columns on both sides ("same" padding helper for odd kernels).
Matrix pad_cols(const Matrix& x, int left, int right);

struct MaxPoolResult {
    Matrix values;
    std::vector<std::int64_t> argmax;  // flat index into the input row
};
MaxPoolResult maxpool1d(const Matrix& x, int window, int stride);
Matrix maxpool1d_backward(const Matrix& x, const MaxPoolResult& pooled,
                          const Matrix& upstream, int window, int stride);

struct BceResult {
    double loss = 0.0;
    Matrix grad;  // d loss / d logits
};
// Mean multi-label binary cross entropy, log-sum-exp stable form.
BceResult bce_with_logits(const Matrix& logits, const Matrix& targets);

// Standard bias-corrected Adam. Aborts with a diagnostic on NaN gradients.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const std::string& tensor_name = "params");

// Scales all gradient spans so the global L2 norm is at most threshold.
// Returns the pre-clip norm.
double clip_global_norm(std::span<std::span<double>> grads, double threshold);

// Flat binary tensor archive: text manifest (name, shape, byte offset)
// followed by little-endian f32 payload. Bit-exact round trip.
struct TensorArchive {
    struct Entry {
        std::vector<std::int64_t> shape;
        std::vector<float> data;
    };
    std::map<std::string, Entry> tensors;

    void put(const std::string& name, std::vector<std::int64_t> shape,
             std::span<const double> values);
    void put_scalar(const std::string& name, double value);
    std::vector<double> get(const std::string& name) const;
    double get_scalar(const std::string& name) const;
    bool has(const std::string& name) const { return tensors.count(name) != 0; }
};

void save_archive(const std::filesystem::path& path, const TensorArchive& archive);
TensorArchive load_archive(const std::filesystem::path& path);

}  // namespace combnet
