#include "combnet/nn.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace combnet {

int conv1d_output_len(int input_len, int kernel_len, int stride) {
    return (input_len - kernel_len) / stride + 1;
}

Matrix conv1d_forward(const Matrix& x, const Conv1dLayer& layer) {
    if (x.rows != layer.c_in) {
        throw std::invalid_argument("conv1d_forward: channel mismatch");
    }
    if (x.cols < layer.kernel_len) {
        throw std::invalid_argument("conv1d_forward: input shorter than kernel");
    }
    const int t_out = conv1d_output_len(x.cols, layer.kernel_len, layer.stride);
    Matrix y(layer.c_out, t_out);
#pragma omp parallel for schedule(static)
    for (int co = 0; co < layer.c_out; ++co) {
        for (int to = 0; to < t_out; ++to) {
            double acc = layer.bias[co];
            const int base = to * layer.stride;
            for (int ci = 0; ci < layer.c_in; ++ci) {
                for (int k = 0; k < layer.kernel_len; ++k) {
                    acc += layer.w(co, ci, k) * x.at(ci, base + k);
                }
            }
            y.at(co, to) = acc;
        }
    }
    return y;
}

Conv1dGradients conv1d_backward(const Matrix& x, const Conv1dLayer& layer,
                                const Matrix& upstream, bool need_input_grad) {
    Conv1dGradients g;
    g.d_weight.assign(layer.weight.size(), 0.0);
    g.d_bias.assign(layer.bias.size(), 0.0);
    g.d_input = Matrix(x.rows, x.cols);
    const int t_out = upstream.cols;

#pragma omp parallel for schedule(static)
    for (int co = 0; co < layer.c_out; ++co) {
        double db = 0.0;
        for (int to = 0; to < t_out; ++to) {
            const double up = upstream.at(co, to);
            db += up;
            const int base = to * layer.stride;
            for (int ci = 0; ci < layer.c_in; ++ci) {
                for (int k = 0; k < layer.kernel_len; ++k) {
                    g.d_weight[(static_cast<std::size_t>(co) * layer.c_in + ci) *
                                   layer.kernel_len +
                               k] += up * x.at(ci, base + k);
                }
            }
        }
        g.d_bias[co] = db;
    }

    if (!need_input_grad) return g;

#pragma omp parallel for schedule(static)
    for (int ci = 0; ci < layer.c_in; ++ci) {
        for (int co = 0; co < layer.c_out; ++co) {
            for (int to = 0; to < t_out; ++to) {
                const double up = upstream.at(co, to);
                const int base = to * layer.stride;
                for (int k = 0; k < layer.kernel_len; ++k) {
                    g.d_input.at(ci, base + k) += up * layer.w(co, ci, k);
                }
            }
        }
    }
    return g;
}

Conv1dLayer make_conv1d(int c_in, int c_out, int kernel_len, int stride, Rng& rng) {
    Conv1dLayer layer;
    layer.c_in = c_in;
    layer.c_out = c_out;
    layer.kernel_len = kernel_len;
    layer.stride = stride;
    layer.weight.resize(static_cast<std::size_t>(c_out) * c_in * kernel_len);
    layer.bias.assign(c_out, 0.0);
    const double bound = std::sqrt(1.0 / (static_cast<double>(c_in) * kernel_len));
    for (auto& w : layer.weight) {
        w = rng.uniform(-bound, bound);
    }
    return layer;
}

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> x) {
    if (static_cast<int>(x.size()) != layer.in) {
        throw std::invalid_argument("dense_forward: size mismatch");
    }
    std::vector<double> y(layer.out);
    for (int o = 0; o < layer.out; ++o) {
        double acc = layer.bias[o];
        for (int i = 0; i < layer.in; ++i) {
            acc += layer.weight[static_cast<std::size_t>(o) * layer.in + i] * x[i];
        }
        y[o] = acc;
    }
    return y;
}

double elu(double x) { return x > 0.0 ? x : std::expm1(x); }

double elu_gradient(double x) { return x > 0.0 ? 1.0 : std::exp(x); }

void elu_inplace(Matrix& x) {
    for (auto& v : x.v) v = elu(v);
}

Matrix pad_cols(const Matrix& x, int left, int right) {
    Matrix y(x.rows, x.cols + left + right);
    for (int r = 0; r < x.rows; ++r) {
        for (int c = 0; c < x.cols; ++c) {
            y.at(r, c + left) = x.at(r, c);
        }
    }
    return y;
}

MaxPoolResult maxpool1d(const Matrix& x, int window, int stride) {
    const int t_out = x.cols < window ? 0 : (x.cols - window) / stride + 1;
    MaxPoolResult res;
    res.values = Matrix(x.rows, t_out);
    res.argmax.assign(static_cast<std::size_t>(x.rows) * t_out, 0);
    for (int r = 0; r < x.rows; ++r) {
        for (int to = 0; to < t_out; ++to) {
            const int base = to * stride;
            double best = x.at(r, base);
            int best_c = base;
            for (int c = base + 1; c < base + window; ++c) {
                if (x.at(r, c) > best) {
                    best = x.at(r, c);
                    best_c = c;
                }
            }
            res.values.at(r, to) = best;
            res.argmax[static_cast<std::size_t>(r) * t_out + to] = best_c;
        }
    }
    return res;
}

Matrix maxpool1d_backward(const Matrix& x, const MaxPoolResult& pooled,
                          const Matrix& upstream, int /*window*/, int /*stride*/) {
    Matrix d_input(x.rows, x.cols);
    const int t_out = pooled.values.cols;
    for (int r = 0; r < x.rows; ++r) {
        for (int to = 0; to < t_out; ++to) {
            const auto c = pooled.argmax[static_cast<std::size_t>(r) * t_out + to];
            d_input.at(r, static_cast<int>(c)) += upstream.at(r, to);
        }
    }
    return d_input;
}

BceResult bce_with_logits(const Matrix& logits, const Matrix& targets) {
    if (logits.rows != targets.rows || logits.cols != targets.cols) {
        throw std::invalid_argument("bce_with_logits: shape mismatch");
    }
    BceResult res;
    res.grad = Matrix(logits.rows, logits.cols);
    const std::size_t n = logits.v.size();
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double z = logits.v[i];
        const double y = targets.v[i];
        // max(z,0) - z*y + log(1 + exp(-|z|))
        acc += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::fabs(z)));
        const double s = 1.0 / (1.0 + std::exp(-z));
        res.grad.v[i] = (s - y) / static_cast<double>(n);
    }
    res.loss = acc / static_cast<double>(n);
    return res;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state,
               const std::string& tensor_name) {
    if (params.size() != grads.size()) {
        throw std::invalid_argument("adam_step: size mismatch for " + tensor_name);
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    for (const double g : grads) {
        if (std::isnan(g)) {
            throw std::runtime_error("adam_step: NaN gradient in tensor " + tensor_name);
        }
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

double clip_global_norm(std::span<std::span<double>> grads, double threshold) {
    if (threshold <= 0.0) {
        throw std::invalid_argument("clip_global_norm: threshold must be positive");
    }
    double sq = 0.0;
    for (const auto& g : grads) {
        for (const double v : g) sq += v * v;
    }
    const double norm = std::sqrt(sq);
    if (norm > threshold) {
        const double scale = threshold / norm;
        for (auto& g : grads) {
            for (double& v : g) v *= scale;
        }
    }
    return norm;
}

void TensorArchive::put(const std::string& name, std::vector<std::int64_t> shape,
                        std::span<const double> values) {
    Entry e;
    e.shape = std::move(shape);
    e.data.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        e.data[i] = static_cast<float>(values[i]);
    }
    tensors[name] = std::move(e);
}

void TensorArchive::put_scalar(const std::string& name, double value) {
    put(name, {1}, std::span<const double>(&value, 1));
}

std::vector<double> TensorArchive::get(const std::string& name) const {
    const auto it = tensors.find(name);
    if (it == tensors.end()) {
        throw std::runtime_error("archive: missing tensor " + name);
    }
    return {it->second.data.begin(), it->second.data.end()};
}

double TensorArchive::get_scalar(const std::string& name) const {
    const auto v = get(name);
    if (v.size() != 1) {
        throw std::runtime_error("archive: " + name + " is not a scalar");
    }
    return v[0];
}

void save_archive(const std::filesystem::path& path, const TensorArchive& archive) {
    std::ostringstream manifest;
    std::int64_t offset = 0;
    for (const auto& [name, entry] : archive.tensors) {
        manifest << name;
        for (const auto d : entry.shape) manifest << " " << d;
        manifest << " @" << offset << "\n";
        offset += static_cast<std::int64_t>(entry.data.size() * sizeof(float));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    const std::string m = manifest.str();
    const std::uint64_t mlen = m.size();
    out << "CMBT0001\n";
    out.write(reinterpret_cast<const char*>(&mlen), sizeof(mlen));
    out.write(m.data(), static_cast<std::streamsize>(m.size()));
    for (const auto& [name, entry] : archive.tensors) {
        out.write(reinterpret_cast<const char*>(entry.data.data()),
                  static_cast<std::streamsize>(entry.data.size() * sizeof(float)));
    }
}

TensorArchive load_archive(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string magic(9, '\0');
    in.read(magic.data(), 9);
    if (magic != "CMBT0001\n") {
        throw std::runtime_error(path.string() + " is not a combnet tensor archive");
    }
    std::uint64_t mlen = 0;
    in.read(reinterpret_cast<char*>(&mlen), sizeof(mlen));
    std::string manifest(mlen, '\0');
    in.read(manifest.data(), static_cast<std::streamsize>(mlen));
    if (!in) {
        throw std::runtime_error(path.string() + ": truncated manifest");
    }

    TensorArchive archive;
    std::istringstream ms(manifest);
    std::string line;
    struct Pending {
        std::string name;
        std::int64_t offset;
    };
    std::vector<Pending> order;
    while (std::getline(ms, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string name;
        ls >> name;
        TensorArchive::Entry entry;
        std::string tok;
        std::int64_t offset = -1;
        while (ls >> tok) {
            if (tok[0] == '@') {
                offset = std::stoll(tok.substr(1));
            } else {
                entry.shape.push_back(std::stoll(tok));
            }
        }
        std::int64_t count = 1;
        for (const auto d : entry.shape) count *= d;
        entry.data.resize(static_cast<std::size_t>(count));
        archive.tensors[name] = std::move(entry);
        order.push_back({name, offset});
    }
    const auto payload_start = in.tellg();
    for (const auto& p : order) {
        auto& entry = archive.tensors[p.name];
        in.seekg(payload_start + static_cast<std::streamoff>(p.offset));
        in.read(reinterpret_cast<char*>(entry.data.data()),
                static_cast<std::streamsize>(entry.data.size() * sizeof(float)));
        if (!in) {
            throw std::runtime_error(path.string() + ": truncated payload for " + p.name);
        }
    }
    return archive;
}

}  // namespace combnet
