#include "combnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace combnet {

long CostReport::total_params() const {
    long total = 0;
    for (const auto& l : layers) total += l.params;
    return total;
}

double CostReport::total_macs_per_sample() const {
    double total = 0.0;
    for (const auto& l : layers) total += l.macs_per_sample;
    return total;
}

CostReport count_costs(const ModelSpec& spec) {
    CostReport report;
    const int c = spec.channels;
    const double frame_div = spec.pool_stride;  // later layers run once per pooled frame
    if (spec.frontend == Frontend::comb) {
        // recursive inference: one MAC per output sample per channel
        report.layers.push_back({"comb", c, static_cast<double>(c)});
    } else {
        report.layers.push_back(
            {"conv1", static_cast<long>(c) * (spec.conv_front_len + 1),
             static_cast<double>(c) * spec.conv_front_len});
    }
    report.layers.push_back(
        {"conv2", static_cast<long>(c) * (c * spec.conv_len + 1),
         static_cast<double>(c) * c * spec.conv_len / frame_div});
    report.layers.push_back(
        {"conv3", static_cast<long>(kNumPitchClasses) * (c * spec.conv_len + 1),
         static_cast<double>(kNumPitchClasses) * c * spec.conv_len / frame_div});
    return report;
}

Model init_model(const ModelSpec& spec, std::uint64_t seed) {
    Model model;
    model.spec = spec;
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    if (spec.frontend == Frontend::comb) {
        model.comb = init_params(spec.channels, spec.scaling, spec.alpha, spec.echo_count,
                                 spec.sample_rate, seed);
    } else {
        model.conv_front = make_conv1d(1, spec.channels, spec.conv_front_len, 1, rng);
    }
    model.conv2 = make_conv1d(spec.channels, spec.channels, spec.conv_len, 1, rng);
    model.conv3 = make_conv1d(spec.channels, kNumPitchClasses, spec.conv_len, 1, rng);
    return model;
}

namespace {

Matrix featuremap_to_matrix(const FeatureMap& fm) {
    Matrix m(fm.channels, fm.frames);
    for (std::size_t i = 0; i < fm.values.size(); ++i) {
        m.v[i] = static_cast<double>(fm.values[i]);
    }
    return m;
}

Matrix unpad_cols(const Matrix& x, int left, int right) {
    Matrix y(x.rows, x.cols - left - right);
    for (int r = 0; r < x.rows; ++r) {
        for (int c = 0; c < y.cols; ++c) {
            y.at(r, c) = x.at(r, c + left);
        }
    }
    return y;
}

}  // namespace

Matrix model_forward(const Model& model, const AudioSignal& x, CombMode mode,
                     ForwardCache* cache) {
    const auto& spec = model.spec;
    const int half = spec.conv_len / 2;
    ForwardCache local;
    ForwardCache& c = cache ? *cache : local;

    if (spec.frontend == Frontend::comb) {
        EnvelopeConfig env{spec.pool_window, spec.pool_stride};
        const auto fm = comb_layer_forward(x, model.comb, env, mode,
                                           cache ? &c.comb_act : nullptr);
        c.features = featuremap_to_matrix(fm);
    } else {
        Matrix raw(1, static_cast<int>(x.length()));
        for (std::size_t i = 0; i < x.length(); ++i) {
            raw.v[i] = static_cast<double>(x.samples[i]);
        }
        const int fhalf = spec.conv_front_len / 2;
        c.x_pad = pad_cols(raw, fhalf, fhalf);
        c.z1 = conv1d_forward(c.x_pad, model.conv_front);
        Matrix a1 = c.z1;
        elu_inplace(a1);
        c.pool = maxpool1d(a1, spec.pool_window, spec.pool_stride);
        c.features = c.pool.values;
    }

    c.f_pad = pad_cols(c.features, half, half);
    c.z2 = conv1d_forward(c.f_pad, model.conv2);
    Matrix a2 = c.z2;
    elu_inplace(a2);
    c.a2_pad = pad_cols(a2, half, half);
    return conv1d_forward(c.a2_pad, model.conv3);
}

void ModelGradients::accumulate(const ModelGradients& other) {
    auto add = [](std::vector<double>& a, const std::vector<double>& b) {
        if (a.empty()) {
            a = b;
            return;
        }
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    };
    add(comb_w, other.comb_w);
    add(conv_front_weight, other.conv_front_weight);
    add(conv_front_bias, other.conv_front_bias);
    add(conv2_weight, other.conv2_weight);
    add(conv2_bias, other.conv2_bias);
    add(conv3_weight, other.conv3_weight);
    add(conv3_bias, other.conv3_bias);
}

void ModelGradients::scale(double s) {
    for (auto* vec : {&comb_w, &conv_front_weight, &conv_front_bias, &conv2_weight,
                      &conv2_bias, &conv3_weight, &conv3_bias}) {
        for (double& v : *vec) v *= s;
    }
}

ModelGradients model_backward(const Model& model, const ForwardCache& cache,
                              const Matrix& d_logits) {
    const auto& spec = model.spec;
    const int half = spec.conv_len / 2;
    ModelGradients grads;

    auto g3 = conv1d_backward(cache.a2_pad, model.conv3, d_logits);
    grads.conv3_weight = std::move(g3.d_weight);
    grads.conv3_bias = std::move(g3.d_bias);
    Matrix d_a2 = unpad_cols(g3.d_input, half, half);
    for (std::size_t i = 0; i < d_a2.v.size(); ++i) {
        d_a2.v[i] *= elu_gradient(cache.z2.v[i]);
    }

    auto g2 = conv1d_backward(cache.f_pad, model.conv2, d_a2);
    grads.conv2_weight = std::move(g2.d_weight);
    grads.conv2_bias = std::move(g2.d_bias);
    Matrix d_features = unpad_cols(g2.d_input, half, half);

    if (spec.frontend == Frontend::comb) {
        const auto lg = comb_layer_backward(d_features.v, cache.comb_act, model.comb);
        grads.comb_w = lg.d_w;
    } else {
        Matrix a1 = cache.z1;
        elu_inplace(a1);
        Matrix d_a1 = maxpool1d_backward(a1, cache.pool, d_features, spec.pool_window,
                                         spec.pool_stride);
        for (std::size_t i = 0; i < d_a1.v.size(); ++i) {
            d_a1.v[i] *= elu_gradient(cache.z1.v[i]);
        }
        auto g1 = conv1d_backward(cache.x_pad, model.conv_front, d_a1,
                                  /*need_input_grad=*/false);
        grads.conv_front_weight = std::move(g1.d_weight);
        grads.conv_front_bias = std::move(g1.d_bias);
    }
    return grads;
}

void save_model(const std::filesystem::path& path, const Model& model) {
    TensorArchive archive;
    const auto& spec = model.spec;
    archive.put_scalar("meta/frontend", spec.frontend == Frontend::comb ? 0.0 : 1.0);
    archive.put_scalar("meta/channels", spec.channels);
    archive.put_scalar("meta/f_min_hz", spec.scaling.f_min_hz);
    archive.put_scalar("meta/f_max_hz", spec.scaling.f_max_hz);
    archive.put_scalar("meta/alpha", spec.alpha);
    archive.put_scalar("meta/echo_count", spec.echo_count);
    archive.put_scalar("meta/sample_rate_hz", spec.sample_rate);
    archive.put_scalar("meta/pool_window", spec.pool_window);
    archive.put_scalar("meta/pool_stride", spec.pool_stride);
    archive.put_scalar("meta/conv_front_len", spec.conv_front_len);
    archive.put_scalar("meta/conv_len", spec.conv_len);
    if (spec.frontend == Frontend::comb) {
        archive.put("comb/w", {static_cast<std::int64_t>(model.comb.w.size())}, model.comb.w);
    } else {
        archive.put("conv1/weight",
                    {spec.channels, 1, spec.conv_front_len}, model.conv_front.weight);
        archive.put("conv1/bias", {spec.channels}, model.conv_front.bias);
    }
    archive.put("conv2/weight", {spec.channels, spec.channels, spec.conv_len},
                model.conv2.weight);
    archive.put("conv2/bias", {spec.channels}, model.conv2.bias);
    archive.put("conv3/weight", {kNumPitchClasses, spec.channels, spec.conv_len},
                model.conv3.weight);
    archive.put("conv3/bias", {kNumPitchClasses}, model.conv3.bias);
    save_archive(path, archive);
}

Model load_model(const std::filesystem::path& path) {
    const auto archive = load_archive(path);
    ModelSpec spec;
    spec.frontend = archive.get_scalar("meta/frontend") == 0.0 ? Frontend::comb : Frontend::conv;
    spec.channels = static_cast<int>(archive.get_scalar("meta/channels"));
    spec.scaling.f_min_hz = archive.get_scalar("meta/f_min_hz");
    spec.scaling.f_max_hz = archive.get_scalar("meta/f_max_hz");
    spec.alpha = archive.get_scalar("meta/alpha");
    spec.echo_count = static_cast<int>(archive.get_scalar("meta/echo_count"));
    spec.sample_rate = static_cast<int>(archive.get_scalar("meta/sample_rate_hz"));
    spec.pool_window = static_cast<int>(archive.get_scalar("meta/pool_window"));
    spec.pool_stride = static_cast<int>(archive.get_scalar("meta/pool_stride"));
    spec.conv_front_len = static_cast<int>(archive.get_scalar("meta/conv_front_len"));
    spec.conv_len = static_cast<int>(archive.get_scalar("meta/conv_len"));

    Model model;
    model.spec = spec;
    if (spec.frontend == Frontend::comb) {
        model.comb.w = archive.get("comb/w");
        model.comb.scaling = spec.scaling;
        model.comb.alpha = spec.alpha;
        model.comb.echo_count = spec.echo_count;
        model.comb.sample_rate = spec.sample_rate;
    } else {
        model.conv_front.c_in = 1;
        model.conv_front.c_out = spec.channels;
        model.conv_front.kernel_len = spec.conv_front_len;
        model.conv_front.stride = 1;
        model.conv_front.weight = archive.get("conv1/weight");
        model.conv_front.bias = archive.get("conv1/bias");
    }
    model.conv2 = {spec.channels, spec.channels, spec.conv_len, 1,
                   archive.get("conv2/weight"), archive.get("conv2/bias")};
    model.conv3 = {spec.channels, kNumPitchClasses, spec.conv_len, 1,
                   archive.get("conv3/weight"), archive.get("conv3/bias")};
    return model;
}

void F1Counts::add(bool predicted, bool truth) {
    if (predicted && truth) ++tp;
    else if (predicted && !truth) ++fp;
    else if (!predicted && truth) ++fn;
}

double F1Counts::f1() const {
    if (tp == 0 && fp == 0 && fn == 0) return 1.0;  // degenerate: nothing to find
    const double denom = 2.0 * tp + fp + fn;
    return denom > 0.0 ? 2.0 * tp / denom : 0.0;
}

double evaluate_model(const Model& model, const std::filesystem::path& data_dir,
                      const DatasetManifest& manifest) {
    F1Counts counts;
    const double frame_rate =
        static_cast<double>(manifest.sample_rate) / manifest.pool_stride;
    for (const auto& entry : manifest.entries) {
        const auto clip = wav_read(data_dir / entry.clip_path);
        const auto labels = labels_read(data_dir / entry.label_path, frame_rate);
        const Matrix logits = model_forward(model, clip, CombMode::inference, nullptr);
        const int frames = std::min(logits.cols, labels.frames);
        for (int t = 0; t < frames; ++t) {
            for (int cls = 0; cls < kNumPitchClasses; ++cls) {
                counts.add(logits.at(cls, t) > 0.0, labels.at(t, cls));
            }
        }
    }
    return counts.f1();
}

double evaluate_f1(const std::filesystem::path& checkpoint,
                   const std::filesystem::path& data_dir,
                   const DatasetManifest& manifest) {
    return evaluate_model(load_model(checkpoint), data_dir, manifest);
}

int count_f0_clusters(std::vector<double> f0_values, double merge_hz) {
    if (f0_values.empty()) return 0;
    std::sort(f0_values.begin(), f0_values.end());
    int clusters = 1;
    for (std::size_t i = 1; i < f0_values.size(); ++i) {
        if (f0_values[i] - f0_values[i - 1] > merge_hz) ++clusters;
    }
    return clusters;
}

namespace {

struct FlatParams {
    std::vector<std::pair<std::string, std::span<double>>> tensors;

    void add(const std::string& name, std::vector<double>& v) {
        if (!v.empty()) tensors.emplace_back(name, std::span<double>(v));
    }
};

FlatParams flatten_params(Model& model) {
    FlatParams flat;
    if (model.spec.frontend == Frontend::comb) {
        flat.add("comb/w", model.comb.w);
    } else {
        flat.add("conv1/weight", model.conv_front.weight);
        flat.add("conv1/bias", model.conv_front.bias);
    }
    flat.add("conv2/weight", model.conv2.weight);
    flat.add("conv2/bias", model.conv2.bias);
    flat.add("conv3/weight", model.conv3.weight);
    flat.add("conv3/bias", model.conv3.bias);
    return flat;
}

FlatParams flatten_grads(ModelGradients& grads, const Model& model) {
    FlatParams flat;
    if (model.spec.frontend == Frontend::comb) {
        flat.add("comb/w", grads.comb_w);
    } else {
        flat.add("conv1/weight", grads.conv_front_weight);
        flat.add("conv1/bias", grads.conv_front_bias);
    }
    flat.add("conv2/weight", grads.conv2_weight);
    flat.add("conv2/bias", grads.conv2_bias);
    flat.add("conv3/weight", grads.conv3_weight);
    flat.add("conv3/bias", grads.conv3_bias);
    return flat;
}

struct Clip {
    AudioSignal audio;
    LabelGrid labels;
};

Clip load_clip(const std::filesystem::path& data_dir, const DatasetManifest& manifest,
               std::size_t index) {
    const auto& entry = manifest.entries[index];
    Clip clip;
    clip.audio = wav_read(data_dir / entry.clip_path);
    clip.labels = labels_read(data_dir / entry.label_path,
                              static_cast<double>(manifest.sample_rate) /
                                  manifest.pool_stride);
    return clip;
}

}  // namespace

TrainResult train_model(const ModelSpec& spec, const std::filesystem::path& data_dir,
                        const DatasetManifest& train_manifest,
                        const DatasetManifest& valid_manifest, const TrainConfig& cfg,
                        const std::filesystem::path& out_dir,
                        const std::string& run_name) {
    if (train_manifest.entries.empty()) {
        throw std::runtime_error("train_model: empty training manifest");
    }
    std::filesystem::create_directories(out_dir);
    TrainResult result;
    result.checkpoint = out_dir / "checkpoint.cmbt";

    Model model = init_model(spec, cfg.seed);
    Rng rng(cfg.seed + 0x5151);

    const int stride = spec.pool_stride;
    const int window = spec.pool_window;
    const auto crop_total =
        static_cast<int>(cfg.crop_seconds * spec.sample_rate);
    const int crop_frames = std::max(1, (crop_total - window) / stride + 1);
    const int crop_samples = (crop_frames - 1) * stride + window;

    std::map<std::string, AdamState> adam;
    std::ofstream loss_csv(out_dir / ("losses_" + run_name + ".csv"));
    loss_csv << "step,loss\n";

    std::ofstream traj_csv;
    const bool log_trajectory = spec.frontend == Frontend::comb;
    if (log_trajectory) {
        traj_csv.open(out_dir / ("trajectory_" + run_name + ".csv"));
        traj_csv << "step,clusters";
        for (int m = 1; m <= spec.channels; ++m) traj_csv << ",f0_" << m;
        traj_csv << "\n";
    }
    auto current_f0 = [&]() {
        std::vector<double> f0(model.comb.w.size());
        for (std::size_t m = 0; m < f0.size(); ++m) {
            f0[m] = scale_to_f0(model.comb.w[m], model.comb.scaling);
        }
        return f0;
    };
    auto write_traj_row = [&](int step, int clusters) {
        traj_csv << step << ",";
        if (clusters >= 0) traj_csv << clusters;
        char buf[32];
        for (const double f0 : current_f0()) {
            std::snprintf(buf, sizeof(buf), "%.6f", f0);
            traj_csv << "," << buf;
        }
        traj_csv << "\n";
    };

    Model best = model;
    double best_val_f1 = -1.0;
    int evals_since_improvement = 0;
    std::vector<std::vector<double>> snapshot;  // last finite-loss parameters

    auto take_snapshot = [&]() {
        snapshot.clear();
        for (auto& [name, span] : flatten_params(model).tensors) {
            snapshot.emplace_back(span.begin(), span.end());
        }
    };
    auto restore_snapshot = [&]() {
        auto flat = flatten_params(model);
        for (std::size_t i = 0; i < flat.tensors.size(); ++i) {
            std::copy(snapshot[i].begin(), snapshot[i].end(), flat.tensors[i].second.begin());
        }
    };

    const double frame_rate = static_cast<double>(spec.sample_rate) / stride;
    int step = 0;
    for (step = 1; step <= cfg.max_steps; ++step) {
        ModelGradients batch_grads;
        double batch_loss = 0.0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            const auto idx = static_cast<std::size_t>(
                rng.uniform_int(0, static_cast<int>(train_manifest.entries.size()) - 1));
            const Clip clip = load_clip(data_dir, train_manifest, idx);
            const int grid_frames = clip.labels.frames;
            const int max_offset = std::max(0, grid_frames - crop_frames);
            const int offset_frames = max_offset > 0 ? rng.uniform_int(0, max_offset) : 0;
            const std::size_t offset_samples =
                static_cast<std::size_t>(offset_frames) * stride;

            AudioSignal crop;
            crop.sample_rate = spec.sample_rate;
            crop.samples.assign(crop_samples, 0.0f);
            for (int n = 0; n < crop_samples; ++n) {
                const std::size_t src = offset_samples + n;
                if (src < clip.audio.length()) crop.samples[n] = clip.audio.samples[src];
            }
            Matrix targets(kNumPitchClasses, crop_frames);
            for (int t = 0; t < crop_frames; ++t) {
                const int src = offset_frames + t;
                if (src >= grid_frames) continue;
                for (int c = 0; c < kNumPitchClasses; ++c) {
                    targets.at(c, t) = clip.labels.at(src, c) ? 1.0 : 0.0;
                }
            }

            ForwardCache cache;
            const Matrix logits = model_forward(model, crop, CombMode::training, &cache);
            auto bce = bce_with_logits(logits, targets);
            batch_loss += bce.loss;
            auto grads = model_backward(model, cache, bce.grad);
            batch_grads.accumulate(grads);
        }
        batch_loss /= cfg.batch_size;
        batch_grads.scale(1.0 / cfg.batch_size);
        result.losses.push_back(batch_loss);
        loss_csv << step << "," << batch_loss << "\n";

        if (!std::isfinite(batch_loss)) {
            result.diverged = true;
            break;
        }
        take_snapshot();

        auto flat_grads = flatten_grads(batch_grads, model);
        std::vector<std::span<double>> spans;
        for (auto& [name, span] : flat_grads.tensors) spans.push_back(span);
        clip_global_norm(std::span<std::span<double>>(spans), cfg.grad_clip);

        auto flat_params = flatten_params(model);
        bool nan_grad = false;
        for (std::size_t i = 0; i < flat_params.tensors.size(); ++i) {
            auto& [name, pspan] = flat_params.tensors[i];
            auto& state = adam[name];
            state.lr = cfg.lr;
            try {
                adam_step(pspan, flat_grads.tensors[i].second, state, name);
            } catch (const std::runtime_error&) {
                nan_grad = true;
                break;
            }
        }
        if (nan_grad) {
            result.diverged = true;
            restore_snapshot();
            break;
        }

        if (log_trajectory && step % 10 == 0 && step != cfg.max_steps) {
            write_traj_row(step, -1);
            ++result.trajectory_rows;
        }

        if (cfg.eval_interval > 0 && step % cfg.eval_interval == 0 &&
            !valid_manifest.entries.empty()) {
            const double val_f1 = evaluate_model(model, data_dir, valid_manifest);
            if (val_f1 > best_val_f1) {
                best_val_f1 = val_f1;
                best = model;
                evals_since_improvement = 0;
            } else {
                ++evals_since_improvement;
            }
            if (evals_since_improvement >= cfg.patience) break;
        }
    }
    result.steps_run = std::min(step, cfg.max_steps);

    if (best_val_f1 < 0.0) {
        best = model;  // never evaluated (or diverged before the first eval)
        if (result.diverged && !snapshot.empty()) {
            restore_snapshot();
            best = model;
        }
    }
    result.best_val_f1 = std::max(best_val_f1, 0.0);

    if (log_trajectory) {
        // final row carries the cluster count
        model = best;
        result.f0_clusters = count_f0_clusters(current_f0());
        write_traj_row(result.steps_run, result.f0_clusters);
        ++result.trajectory_rows;
    } else {
        model = best;
    }

    save_model(result.checkpoint, best);
    if (spec.frontend == Frontend::comb) {
        save_comb_params(out_dir / "comb_params.txt", best.comb);
    }
    return result;
}

std::vector<SweepRow> sweep_pareto(const std::vector<int>& channel_counts,
                                   const std::filesystem::path& data_dir,
                                   const TrainConfig& cfg,
                                   const std::filesystem::path& out_dir, bool dry_run) {
    std::filesystem::create_directories(out_dir);
    std::vector<SweepRow> rows;

    DatasetManifest train_m, valid_m, eval_m;
    if (!dry_run) {
        train_m = manifest_read(data_dir / "train_manifest.txt");
        valid_m = manifest_read(data_dir / "valid_manifest.txt");
        const auto test_path = data_dir / "test_manifest.txt";
        eval_m = std::filesystem::exists(test_path) ? manifest_read(test_path) : valid_m;
    }

    for (const Frontend frontend : {Frontend::comb, Frontend::conv}) {
        for (const int channels : channel_counts) {
            ModelSpec spec;
            spec.frontend = frontend;
            spec.channels = channels;
            SweepRow row;
            row.frontend = frontend == Frontend::comb ? "comb" : "conv";
            row.channels = channels;
            const auto costs = count_costs(spec);
            row.params = costs.total_params();
            row.macs_per_sample = costs.total_macs_per_sample();
            if (!dry_run) {
                const std::string run = row.frontend + "_" + std::to_string(channels);
                try {
                    const auto res = train_model(spec, data_dir, train_m, valid_m, cfg,
                                                 out_dir / run, run);
                    row.f1 = evaluate_f1(res.checkpoint, data_dir, eval_m);
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
            }
            rows.push_back(row);
        }
    }

    std::ofstream csv(out_dir / "pareto.csv");
    csv << "frontend,channels,params,macs_per_sample,f1\n";
    char buf[64];
    for (const auto& row : rows) {
        std::snprintf(buf, sizeof(buf), "%.6g,%.6f", row.macs_per_sample,
                      row.f1 >= 0.0 ? row.f1 : -1.0);
        csv << row.frontend << "," << row.channels << "," << row.params << "," << buf
            << "\n";
    }

    std::ofstream dom(out_dir / "dominance.txt");
    dom << "# per channel budget: frontend with higher F1 (reported, not asserted)\n";
    for (const int channels : channel_counts) {
        double comb_f1 = -1.0, conv_f1 = -1.0;
        for (const auto& row : rows) {
            if (row.channels != channels) continue;
            (row.frontend == "comb" ? comb_f1 : conv_f1) = row.f1;
        }
        dom << "channels " << channels << " comb_f1 " << comb_f1 << " conv_f1 " << conv_f1
            << " winner "
            << (comb_f1 < 0 && conv_f1 < 0 ? "n/a" : (comb_f1 >= conv_f1 ? "comb" : "conv"))
            << "\n";
    }
    return rows;
}

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open config " + path.string());
    }
    RunConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key, value;
        ss >> key >> value;
        if (key.empty()) continue;
        auto fail = [&](const std::string& why) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " +
                                     why);
        };
        if (value.empty()) fail("missing value for key '" + key + "'");
        try {
            if (key == "frontend") {
                if (value == "comb") cfg.spec.frontend = Frontend::comb;
                else if (value == "conv") cfg.spec.frontend = Frontend::conv;
                else fail("frontend must be comb or conv");
            } else if (key == "channels") cfg.spec.channels = std::stoi(value);
            else if (key == "f_min_hz") cfg.spec.scaling.f_min_hz = std::stod(value);
            else if (key == "f_max_hz") cfg.spec.scaling.f_max_hz = std::stod(value);
            else if (key == "alpha") cfg.spec.alpha = std::stod(value);
            else if (key == "echo_count") cfg.spec.echo_count = std::stoi(value);
            else if (key == "sample_rate_hz") cfg.spec.sample_rate = std::stoi(value);
            else if (key == "pool_window") cfg.spec.pool_window = std::stoi(value);
            else if (key == "pool_stride") cfg.spec.pool_stride = std::stoi(value);
            else if (key == "conv_front_len") cfg.spec.conv_front_len = std::stoi(value);
            else if (key == "conv_len") cfg.spec.conv_len = std::stoi(value);
            else if (key == "lr") cfg.train.lr = std::stod(value);
            else if (key == "max_steps") cfg.train.max_steps = std::stoi(value);
            else if (key == "batch_size") cfg.train.batch_size = std::stoi(value);
            else if (key == "grad_clip_norm") cfg.train.grad_clip = std::stod(value);
            else if (key == "seed") cfg.train.seed = std::stoull(value);
            else if (key == "eval_interval") cfg.train.eval_interval = std::stoi(value);
            else if (key == "patience") cfg.train.patience = std::stoi(value);
            else if (key == "crop_seconds") cfg.train.crop_seconds = std::stod(value);
            else if (key == "data_dir") cfg.data_dir = value;
            else if (key == "out_dir") cfg.out_dir = value;
            else if (key == "run_name") cfg.run_name = value;
            else fail("unknown key '" + key + "'");
        } catch (const std::invalid_argument&) {
            fail("cannot parse value '" + value + "' for key '" + key + "'");
        }
    }
    return cfg;
}

}  // namespace combnet
