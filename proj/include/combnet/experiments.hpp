#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "combnet/audio_data.hpp"
#include "combnet/comb_layer.hpp"
#include "combnet/nn.hpp"

namespace combnet {

enum class Frontend { comb, conv };

struct ModelSpec {
    Frontend frontend = Frontend::comb;
    int channels = 32;
    ScalingConfig scaling{200.0, 500.0};
    double alpha = 0.9;
    int echo_count = 10;
    int sample_rate = 16000;
    int pool_window = 1024;
    int pool_stride = 512;
    int conv_front_len = 251;  // conv frontend only
    int conv_len = 9;          // later layers, odd so "same" padding is symmetric
};

// Per-layer parameter counts and inference MACs normalized by input audio
// samples. Purely structural; never runs the model.
struct CostReport {
    struct Layer {
        std::string name;
        long params = 0;
        double macs_per_sample = 0.0;
    };
    std::vector<Layer> layers;

    long total_params() const;
    double total_macs_per_sample() const;
};

CostReport count_costs(const ModelSpec& spec);

// The trained network: a comb or conv frontend followed by two "same"
// padded conv layers, the last with 12 output channels.
struct Model {
    ModelSpec spec;
    CombBankParams comb;      // comb frontend
    Conv1dLayer conv_front;   // conv frontend
    Conv1dLayer conv2;
    Conv1dLayer conv3;
};

Model init_model(const ModelSpec& spec, std::uint64_t seed);

struct ForwardCache {
    CombLayerActivations comb_act;
    Matrix x_pad;       // conv frontend input, padded
    Matrix z1;          // conv frontend pre-activation
    MaxPoolResult pool;
    Matrix features;    // frontend output, channels x frames
    Matrix f_pad;
    Matrix z2;
    Matrix a2_pad;
};

// Returns 12 x T' logits. cache may be null for inference.
Matrix model_forward(const Model& model, const AudioSignal& x, CombMode mode,
                     ForwardCache* cache);

struct ModelGradients {
    std::vector<double> comb_w;
    std::vector<double> conv_front_weight, conv_front_bias;
    std::vector<double> conv2_weight, conv2_bias;
    std::vector<double> conv3_weight, conv3_bias;

    void accumulate(const ModelGradients& other);
    void scale(double s);
};

ModelGradients model_backward(const Model& model, const ForwardCache& cache,
                              const Matrix& d_logits);

void save_model(const std::filesystem::path& path, const Model& model);
Model load_model(const std::filesystem::path& path);

// Micro-averaged frame-wise F1 at threshold 0.5 (logit > 0).
struct F1Counts {
    long tp = 0, fp = 0, fn = 0;
    void add(bool predicted, bool truth);
    double f1() const;  // 1.0 when nothing predicted and nothing labeled
};

double evaluate_model(const Model& model, const std::filesystem::path& data_dir,
                      const DatasetManifest& manifest);
double evaluate_f1(const std::filesystem::path& checkpoint,
                   const std::filesystem::path& data_dir,
                   const DatasetManifest& manifest);

struct TrainResult {
    bool diverged = false;
    int steps_run = 0;
    double best_val_f1 = 0.0;
    std::filesystem::path checkpoint;
    std::vector<double> losses;
    int trajectory_rows = 0;
    int f0_clusters = 0;  // comb runs, channels within 1 Hz merged
};

// BCE training with Adam and global-norm clipping. Writes checkpoint.cmbt,
// losses_<run>.csv, and (comb frontends) trajectory_<run>.csv under out_dir.
// Early-stops when validation F1 has not improved for cfg.patience
// evaluations. On divergence the last finite-loss parameters are kept.
TrainResult train_model(const ModelSpec& spec, const std::filesystem::path& data_dir,
                        const DatasetManifest& train_manifest,
                        const DatasetManifest& valid_manifest, const TrainConfig& cfg,
                        const std::filesystem::path& out_dir,
                        const std::string& run_name);

struct SweepRow {
    std::string frontend;
    int channels = 0;
    long params = 0;
    double macs_per_sample = 0.0;
    double f1 = -1.0;  // negative when the run failed
    std::string error;
};

// Trains both frontends at every channel count with a shared seed and
// writes pareto.csv. Failures are recorded and the sweep continues.
std::vector<SweepRow> sweep_pareto(const std::vector<int>& channel_counts,
                                   const std::filesystem::path& data_dir,
                                   const TrainConfig& cfg,
                                   const std::filesystem::path& out_dir, bool dry_run);

// Count of distinct f0 groups after merging channels within 1 Hz.
int count_f0_clusters(std::vector<double> f0_values, double merge_hz = 1.0);

// Run configuration: plain "key value" lines, '#' comments.
struct RunConfig {
    ModelSpec spec;
    TrainConfig train;
    std::filesystem::path data_dir;
    std::filesystem::path out_dir = "runs";
    std::string run_name = "run";
};

RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace combnet
