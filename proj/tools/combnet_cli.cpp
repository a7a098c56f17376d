// combnet: dataset synthesis, training, evaluation, and cost reporting for
// learned-delay comb filter frontends.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "combnet/audio_data.hpp"
#include "combnet/comb_core.hpp"
#include "combnet/comb_layer.hpp"
#include "combnet/experiments.hpp"
#include "combnet/svg.hpp"

namespace fs = std::filesystem;
using namespace combnet;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

fs::path default_output_root() {
    if (const char* env = std::getenv("COMBNET_OUTPUT_ROOT")) {
        return fs::path(env);
    }
    return fs::current_path();
}

int run_synth(const fs::path& out, std::uint64_t seed, int train_count, int valid_count,
              int test_count, int sample_rate, int pool_window, int pool_stride) {
    if (train_count <= 0 || valid_count <= 0 || test_count <= 0) {
        std::cerr << "synth: split counts must be positive\n";
        return kExitUsage;
    }
    // disjoint seed ranges per split
    generate_dataset(out, "train", seed, train_count, sample_rate, pool_window, pool_stride);
    generate_dataset(out, "valid", seed + 100000, valid_count, sample_rate, pool_window,
                     pool_stride);
    generate_dataset(out, "test", seed + 200000, test_count, sample_rate, pool_window,
                     pool_stride);
    std::cout << "wrote " << train_count << "/" << valid_count << "/" << test_count
              << " clips to " << out << "\n";
    return 0;
}

int run_train(const fs::path& config_path) {
    const RunConfig cfg = load_run_config(config_path);
    const auto train_m = manifest_read(cfg.data_dir / "train_manifest.txt");
    const auto valid_m = manifest_read(cfg.data_dir / "valid_manifest.txt");
    const auto res = train_model(cfg.spec, cfg.data_dir, train_m, valid_m, cfg.train,
                                 cfg.out_dir, cfg.run_name);
    const double val_f1 =
        valid_m.entries.empty() ? 0.0 : evaluate_f1(res.checkpoint, cfg.data_dir, valid_m);
    std::cout << "steps " << res.steps_run << " validation_f1 " << val_f1 << "\n";
    if (cfg.spec.frontend == Frontend::comb) {
        std::cout << "f0_clusters_within_1hz " << res.f0_clusters << "\n";
        // trajectory plot alongside the CSV
        std::vector<SvgSeries> series(cfg.spec.channels);
        std::ifstream traj(cfg.out_dir / ("trajectory_" + cfg.run_name + ".csv"));
        std::string line;
        std::getline(traj, line);
        while (std::getline(traj, line)) {
            std::istringstream ss(line);
            std::string cell;
            std::getline(ss, cell, ',');
            const double step = std::stod(cell);
            std::getline(ss, cell, ',');  // clusters
            for (int m = 0; m < cfg.spec.channels && std::getline(ss, cell, ','); ++m) {
                series[m].points.emplace_back(step, std::stod(cell));
            }
        }
        write_line_chart_svg(cfg.out_dir / ("trajectory_" + cfg.run_name + ".svg"),
                             "f0 trajectories", "step", "f0 (Hz)", series);
    }
    if (res.diverged) {
        std::cerr << "training diverged; last good checkpoint kept at " << res.checkpoint
                  << "\n";
        return kExitNumerical;
    }
    return 0;
}

int run_eval(const fs::path& checkpoint, const fs::path& data_dir,
             const std::string& split) {
    const auto manifest = manifest_read(data_dir / (split + "_manifest.txt"));
    const double f1 = evaluate_f1(checkpoint, data_dir, manifest);
    std::printf("%s_f1 %.6f\n", split.c_str(), f1);
    return 0;
}

int run_respond(double f0, double alpha, int sample_rate, const fs::path& out_csv,
                bool measure, const fs::path& svg_path) {
    if (f0 > sample_rate / 2.0) {
        std::cerr << "respond: f0 above Nyquist\n";
        return kExitUsage;
    }
    CombChannelConfig cfg{f0, alpha, 10, sample_rate};
    std::ofstream csv(out_csv);
    csv << "frequency_hz,analytic_gain\n";
    SvgSeries curve{"analytic", {}};
    for (int f = 0; f <= sample_rate / 2; ++f) {
        const double g = magnitude_response(cfg, f);
        csv << f << "," << g << "\n";
        if (f % 4 == 0) curve.points.emplace_back(f, g);
    }

    if (measure) {
        // sinusoid probes at harmonics and anti-resonances through the
        // recursive filter, RMS over the steady-state tail
        const int k = discretize_for_inference(continuous_delay(f0, sample_rate));
        auto measure_gain = [&](double freq) {
            const int n = sample_rate * 4;
            AudioSignal x;
            x.sample_rate = sample_rate;
            x.samples.resize(n);
            for (int i = 0; i < n; ++i) {
                x.samples[i] = static_cast<float>(std::sin(2.0 * M_PI * freq * i / sample_rate));
            }
            const auto y = iir_comb(x, k, alpha);
            double acc = 0.0;
            for (int i = n / 2; i < n; ++i) acc += static_cast<double>(y.samples[i]) * y.samples[i];
            const double rms = std::sqrt(acc / (n / 2));
            return rms * std::sqrt(2.0);  // unit amplitude input
        };
        std::ofstream probes(out_csv.string() + ".probes.csv");
        probes << "frequency_hz,analytic_gain,measured_gain\n";
        for (int h = 1; h <= 5; ++h) {
            const double freq = h * f0;
            if (freq > sample_rate / 2.0) break;
            probes << freq << "," << magnitude_response(cfg, freq) << ","
                   << measure_gain(freq) << "\n";
        }
        const double anti = f0 / 2.0;
        probes << anti << "," << magnitude_response(cfg, anti) << "," << measure_gain(anti)
               << "\n";
    }
    if (!svg_path.empty()) {
        write_line_chart_svg(svg_path, "comb magnitude response", "frequency (Hz)", "gain",
                             {curve});
    }
    return 0;
}

int run_bench(const fs::path& spec_path) {
    const RunConfig cfg = load_run_config(spec_path);
    const auto report = count_costs(cfg.spec);
    for (const auto& layer : report.layers) {
        std::printf("%s: %.6g MACs/sample, %ld params\n", layer.name.c_str(),
                    layer.macs_per_sample, layer.params);
    }
    std::printf("total: %.6g MACs/sample, %ld params\n", report.total_macs_per_sample(),
                report.total_params());

    // measured comb-layer throughput, recursive inference vs sparse training
    if (cfg.spec.frontend == Frontend::comb) {
        const auto params = init_params(cfg.spec.channels, cfg.spec.scaling, cfg.spec.alpha,
                                        cfg.spec.echo_count, cfg.spec.sample_rate, 1);
        AudioSignal x;
        x.sample_rate = cfg.spec.sample_rate;
        x.samples.resize(cfg.spec.sample_rate * 4);
        Rng rng(2);
        for (auto& v : x.samples) v = static_cast<float>(rng.uniform(-1.0, 1.0));
        EnvelopeConfig env{cfg.spec.pool_window, cfg.spec.pool_stride};
        for (const auto mode : {CombMode::inference, CombMode::training}) {
            const auto start = std::chrono::steady_clock::now();
            comb_layer_forward(x, params, env, mode);
            const std::chrono::duration<double> dt =
                std::chrono::steady_clock::now() - start;
            std::printf("%s mode: %.3g samples/s\n",
                        mode == CombMode::inference ? "recursive" : "sparse",
                        static_cast<double>(x.length()) / dt.count());
        }
    }
    return 0;
}

int run_sweep(const fs::path& data_dir, const fs::path& out_dir, bool dry_run,
              const TrainConfig& cfg, const std::vector<int>& channels) {
    const auto rows = sweep_pareto(channels, data_dir, cfg, out_dir, dry_run);
    for (const auto& row : rows) {
        std::printf("%s_%d params %ld macs/sample %.6g", row.frontend.c_str(), row.channels,
                    row.params, row.macs_per_sample);
        if (dry_run) {
            std::printf(" (planned)\n");
        } else if (!row.error.empty()) {
            std::printf(" FAILED: %s\n", row.error.c_str());
        } else {
            std::printf(" f1 %.4f\n", row.f1);
        }
    }
    if (!dry_run) std::cout << "wrote " << (out_dir / "pareto.csv") << "\n";
    return 0;
}

int run_inspect(const fs::path& params_path) {
    const auto params = load_comb_params(params_path);
    std::printf("channels %d  range %.6g-%.6g Hz  alpha %.6g  echoes %d  fs %d\n",
                params.channels(), params.scaling.f_min_hz, params.scaling.f_max_hz,
                params.alpha, params.echo_count, params.sample_rate);
    std::printf("%-6s %-14s %-12s %-12s %-6s\n", "ch", "w", "f0_hz", "k_bar", "k");
    for (int m = 0; m < params.channels(); ++m) {
        const double f0 = scale_to_f0(params.w[m], params.scaling);
        const double k_bar = continuous_delay(f0, params.sample_rate);
        std::printf("%-6d %-14.8g %-12.6f %-12.6f %-6d\n", m, params.w[m], f0, k_bar,
                    discretize_for_inference(k_bar));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"learned-delay comb filter bank: data, training, evaluation"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "generate the synthetic note dataset");
    fs::path synth_out = default_output_root() / "data";
    std::uint64_t synth_seed = 1234;
    int n_train = 2000, n_valid = 200, n_test = 200;
    int sample_rate = 16000, pool_window = 1024, pool_stride = 512;
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--seed", synth_seed, "base seed");
    synth->add_option("--train", n_train, "training clip count");
    synth->add_option("--valid", n_valid, "validation clip count");
    synth->add_option("--test", n_test, "test clip count");
    synth->add_option("--fs", sample_rate, "sample rate in Hz");
    synth->add_option("--pool-window", pool_window, "label frame window in samples");
    synth->add_option("--pool-stride", pool_stride, "label frame stride in samples");

    // train
    auto* train = app.add_subcommand("train", "train a model from a run config");
    fs::path train_config;
    train->add_option("--config", train_config, "run configuration file")->required();

    // eval
    auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
    fs::path eval_ckpt, eval_data;
    std::string eval_split = "test";
    eval->add_option("--checkpoint", eval_ckpt, "model checkpoint")->required();
    eval->add_option("--data", eval_data, "dataset directory")->required();
    eval->add_option("--split", eval_split, "split to evaluate (train/valid/test)");

    // bench
    auto* bench = app.add_subcommand("bench", "analytic cost report and throughput");
    fs::path bench_spec;
    bench->add_option("--spec", bench_spec, "model spec / run config file")->required();

    // respond
    auto* respond = app.add_subcommand("respond", "magnitude response CSV");
    double r_f0 = 440.0, r_alpha = 0.9;
    int r_fs = 16000;
    fs::path r_out = "response.csv", r_svg;
    bool r_measure = false;
    respond->add_option("--f0", r_f0, "fundamental frequency in Hz")->required();
    respond->add_option("--alpha", r_alpha, "feedback gain");
    respond->add_option("--fs", r_fs, "sample rate in Hz");
    respond->add_option("--out", r_out, "output CSV path");
    respond->add_flag("--measure", r_measure, "add measured gains from sinusoid probes");
    respond->add_option("--svg", r_svg, "also render the curve as SVG");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "channel-count Pareto sweep");
    fs::path sweep_data, sweep_out = default_output_root() / "sweep";
    bool sweep_dry = false;
    TrainConfig sweep_cfg;
    sweep_cfg.max_steps = 2000;
    std::vector<int> sweep_channels = {8, 16, 32, 64, 128};
    sweep->add_option("--data", sweep_data, "dataset directory");
    sweep->add_option("--out", sweep_out, "output directory");
    sweep->add_flag("--dry-run", sweep_dry, "print planned configurations, train none");
    sweep->add_option("--steps", sweep_cfg.max_steps, "max training steps per run");
    sweep->add_option("--seed", sweep_cfg.seed, "shared training seed");
    sweep->add_option("--channels", sweep_channels, "channel counts");

    // inspect
    auto* inspect = app.add_subcommand("inspect", "dump comb parameters (w, f0, delay)");
    fs::path inspect_path;
    inspect->add_option("--params", inspect_path, "comb_params.txt from a run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*synth) {
            return run_synth(synth_out, synth_seed, n_train, n_valid, n_test, sample_rate,
                             pool_window, pool_stride);
        }
        if (*train) return run_train(train_config);
        if (*eval) return run_eval(eval_ckpt, eval_data, eval_split);
        if (*bench) return run_bench(bench_spec);
        if (*respond) return run_respond(r_f0, r_alpha, r_fs, r_out, r_measure, r_svg);
        if (*sweep) {
            if (!sweep_dry && sweep_data.empty()) {
                std::cerr << "sweep: --data is required unless --dry-run\n";
                return kExitUsage;
            }
            return run_sweep(sweep_data, sweep_out, sweep_dry, sweep_cfg, sweep_channels);
        }
        if (*inspect) return run_inspect(inspect_path);
    } catch (const std::domain_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
