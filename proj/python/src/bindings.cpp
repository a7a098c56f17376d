#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "combnet/audio_data.hpp"
#include "combnet/comb_core.hpp"
#include "combnet/comb_layer.hpp"
#include "combnet/experiments.hpp"

namespace py = pybind11;
using namespace combnet;

namespace {

AudioSignal to_signal(const py::array_t<float, py::array::c_style | py::array::forcecast>& x,
                      int sample_rate) {
    if (x.ndim() != 1) {
        throw std::invalid_argument("expected a 1-D float array");
    }
    AudioSignal s;
    s.sample_rate = sample_rate;
    s.samples.assign(x.data(), x.data() + x.size());
    return s;
}

py::array_t<float> from_signal(const AudioSignal& s) {
    py::array_t<float> out(static_cast<py::ssize_t>(s.length()));
    std::copy(s.samples.begin(), s.samples.end(), out.mutable_data());
    return out;
}

py::array_t<float> from_featuremap(const FeatureMap& fm) {
    py::array_t<float> out({fm.channels, fm.frames});
    std::copy(fm.values.begin(), fm.values.end(), out.mutable_data());
    return out;
}

CombBankParams make_bank(std::vector<double> w, double f_min_hz, double f_max_hz,
                         double alpha, int echo_count, int sample_rate) {
    CombBankParams params;
    params.w = std::move(w);
    params.scaling = {f_min_hz, f_max_hz};
    params.alpha = alpha;
    params.echo_count = echo_count;
    params.sample_rate = sample_rate;
    return params;
}

}  // namespace

PYBIND11_MODULE(_combnet, m) {
    m.doc() = "Comb-filter feature extraction core";

    m.def("scale_to_f0",
          [](double w, double f_min_hz, double f_max_hz) {
              return scale_to_f0(w, {f_min_hz, f_max_hz});
          },
          py::arg("w"), py::arg("f_min_hz") = 200.0, py::arg("f_max_hz") = 500.0,
          "Map an unconstrained parameter into (f_min, f_max) Hz.");
    m.def("scale_to_f0_gradient",
          [](double w, double f_min_hz, double f_max_hz) {
              return scale_to_f0_gradient(w, {f_min_hz, f_max_hz});
          },
          py::arg("w"), py::arg("f_min_hz") = 200.0, py::arg("f_max_hz") = 500.0);
    m.def("continuous_delay", &continuous_delay, py::arg("f0_hz"), py::arg("sample_rate"),
          "Loop delay in samples, sample_rate / f0.");
    m.def("discretize_for_inference", &discretize_for_inference, py::arg("k_bar"),
          "Round half to even, clamped to >= 1.");
    m.def("magnitude_response",
          [](double f0_hz, double f_hz, double alpha) {
              CombChannelConfig cfg;
              cfg.f0_hz = f0_hz;
              cfg.alpha = alpha;
              return magnitude_response(cfg, f_hz);
          },
          py::arg("f0_hz"), py::arg("f_hz"), py::arg("alpha") = 0.9,
          "Analytic gain of the feedback comb at f_hz.");

    m.def("iir_comb",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x,
             int delay_samples, double alpha) {
              return from_signal(iir_comb(to_signal(x, 16000), delay_samples, alpha));
          },
          py::arg("x"), py::arg("delay_samples"), py::arg("alpha") = 0.9,
          "Recursive y[n] = x[n] + alpha * y[n - K].");
    m.def("sparse_comb",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x,
             double k_bar, double alpha, int echo_count) {
              return from_signal(sparse_comb(to_signal(x, 16000), k_bar, alpha, echo_count));
          },
          py::arg("x"), py::arg("k_bar"), py::arg("alpha") = 0.9,
          py::arg("echo_count") = 10,
          "Truncated comb with per-echo fractional delays (training path).");
    m.def("interp_comb_wholekernel",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x,
             double k_bar, double alpha, int echo_count) {
              return from_signal(
                  interp_comb_wholekernel(to_signal(x, 16000), k_bar, alpha, echo_count));
          },
          py::arg("x"), py::arg("k_bar"), py::arg("alpha") = 0.9,
          py::arg("echo_count") = 10,
          "Truncated comb interpolating the whole floor/ceil kernels.");

    m.def("comb_layer_forward",
          [](const py::array_t<float, py::array::c_style | py::array::forcecast>& x,
             int sample_rate, std::vector<double> w, double f_min_hz, double f_max_hz,
             double alpha, int echo_count, int pool_window, int pool_stride, bool training) {
              const auto params = make_bank(std::move(w), f_min_hz, f_max_hz, alpha,
                                            echo_count, sample_rate);
              const auto fm = comb_layer_forward(to_signal(x, sample_rate), params,
                                                 {pool_window, pool_stride},
                                                 training ? CombMode::training
                                                          : CombMode::inference);
              return from_featuremap(fm);
          },
          py::arg("x"), py::arg("sample_rate"), py::arg("w"), py::arg("f_min_hz") = 200.0,
          py::arg("f_max_hz") = 500.0, py::arg("alpha") = 0.9, py::arg("echo_count") = 10,
          py::arg("pool_window") = 1024, py::arg("pool_stride") = 512,
          py::arg("training") = false,
          "Filter bank + abs + max pool; returns a (channels, frames) array.");

    m.def("init_w",
          [](int channels, std::uint64_t seed) {
              return init_params(channels, {200.0, 500.0}, 0.9, 10, 16000, seed).w;
          },
          py::arg("channels"), py::arg("seed") = 0,
          "Uniform [-2, 2] initial parameters, deterministic per seed.");

    m.def("count_costs",
          [](const std::string& frontend, int channels) {
              ModelSpec spec;
              if (frontend == "comb") spec.frontend = Frontend::comb;
              else if (frontend == "conv") spec.frontend = Frontend::conv;
              else throw std::invalid_argument("frontend must be 'comb' or 'conv'");
              spec.channels = channels;
              py::list rows;
              for (const auto& layer : count_costs(spec).layers) {
                  rows.append(py::make_tuple(layer.name, layer.params,
                                             layer.macs_per_sample));
              }
              return rows;
          },
          py::arg("frontend"), py::arg("channels"),
          "Per-layer (name, params, MACs/sample) at inference.");

    m.def("generate_dataset",
          [](const std::filesystem::path& dir, const std::string& split,
             std::uint64_t seed_base, int count, int sample_rate, int pool_window,
             int pool_stride) {
              const auto manifest = generate_dataset(dir, split, seed_base, count,
                                                     sample_rate, pool_window, pool_stride);
              return manifest.entries.size();
          },
          py::arg("dir"), py::arg("split"), py::arg("seed_base"), py::arg("count"),
          py::arg("sample_rate") = 16000, py::arg("pool_window") = 1024,
          py::arg("pool_stride") = 512,
          "Synthesize note clips + labels + manifest; returns the clip count.");

    m.def("evaluate_f1",
          [](const std::filesystem::path& checkpoint, const std::filesystem::path& data_dir,
             const std::string& split) {
              const auto manifest = manifest_read(data_dir / (split + "_manifest.txt"));
              return evaluate_f1(checkpoint, data_dir, manifest);
          },
          py::arg("checkpoint"), py::arg("data_dir"), py::arg("split") = "test",
          "Micro-averaged frame-wise F1 of a saved model on a dataset split.");

    m.def("train",
          [](const std::filesystem::path& config_path) {
              const auto cfg = load_run_config(config_path);
              const auto train_m = manifest_read(cfg.data_dir / "train_manifest.txt");
              const auto valid_path = cfg.data_dir / "valid_manifest.txt";
              DatasetManifest valid_m;
              if (std::filesystem::exists(valid_path)) valid_m = manifest_read(valid_path);
              const auto res = train_model(cfg.spec, cfg.data_dir, train_m, valid_m,
                                           cfg.train, cfg.out_dir, cfg.run_name);
              py::dict out;
              out["diverged"] = res.diverged;
              out["steps_run"] = res.steps_run;
              out["best_val_f1"] = res.best_val_f1;
              out["checkpoint"] = res.checkpoint.string();
              out["f0_clusters"] = res.f0_clusters;
              return out;
          },
          py::arg("config_path"), "Run a training job described by a config file.");
}
