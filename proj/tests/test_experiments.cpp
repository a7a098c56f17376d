#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "combnet/experiments.hpp"
#include "test_util.hpp"

using namespace combnet;
using namespace combnet::testutil;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int count_lines(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    int n = 0;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("cost accounting for the comb frontend") {
    ModelSpec spec;
    spec.frontend = Frontend::comb;
    spec.channels = 80;
    const auto report = count_costs(spec);
    REQUIRE(report.layers.size() == 3);
    CHECK(report.layers[0].name == "comb");
    CHECK(report.layers[0].params == 80);
    CHECK(report.layers[0].macs_per_sample == 80.0);

    spec.channels = 32;
    const auto r32 = count_costs(spec);
    CHECK(r32.layers[0].params == 32);
    // later layers: C_out * (C_in * L + 1) params, MACs amortized by the pool stride
    CHECK(r32.layers[1].params == 32 * (32 * 9 + 1));
    CHECK(r32.layers[1].macs_per_sample == doctest::Approx(32.0 * 32 * 9 / 512));
    CHECK(r32.layers[2].params == 12 * (32 * 9 + 1));
}

TEST_CASE("cost accounting for the conv frontend") {
    ModelSpec spec;
    spec.frontend = Frontend::conv;
    spec.channels = 80;
    const auto report = count_costs(spec);
    CHECK(report.layers[0].name == "conv1");
    CHECK(report.layers[0].params == 80 * (251 + 1));
    CHECK(report.layers[0].macs_per_sample == doctest::Approx(80.0 * 251));
    // the conv frontend costs its kernel length in MACs per comb MAC
    ModelSpec comb_spec = spec;
    comb_spec.frontend = Frontend::comb;
    CHECK(report.layers[0].macs_per_sample ==
          doctest::Approx(251.0 * count_costs(comb_spec).layers[0].macs_per_sample));
}

TEST_CASE("micro F1 counting") {
    SUBCASE("nothing predicted, nothing labeled") {
        F1Counts c;
        CHECK(c.f1() == 1.0);
    }
    SUBCASE("every prediction wrong") {
        F1Counts c;
        c.add(true, false);
        c.add(false, true);
        CHECK(c.f1() == 0.0);
    }
    SUBCASE("one hit, one false alarm") {
        F1Counts c;
        c.add(true, true);
        c.add(true, false);
        CHECK(c.f1() == doctest::Approx(2.0 / 3.0));
    }
}

TEST_CASE("full-model gradients match finite differences") {
    ModelSpec spec;
    spec.frontend = Frontend::conv;
    spec.channels = 3;
    spec.conv_front_len = 15;
    spec.conv_len = 3;
    spec.pool_window = 64;
    spec.pool_stride = 32;
    Model model = init_model(spec, 7);

    const auto x = random_signal(512, 16000, 11);
    const int frames = (512 - 64) / 32 + 1;
    Matrix targets(kNumPitchClasses, frames);
    Rng rng(3);
    for (auto& v : targets.v) v = rng.uniform01() < 0.3 ? 1.0 : 0.0;

    auto loss_at = [&]() {
        const Matrix logits = model_forward(model, x, CombMode::training, nullptr);
        return bce_with_logits(logits, targets).loss;
    };
    ForwardCache cache;
    const Matrix logits = model_forward(model, x, CombMode::training, &cache);
    const auto bce = bce_with_logits(logits, targets);
    const auto grads = model_backward(model, cache, bce.grad);

    const double eps = 1e-6;
    auto check_tensor = [&](std::vector<double>& params, const std::vector<double>& grad,
                            std::size_t stride) {
        REQUIRE(grad.size() == params.size());
        for (std::size_t i = 0; i < params.size(); i += stride) {
            const double saved = params[i];
            params[i] = saved + eps;
            const double up = loss_at();
            params[i] = saved - eps;
            const double down = loss_at();
            params[i] = saved;
            const double fd = (up - down) / (2.0 * eps);
            CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-3).scale(1e-6));
        }
    };
    check_tensor(model.conv_front.weight, grads.conv_front_weight, 7);
    check_tensor(model.conv_front.bias, grads.conv_front_bias, 1);
    check_tensor(model.conv2.weight, grads.conv2_weight, 13);
    check_tensor(model.conv2.bias, grads.conv2_bias, 1);
    check_tensor(model.conv3.weight, grads.conv3_weight, 17);
    check_tensor(model.conv3.bias, grads.conv3_bias, 1);
}

TEST_CASE("model checkpoint round trip preserves behavior") {
    ModelSpec spec;
    spec.channels = 4;
    Model model = init_model(spec, 21);
    const auto path = fs::temp_directory_path() / "combnet_model_rt.cmbt";
    save_model(path, model);
    const Model loaded = load_model(path);
    fs::remove(path);

    CHECK(loaded.spec.channels == 4);
    CHECK(loaded.spec.scaling.f_min_hz == 200.0);
    REQUIRE(loaded.comb.w.size() == model.comb.w.size());
    // the archive stores f32, so compare against the rounded originals
    for (std::size_t i = 0; i < model.comb.w.size(); ++i) {
        CHECK(loaded.comb.w[i] == static_cast<double>(static_cast<float>(model.comb.w[i])));
    }
    const auto x = random_signal(4096, 16000, 5);
    const auto a = model_forward(model, x, CombMode::inference, nullptr);
    const auto b = model_forward(loaded, x, CombMode::inference, nullptr);
    REQUIRE(a.v.size() == b.v.size());
    for (std::size_t i = 0; i < a.v.size(); ++i) {
        CHECK(a.v[i] == doctest::Approx(b.v[i]).epsilon(1e-5));
    }
}

TEST_CASE("f0 cluster counting merges channels within 1 Hz") {
    CHECK(count_f0_clusters({}) == 0);
    CHECK(count_f0_clusters({300.0}) == 1);
    CHECK(count_f0_clusters({300.0, 300.5, 299.8}) == 1);
    CHECK(count_f0_clusters({300.0, 305.0, 305.9, 400.0}) == 3);
}

TEST_CASE("short training run on a tiny dataset") {
    const auto data = temp_dir("combnet_train_data");
    generate_dataset(data, "train", 100, 4, 16000, 1024, 512);
    generate_dataset(data, "valid", 100100, 2, 16000, 1024, 512);
    const auto train_m = manifest_read(data / "train_manifest.txt");
    const auto valid_m = manifest_read(data / "valid_manifest.txt");

    ModelSpec spec;
    spec.channels = 4;
    TrainConfig cfg;
    cfg.lr = 1e-2;
    cfg.max_steps = 40;
    cfg.batch_size = 2;
    cfg.eval_interval = 20;
    cfg.crop_seconds = 1.0;
    cfg.seed = 17;

    const auto out = temp_dir("combnet_train_out");
    const auto res = train_model(spec, data, train_m, valid_m, cfg, out, "smoke");

    CHECK_FALSE(res.diverged);
    CHECK(res.steps_run == 40);
    REQUIRE(res.losses.size() == 40);
    for (const double l : res.losses) CHECK(std::isfinite(l));

    // loss should drop on average over a run this short
    double first = 0.0, last = 0.0;
    for (int i = 0; i < 10; ++i) {
        first += res.losses[i];
        last += res.losses[30 + i];
    }
    CHECK(last < first);

    CHECK(fs::exists(res.checkpoint));
    CHECK(fs::exists(out / "losses_smoke.csv"));
    CHECK(fs::exists(out / "comb_params.txt"));
    CHECK(count_lines(out / "losses_smoke.csv") == 41);  // header + one row per step

    // trajectory rows every 10 steps, final row carries the cluster count
    CHECK(res.trajectory_rows == 4);
    const auto traj = out / "trajectory_smoke.csv";
    REQUIRE(fs::exists(traj));
    CHECK(count_lines(traj) == 5);
    std::ifstream in(traj);
    std::string line;
    std::getline(in, line);
    CHECK(line == "step,clusters,f0_1,f0_2,f0_3,f0_4");
    int rows = 0;
    std::string last_line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        ++rows;
        last_line = line;
        std::istringstream ss(line);
        std::string field;
        std::getline(ss, field, ',');  // step
        std::getline(ss, field, ',');  // clusters (may be empty)
        while (std::getline(ss, field, ',')) {
            const double f0 = std::stod(field);
            CHECK(f0 > 200.0);
            CHECK(f0 < 500.0);
        }
    }
    CHECK(rows == 4);
    {
        std::istringstream ss(last_line);
        std::string step_field, cluster_field;
        std::getline(ss, step_field, ',');
        std::getline(ss, cluster_field, ',');
        CHECK(step_field == "40");
        CHECK(std::stoi(cluster_field) == res.f0_clusters);
        CHECK(res.f0_clusters >= 1);
        CHECK(res.f0_clusters <= 4);
    }

    // checkpoint holds the evaluated model; re-evaluation reproduces its score
    if (res.best_val_f1 > 0.0) {
        CHECK(evaluate_f1(res.checkpoint, data, valid_m) ==
              doctest::Approx(res.best_val_f1));
    }

    fs::remove_all(data);
    fs::remove_all(out);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto data = temp_dir("combnet_det_data");
    generate_dataset(data, "train", 300, 3, 16000, 1024, 512);
    const auto train_m = manifest_read(data / "train_manifest.txt");

    ModelSpec spec;
    spec.channels = 3;
    TrainConfig cfg;
    cfg.max_steps = 10;
    cfg.batch_size = 2;
    cfg.eval_interval = 0;
    cfg.crop_seconds = 0.75;
    cfg.seed = 5;

    const auto out1 = temp_dir("combnet_det_a");
    const auto out2 = temp_dir("combnet_det_b");
    train_model(spec, data, train_m, {}, cfg, out1, "det");
    train_model(spec, data, train_m, {}, cfg, out2, "det");

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    CHECK(slurp(out1 / "checkpoint.cmbt") == slurp(out2 / "checkpoint.cmbt"));
    CHECK(slurp(out1 / "losses_det.csv") == slurp(out2 / "losses_det.csv"));
    CHECK(slurp(out1 / "trajectory_det.csv") == slurp(out2 / "trajectory_det.csv"));

    fs::remove_all(data);
    fs::remove_all(out1);
    fs::remove_all(out2);
}

TEST_CASE("an absurd learning rate is reported as divergence") {
    const auto data = temp_dir("combnet_div_data");
    generate_dataset(data, "train", 400, 2, 16000, 1024, 512);
    const auto train_m = manifest_read(data / "train_manifest.txt");

    ModelSpec spec;
    spec.channels = 2;
    TrainConfig cfg;
    cfg.lr = 1e200;
    cfg.max_steps = 20;
    cfg.batch_size = 1;
    cfg.eval_interval = 0;
    cfg.crop_seconds = 0.5;

    const auto out = temp_dir("combnet_div_out");
    const auto res = train_model(spec, data, train_m, {}, cfg, out, "div");
    CHECK(res.diverged);
    CHECK(res.steps_run < 20);
    CHECK(fs::exists(res.checkpoint));
    const Model restored = load_model(res.checkpoint);  // last finite parameters
    for (const double w : restored.comb.w) CHECK(std::isfinite(w));

    fs::remove_all(data);
    fs::remove_all(out);
}

TEST_CASE("run config parsing") {
    const auto path = fs::temp_directory_path() / "combnet_cfg_test.txt";

    SUBCASE("valid config") {
        std::ofstream(path) << "# demo\n"
                               "frontend conv\n"
                               "channels 16\n"
                               "f_min_hz 150\n"
                               "lr 0.005\n"
                               "max_steps 123\n"
                               "data_dir /tmp/data\n"
                               "run_name demo\n";
        const auto cfg = load_run_config(path);
        CHECK(cfg.spec.frontend == Frontend::conv);
        CHECK(cfg.spec.channels == 16);
        CHECK(cfg.spec.scaling.f_min_hz == 150.0);
        CHECK(cfg.train.lr == 0.005);
        CHECK(cfg.train.max_steps == 123);
        CHECK(cfg.data_dir == "/tmp/data");
        CHECK(cfg.run_name == "demo");
        CHECK(cfg.spec.scaling.f_max_hz == 500.0);  // untouched default
    }
    SUBCASE("bad value names the line") {
        std::ofstream(path) << "channels 8\nlr not_a_number\n";
        CHECK_THROWS_WITH_AS(load_run_config(path), doctest::Contains(":2:"),
                             std::runtime_error);
    }
    SUBCASE("unknown key is rejected") {
        std::ofstream(path) << "learning_rate 0.1\n";
        CHECK_THROWS_WITH_AS(load_run_config(path), doctest::Contains("unknown key"),
                             std::runtime_error);
    }
    SUBCASE("missing value is rejected") {
        std::ofstream(path) << "channels\n";
        CHECK_THROWS_WITH_AS(load_run_config(path), doctest::Contains("missing value"),
                             std::runtime_error);
    }
    fs::remove(path);
}

TEST_CASE("pareto sweep dry run writes the cost table") {
    const auto out = temp_dir("combnet_sweep_dry");
    TrainConfig cfg;
    const auto rows = sweep_pareto({1, 2, 4, 8, 16}, "/nonexistent", cfg, out, true);
    REQUIRE(rows.size() == 10);
    for (const auto& row : rows) {
        CHECK((row.frontend == "comb" || row.frontend == "conv"));
        CHECK(row.params > 0);
        CHECK(row.macs_per_sample > 0.0);
        CHECK(row.f1 < 0.0);  // dry run: nothing trained
    }
    REQUIRE(fs::exists(out / "pareto.csv"));
    std::ifstream in(out / "pareto.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "frontend,channels,params,macs_per_sample,f1");
    CHECK(count_lines(out / "pareto.csv") == 11);
    CHECK(fs::exists(out / "dominance.txt"));
    fs::remove_all(out);
}
