#include <doctest.h>

#include <stdexcept>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "combnet/audio_data.hpp"
#include "combnet/comb_layer.hpp"
#include "test_util.hpp"

using namespace combnet;
using namespace combnet::testutil;
namespace fs = std::filesystem;

TEST_CASE("note sequences stay within the documented ranges") {
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const auto events = sample_note_sequence(seed);
        CHECK(events.size() >= 3);
        CHECK(events.size() <= 10);
        double prev_end = 0.0;
        for (const auto& ev : events) {
            CHECK(ev.pitch_class >= 0);
            CHECK(ev.pitch_class <= 11);
            CHECK(ev.duration_s >= 0.2);
            CHECK(ev.duration_s <= 1.0);
            CHECK(ev.velocity >= 0.3);
            CHECK(ev.velocity <= 1.0);
            CHECK(ev.onset_s >= prev_end);            // monophonic, sequential
            CHECK(ev.onset_s <= prev_end + 0.2 + 1e-9);  // gap at most 0.2 s
            prev_end = ev.onset_s + ev.duration_s;
        }
    }
}

TEST_CASE("note sequences are deterministic per seed") {
    const auto a = sample_note_sequence(42);
    const auto b = sample_note_sequence(42);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].pitch_class == b[i].pitch_class);
        CHECK(a[i].onset_s == b[i].onset_s);
        CHECK(a[i].duration_s == b[i].duration_s);
        CHECK(a[i].velocity == b[i].velocity);
    }
}

TEST_CASE("pitch classes are uniform over many seeds") {
    std::array<long, 12> counts{};
    long total = 0;
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        for (const auto& ev : sample_note_sequence(seed)) {
            ++counts[ev.pitch_class];
            ++total;
        }
    }
    for (const long c : counts) {
        const double freq = static_cast<double>(c) / total;
        CHECK(std::fabs(freq - 1.0 / 12.0) < 0.02);
    }
}

TEST_CASE("a lone C4 note peaks at its fundamental") {
    std::vector<NoteEvent> events{{0, 0.0, 1.0, 0.8}};
    const auto clip = synthesize_clip(events, 16000);
    // naive DFT over 20..2500 Hz at 1 Hz steps; all partials are inside
    double best_mag = 0.0;
    int best_f = 0;
    const auto n = clip.length();
    for (int f = 20; f <= 2500; ++f) {
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double phase = 2.0 * M_PI * f * static_cast<double>(i) / 16000.0;
            re += clip.samples[i] * std::cos(phase);
            im += clip.samples[i] * std::sin(phase);
        }
        const double mag = re * re + im * im;
        if (mag > best_mag) {
            best_mag = mag;
            best_f = f;
        }
    }
    CHECK(std::fabs(best_f - 261.626) <= 1.0 + 16000.0 / n);
}

TEST_CASE("empty event list synthesizes silence") {
    const auto clip = synthesize_clip({}, 16000);
    for (const float v : clip.samples) CHECK(v == 0.0f);
}

TEST_CASE("velocity scales amplitude linearly before normalization") {
    std::vector<NoteEvent> soft{{5, 0.0, 0.5, 0.5}};
    std::vector<NoteEvent> loud{{5, 0.0, 0.5, 1.0}};
    auto rms = [](const AudioSignal& s) {
        double acc = 0.0;
        for (const float v : s.samples) acc += static_cast<double>(v) * v;
        return std::sqrt(acc / s.length());
    };
    const double ratio = rms(synthesize_clip(loud, 16000, false)) /
                         rms(synthesize_clip(soft, 16000, false));
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.01));
}

TEST_CASE("label grid marks frames whose centers fall inside notes") {
    const double frame_rate = 31.25;
    const double offset = 1.0 / frame_rate;

    SUBCASE("one note covering the whole clip") {
        std::vector<NoteEvent> events{{3, 0.0, 10.0, 1.0}};
        const auto grid = events_to_labelgrid(events, frame_rate, 100, offset);
        for (int t = 0; t < 100; ++t) {
            for (int c = 0; c < 12; ++c) CHECK(grid.at(t, c) == (c == 3));
        }
    }
    SUBCASE("silence gives an all-zero grid") {
        const auto grid = events_to_labelgrid({}, frame_rate, 50, offset);
        for (const auto v : grid.active) CHECK(v == 0);
    }
    SUBCASE("note starting exactly at a frame center is counted, note ending there is not") {
        // frame 4 center = 5 / frame_rate = 0.16 s
        std::vector<NoteEvent> starts{{7, 0.16, 0.5, 1.0}};
        CHECK(events_to_labelgrid(starts, frame_rate, 10, offset).at(4, 7));
        std::vector<NoteEvent> ends{{7, 0.0, 0.16, 1.0}};
        CHECK_FALSE(events_to_labelgrid(ends, frame_rate, 10, offset).at(4, 7));
    }
}

TEST_CASE("wav round trip stays within one quantization step") {
    const auto x = random_signal(4097, 16000, 9);
    const auto path = fs::temp_directory_path() / "combnet_wav_test.wav";
    wav_write(path, x);
    const auto y = wav_read(path);
    CHECK(y.sample_rate == 16000);
    REQUIRE(y.length() == x.length());
    for (std::size_t i = 0; i < x.length(); ++i) {
        CHECK(std::fabs(x.samples[i] - y.samples[i]) <= 1.0f / 32768.0f);
    }
    fs::remove(path);
}

TEST_CASE("stereo and truncated wav files are rejected") {
    const auto path = fs::temp_directory_path() / "combnet_bad_test.wav";
    {
        // hand-built stereo header
        std::ofstream out(path, std::ios::binary);
        auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); };
        auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<char*>(&v), 2); };
        out.write("RIFF", 4);
        u32(36);
        out.write("WAVE", 4);
        out.write("fmt ", 4);
        u32(16);
        u16(1);
        u16(2);  // stereo
        u32(16000);
        u32(64000);
        u16(4);
        u16(16);
        out.write("data", 4);
        u32(0);
    }
    CHECK_THROWS_WITH_AS(wav_read(path), doctest::Contains("mono"), std::runtime_error);

    {
        std::ofstream out(path, std::ios::binary);
        out.write("RIFF\x10\x00\x00\x00WA", 10);  // cut off mid-header
    }
    CHECK_THROWS_AS(wav_read(path), std::runtime_error);

    const auto good = fs::temp_directory_path() / "combnet_trunc_test.wav";
    wav_write(good, random_signal(256, 16000, 10));
    {
        // truncate the data chunk
        std::ifstream in(good, std::ios::binary);
        std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
        std::ofstream out(path, std::ios::binary);
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 100));
    }
    CHECK_THROWS_WITH_AS(wav_read(path), doctest::Contains("truncated"), std::runtime_error);
    fs::remove(path);
    fs::remove(good);
}

TEST_CASE("dataset generation is byte-identical per seed") {
    const auto dir1 = fs::temp_directory_path() / "combnet_ds_a";
    const auto dir2 = fs::temp_directory_path() / "combnet_ds_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);
    generate_dataset(dir1, "train", 500, 4, 16000, 1024, 512);
    generate_dataset(dir2, "train", 500, 4, 16000, 1024, 512);

    auto slurp = [](const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string((std::istreambuf_iterator<char>(in)),
                           std::istreambuf_iterator<char>());
    };
    for (const auto& entry : fs::recursive_directory_iterator(dir1)) {
        if (!entry.is_regular_file()) continue;
        const auto rel = fs::relative(entry.path(), dir1);
        CHECK(slurp(entry.path()) == slurp(dir2 / rel));
    }
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("manifest round trip and label/audio consistency") {
    const auto dir = fs::temp_directory_path() / "combnet_ds_c";
    fs::remove_all(dir);
    const auto manifest = generate_dataset(dir, "valid", 900, 6, 16000, 1024, 512);
    const auto loaded = manifest_read(dir / "valid_manifest.txt");
    CHECK(loaded.split == "valid");
    CHECK(loaded.sample_rate == 16000);
    REQUIRE(loaded.entries.size() == manifest.entries.size());

    for (const auto& entry : loaded.entries) {
        const auto clip = wav_read(dir / entry.clip_path);
        const auto grid = labels_read(dir / entry.label_path, 31.25);
        const auto events = sample_note_sequence(entry.seed);

        double labeled_acc = 0.0, silent_acc = 0.0;
        int labeled_n = 0, silent_n = 0;
        for (int t = 0; t < grid.frames; ++t) {
            bool active = false;
            int active_count = 0;
            for (int c = 0; c < 12; ++c) {
                if (grid.at(t, c)) {
                    active = true;
                    ++active_count;
                }
            }
            CHECK(active_count <= 1);  // monophonic

            const std::size_t start = static_cast<std::size_t>(t) * 512;
            double acc = 0.0;
            for (std::size_t n = start; n < start + 1024 && n < clip.length(); ++n) {
                acc += static_cast<double>(clip.samples[n]) * clip.samples[n];
            }
            const double frame_rms = std::sqrt(acc / 1024.0);
            if (active) {
                labeled_acc += frame_rms;
                ++labeled_n;
            } else {
                // count only frames whose window lies entirely in a silent gap
                const double t0 = static_cast<double>(start) / 16000.0;
                const double t1 = t0 + 1024.0 / 16000.0;
                bool overlaps_note = false;
                for (const auto& ev : events) {
                    if (t0 < ev.onset_s + ev.duration_s && t1 > ev.onset_s) {
                        overlaps_note = true;
                    }
                }
                if (!overlaps_note) {
                    silent_acc += frame_rms;
                    ++silent_n;
                }
            }
        }
        REQUIRE(labeled_n > 0);
        const double labeled_mean = labeled_acc / labeled_n;
        const double silent_mean = silent_n > 0 ? silent_acc / silent_n : 0.0;
        CHECK(labeled_mean >= 10.0 * silent_mean);
    }
    fs::remove_all(dir);
}
