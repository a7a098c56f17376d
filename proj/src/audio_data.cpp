#include "combnet/audio_data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "combnet/comb_layer.hpp"

namespace combnet {

double pitch_class_to_hz(int pitch_class) {
    // C4 is 9 semitones below A4
    return 440.0 * std::pow(2.0, (pitch_class - 9) / 12.0);
}

std::vector<NoteEvent> sample_note_sequence(std::uint64_t seed) {
    Rng rng(seed);
    const int count = rng.uniform_int(3, 10);
    std::vector<NoteEvent> events;
    events.reserve(count);
    double cursor = rng.uniform(0.0, 0.2);
    for (int i = 0; i < count; ++i) {
        NoteEvent ev;
        ev.pitch_class = rng.uniform_int(0, 11);
        ev.onset_s = cursor;
        ev.duration_s = rng.uniform(0.2, 1.0);
        ev.velocity = rng.uniform(0.3, 1.0);
        events.push_back(ev);
        cursor = ev.onset_s + ev.duration_s + rng.uniform(0.0, 0.2);
    }
    return events;
}

AudioSignal synthesize_clip(const std::vector<NoteEvent>& events, int sample_rate,
                            bool normalize) {
    double end_s = 0.1;
    for (const auto& ev : events) {
        end_s = std::max(end_s, ev.onset_s + ev.duration_s);
    }
    end_s += 0.1;  // release tail
    const auto total = static_cast<std::size_t>(std::ceil(end_s * sample_rate));
    std::vector<double> acc(total, 0.0);

    constexpr int kHarmonics = 8;
    constexpr double kOnsetRamp = 0.005;
    for (const auto& ev : events) {
        const double f0 = pitch_class_to_hz(ev.pitch_class);
        const auto n0 = static_cast<std::size_t>(std::llround(ev.onset_s * sample_rate));
        const auto n1 = std::min(total, n0 + static_cast<std::size_t>(
                                                std::llround(ev.duration_s * sample_rate)));
        for (std::size_t n = n0; n < n1; ++n) {
            const double t = static_cast<double>(n - n0) / sample_rate;
            double sample = 0.0;
            for (int h = 1; h <= kHarmonics; ++h) {
                sample += (ev.velocity / h) * std::sin(2.0 * M_PI * f0 * h * t);
            }
            const double env = std::exp(-3.0 * t / ev.duration_s);
            const double ramp = t < kOnsetRamp ? t / kOnsetRamp : 1.0;
            acc[n] += sample * env * ramp;
        }
    }

    double peak = 0.0;
    for (const double v : acc) peak = std::max(peak, std::fabs(v));
    const double scale = normalize ? (peak > 0.0 ? 0.9 / peak : 0.0) : 1.0;

    AudioSignal out;
    out.sample_rate = sample_rate;
    out.samples.resize(total);
    for (std::size_t i = 0; i < total; ++i) {
        out.samples[i] = static_cast<float>(acc[i] * scale);
    }
    return out;
}

LabelGrid events_to_labelgrid(const std::vector<NoteEvent>& events, double frame_rate,
                              int num_frames, double center_offset_s) {
    LabelGrid grid;
    grid.frames = num_frames;
    grid.frame_rate = frame_rate;
    grid.active.assign(static_cast<std::size_t>(num_frames) * kNumPitchClasses, 0);
    for (int t = 0; t < num_frames; ++t) {
        const double center = t / frame_rate + center_offset_s;
        for (const auto& ev : events) {
            if (center >= ev.onset_s && center < ev.onset_s + ev.duration_s) {
                grid.active[static_cast<std::size_t>(t) * kNumPitchClasses + ev.pitch_class] = 1;
                break;  // monophonic
            }
        }
    }
    return grid;
}

namespace {

void write_u32(std::ofstream& out, std::uint32_t v) {
    out.write(reinterpret_cast<const char*>(&v), 4);
}
void write_u16(std::ofstream& out, std::uint16_t v) {
    out.write(reinterpret_cast<const char*>(&v), 2);
}

std::uint32_t read_u32(std::ifstream& in) {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
std::uint16_t read_u16(std::ifstream& in) {
    std::uint16_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 2);
    return v;
}

}  // namespace

void wav_write(const std::filesystem::path& path, const AudioSignal& signal) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    const auto n = static_cast<std::uint32_t>(signal.length());
    const std::uint32_t data_bytes = n * 2;
    out.write("RIFF", 4);
    write_u32(out, 36 + data_bytes);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    write_u32(out, 16);
    write_u16(out, 1);  // PCM
    write_u16(out, 1);  // mono
    write_u32(out, static_cast<std::uint32_t>(signal.sample_rate));
    write_u32(out, static_cast<std::uint32_t>(signal.sample_rate) * 2);
    write_u16(out, 2);   // block align
    write_u16(out, 16);  // bits
    out.write("data", 4);
    write_u32(out, data_bytes);
    for (const float v : signal.samples) {
        double scaled = static_cast<double>(v) * 32768.0;
        scaled = std::clamp(scaled, -32768.0, 32767.0);
        const auto s = static_cast<std::int16_t>(std::lrint(scaled));
        out.write(reinterpret_cast<const char*>(&s), 2);
    }
}

AudioSignal wav_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    char tag[5] = {0};
    in.read(tag, 4);
    if (std::strncmp(tag, "RIFF", 4) != 0) {
        throw std::runtime_error(path.string() + ": not a RIFF file");
    }
    read_u32(in);
    in.read(tag, 4);
    if (std::strncmp(tag, "WAVE", 4) != 0) {
        throw std::runtime_error(path.string() + ": not a WAVE file");
    }

    AudioSignal signal;
    std::uint16_t channels = 0;
    std::uint16_t bits = 0;
    bool got_fmt = false;
    while (in.read(tag, 4)) {
        const std::uint32_t size = read_u32(in);
        if (std::strncmp(tag, "fmt ", 4) == 0) {
            const std::uint16_t format = read_u16(in);
            channels = read_u16(in);
            signal.sample_rate = static_cast<int>(read_u32(in));
            read_u32(in);
            read_u16(in);
            bits = read_u16(in);
            if (size > 16) in.seekg(size - 16, std::ios::cur);
            if (format != 1) {
                throw std::runtime_error(path.string() + ": only PCM WAV is supported");
            }
            if (channels != 1) {
                throw std::runtime_error(path.string() + ": only mono WAV is supported");
            }
            if (bits != 16) {
                throw std::runtime_error(path.string() + ": only 16-bit WAV is supported");
            }
            got_fmt = true;
        } else if (std::strncmp(tag, "data", 4) == 0) {
            if (!got_fmt) {
                throw std::runtime_error(path.string() + ": data chunk before fmt");
            }
            const std::uint32_t count = size / 2;
            std::vector<std::int16_t> raw(count);
            in.read(reinterpret_cast<char*>(raw.data()), size);
            if (!in) {
                throw std::runtime_error(path.string() + ": truncated data chunk");
            }
            signal.samples.resize(count);
            for (std::uint32_t i = 0; i < count; ++i) {
                signal.samples[i] = static_cast<float>(raw[i]) / 32768.0f;
            }
            return signal;
        } else {
            in.seekg(size, std::ios::cur);
        }
    }
    throw std::runtime_error(path.string() + ": missing data chunk");
}

void labels_write(const std::filesystem::path& path, const LabelGrid& grid) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << "frame_index,pitch_class\n";
    for (int t = 0; t < grid.frames; ++t) {
        int cls = -1;
        for (int c = 0; c < kNumPitchClasses; ++c) {
            if (grid.at(t, c)) {
                cls = c;
                break;
            }
        }
        out << t << "," << cls << "\n";
    }
}

LabelGrid labels_read(const std::filesystem::path& path, double frame_rate) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string line;
    std::getline(in, line);  // header
    std::vector<int> classes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw std::runtime_error(path.string() + ": malformed label row: " + line);
        }
        classes.push_back(std::stoi(line.substr(comma + 1)));
    }
    LabelGrid grid;
    grid.frames = static_cast<int>(classes.size());
    grid.frame_rate = frame_rate;
    grid.active.assign(static_cast<std::size_t>(grid.frames) * kNumPitchClasses, 0);
    for (int t = 0; t < grid.frames; ++t) {
        if (classes[t] >= 0) {
            grid.active[static_cast<std::size_t>(t) * kNumPitchClasses + classes[t]] = 1;
        }
    }
    return grid;
}

void manifest_write(const std::filesystem::path& path, const DatasetManifest& manifest) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("cannot open " + path.string() + " for writing");
    }
    out << "split " << manifest.split << "\n";
    out << "sample_rate_hz " << manifest.sample_rate << "\n";
    out << "pool_window " << manifest.pool_window << "\n";
    out << "pool_stride " << manifest.pool_stride << "\n";
    out << "count " << manifest.entries.size() << "\n";
    for (const auto& e : manifest.entries) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.6f", e.duration_s);
        out << "clip " << e.clip_path << " " << e.label_path << " " << buf << " " << e.seed
            << "\n";
    }
}

DatasetManifest manifest_read(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open manifest " + path.string());
    }
    DatasetManifest manifest;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string key;
        ss >> key;
        if (key == "split") {
            ss >> manifest.split;
        } else if (key == "sample_rate_hz") {
            ss >> manifest.sample_rate;
        } else if (key == "pool_window") {
            ss >> manifest.pool_window;
        } else if (key == "pool_stride") {
            ss >> manifest.pool_stride;
        } else if (key == "clip") {
            DatasetManifest::Entry e;
            ss >> e.clip_path >> e.label_path >> e.duration_s >> e.seed;
            manifest.entries.push_back(e);
        }
    }
    return manifest;
}

DatasetManifest generate_dataset(const std::filesystem::path& dir, const std::string& split,
                                 std::uint64_t seed_base, int count, int sample_rate,
                                 int pool_window, int pool_stride) {
    std::filesystem::create_directories(dir / split);
    DatasetManifest manifest;
    manifest.split = split;
    manifest.sample_rate = sample_rate;
    manifest.pool_window = pool_window;
    manifest.pool_stride = pool_stride;

    const double frame_rate = static_cast<double>(sample_rate) / pool_stride;
    const double center_offset = 0.5 * pool_window / sample_rate;
    for (int i = 0; i < count; ++i) {
        const std::uint64_t seed = seed_base + static_cast<std::uint64_t>(i);
        const auto events = sample_note_sequence(seed);
        const auto clip = synthesize_clip(events, sample_rate);
        const int frames = pooled_frames(clip.length(), {pool_window, pool_stride});
        const auto grid = events_to_labelgrid(events, frame_rate, frames, center_offset);

        char name[64];
        std::snprintf(name, sizeof(name), "clip_%06llu",
                      static_cast<unsigned long long>(seed));
        const auto clip_rel = split + "/" + name + ".wav";
        const auto label_rel = split + "/" + name + ".csv";
        wav_write(dir / clip_rel, clip);
        labels_write(dir / label_rel, grid);

        DatasetManifest::Entry e;
        e.clip_path = clip_rel;
        e.label_path = label_rel;
        e.duration_s = static_cast<double>(clip.length()) / sample_rate;
        e.seed = seed;
        manifest.entries.push_back(e);
    }
    manifest_write(dir / (split + "_manifest.txt"), manifest);
    return manifest;
}

}  // namespace combnet
