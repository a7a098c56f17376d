#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "combnet/signal.hpp"

namespace combnet {

constexpr int kNumPitchClasses = 12;

// Monophonic note: pitch class within octave 4 (C=0 .. B=11).
struct NoteEvent {
    int pitch_class = 0;
    double onset_s = 0.0;
    double duration_s = 0.0;
    double velocity = 1.0;
};

// Frame-aligned binary note activations, frames x 12, row-major.
struct LabelGrid {
    int frames = 0;
    double frame_rate = 0.0;
    std::vector<std::uint8_t> active;  // frames * 12

    bool at(int t, int c) const { return active[static_cast<std::size_t>(t) * kNumPitchClasses + c] != 0; }
};

struct DatasetManifest {
    struct Entry {
        std::string clip_path;
        std::string label_path;
        double duration_s = 0.0;
        std::uint64_t seed = 0;
    };
    std::string split;
    int sample_rate = 16000;
    int pool_window = 1024;
    int pool_stride = 512;
    std::vector<Entry> entries;
};

// Equal-tempered frequency of a pitch class in octave 4 (A4 = 440 Hz).
double pitch_class_to_hz(int pitch_class);

// 3..10 sequential notes, uniform pitch class, duration in [0.2, 1.0] s,
// velocity in [0.3, 1.0], silent gaps in [0, 0.2] s. Deterministic per seed.
std::vector<NoteEvent> sample_note_sequence(std::uint64_t seed);

// Additive synthesis: fundamental + harmonics 2..8 at velocity/h, decay
// envelope exp(-3 t / duration), 5 ms onset ramp, peak normalized to 0.9.
AudioSignal synthesize_clip(const std::vector<NoteEvent>& events, int sample_rate,
                            bool normalize = true);

// Frame t is active in class c iff the frame center lies in [onset, onset+dur).
// Frame centers sit at t / frame_rate + center_offset_s.
LabelGrid events_to_labelgrid(const std::vector<NoteEvent>& events, double frame_rate,
                              int num_frames, double center_offset_s);

// 16-bit PCM mono RIFF WAV.
void wav_write(const std::filesystem::path& path, const AudioSignal& signal);
AudioSignal wav_read(const std::filesystem::path& path);

// labels as CSV rows (frame_index, pitch_class or -1)
void labels_write(const std::filesystem::path& path, const LabelGrid& grid);
LabelGrid labels_read(const std::filesystem::path& path, double frame_rate);

void manifest_write(const std::filesystem::path& path, const DatasetManifest& manifest);
DatasetManifest manifest_read(const std::filesystem::path& path);

// Generates count clips with seeds [seed_base, seed_base+count) into dir,
// writing WAVs, label CSVs, and the split manifest. Returns the manifest.
DatasetManifest generate_dataset(const std::filesystem::path& dir, const std::string& split,
                                 std::uint64_t seed_base, int count, int sample_rate,
                                 int pool_window, int pool_stride);

}  // namespace combnet
