#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace combnet {

// Mono audio: float storage, double accumulation everywhere downstream.
struct AudioSignal {
    std::vector<float> samples;
    int sample_rate = 0;

    std::size_t length() const { return samples.size(); }
};

// Deterministic RNG with platform-independent uniform draws.
// std::uniform_*_distribution is implementation-defined, so we derive
// values from the raw mt19937_64 stream ourselves.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    // uniform in [0, 1)
    double uniform01() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // uniform integer in [lo, hi] inclusive
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
        return lo + static_cast<int>(gen_() % span);
    }

private:
    std::mt19937_64 gen_;
};

}  // namespace combnet
