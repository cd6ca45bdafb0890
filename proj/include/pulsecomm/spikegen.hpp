// spikegen.hpp
//  Deterministic spike train sources. Every generator is a pure function of
//  its arguments; stochastic ones draw from CounterRng(seed, source_id).
#ifndef PULSECOMM_SPIKEGEN_HPP
#define PULSECOMM_SPIKEGEN_HPP

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace pulsecomm
{

struct SpikeTrain
{
    int source_id{0};
    std::vector<double> times_bio_ms; // strictly increasing, >= 0

    bool operator==(const SpikeTrain &) const = default;
};

// A train addressed to (or recorded from) one HICANN neuron label
struct LabeledTrain
{
    std::uint8_t hicann{0};
    std::uint16_t label9{0};
    SpikeTrain train;

    bool operator==(const LabeledTrain &) const = default;
};

// Throws ValidationError unless times are finite, >= 0, strictly increasing
void validate(const SpikeTrain &train);

SpikeTrain gen_regular(double rate_bio_hz, double duration_ms,
        double phase_ms = 0.0, int source_id = 0);

SpikeTrain gen_poisson(double rate_bio_hz, double duration_ms,
        std::uint64_t seed, int source_id = 0);

enum class BegMode
{
    regular,
    pseudorandom
};

// Background event generator. Pseudo-random mode draws geometric ISIs on the
// 4 ns HICANN clock grid (minimum one tick) with the requested mean.
SpikeTrain gen_beg(double mean_rate_bio_hz, BegMode mode, double duration_ms,
        std::uint64_t seed, int source_id = 0);

struct SurrogateParams
{
    int n_neurons{500};
    double frac_excitatory{0.8};
    // 500 neurons at these settings fire about 19.9 kHz in total
    double up_rate_hz{90.0};
    double down_rate_hz{35.0};
    double mean_up_ms{60.0};
    double mean_down_ms{700.0};
    double initial_ai_ms{700.0};
    double duration_ms{30000.0};
    // Inhibitory neurons fire this many times faster than excitatory ones
    double inhibitory_rate_scale{1.0};
    std::uint64_t seed{1};
};

void validate(const SurrogateParams &params);

// Up/Down switching between two activity levels shared by all neurons.
// The first initial_ai_ms are spent in the Up state; afterwards dwell times
// are exponential. Neuron i gets source_id i; the first
// round(frac_excitatory * n) are excitatory.
std::vector<SpikeTrain> gen_updown_surrogate(const SurrogateParams &params);

// Up-state intervals [start, end) produced for the given parameters
std::vector<std::pair<double, double>> updown_up_intervals(
        const SurrogateParams &params);

// CSV with columns neuron_id,time_ms (header optional). Rows may be in any
// order; trains come back sorted by neuron id and time.
std::vector<SpikeTrain> load_spike_file(const std::filesystem::path &path);
std::vector<SpikeTrain> parse_spike_csv(const std::string &text);
void write_spike_file(
        const std::filesystem::path &path, std::span<const SpikeTrain> trains);

} // namespace pulsecomm

#endif
