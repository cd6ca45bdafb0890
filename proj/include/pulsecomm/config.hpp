// config.hpp
//  Run configuration. Sources are layered: built-in defaults, then a JSON
//  file, then command line flags. Unknown keys and out-of-range values are
//  rejected with the offending key path.
//
//  Schema (all keys optional):
//  {
//    "seed": uint, "seeds": int >= 1, "hicanns": 1 | 8, "pulses": int >= 1,
//    "jobs": int >= 1, "out_dir": string,
//    "rates_khz": [number > 0, ...],
//    "kinds": ["regular" | "poisson" | "pseudorandom", ...],
//    "link": {"downstream_fifo_depth", "fixed_link_latency_ns",
//             "merger_depth", "upstream_latency_ns"},
//    "packing": {"max_group_size", "group_overhead_cycles",
//                "delay_compensation_ns", "early_release_limit_cycles"},
//    "trace": {"fifo_depth", "capacity", "pulses_per_cycle"},
//    "hicann": {"loopback_latency_ns"},
//    "loopback": {"kind", "rate_khz", "playback_iterations"},
//    "bench": {"spike_file", "nph", "drain_ms", "activity_bin_ms",
//              "surrogate": {"n_neurons", "frac_excitatory", "up_rate_hz",
//                            "down_rate_hz", "mean_up_ms", "mean_down_ms",
//                            "initial_ai_ms", "duration_ms",
//                            "inhibitory_rate_scale"}}
//  }
#ifndef PULSECOMM_CONFIG_HPP
#define PULSECOMM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "pulsecomm/characterize.hpp"
#include "pulsecomm/spikegen.hpp"

namespace pulsecomm
{

struct LoopbackSettings
{
    std::string kind{"poisson"};
    double rate_khz{0.417};
    int playback_iterations{1};
};

struct BenchSettings
{
    std::string spike_file; // empty: use the surrogate
    SurrogateParams surrogate{};
    std::vector<int> nph{5, 10, 15, 20, 25, 30, 35, 39, 40, 45, 50, 64};
    double drain_ms{20.0};
    double activity_bin_ms{10.0};
};

struct RunConfig
{
    std::uint64_t seed{1};
    int seeds{1};
    int hicanns{1};
    int pulses{20000};
    int jobs{1};
    std::string out_dir;
    std::vector<double> rates_khz; // empty: command default grid
    std::vector<std::string> kinds{"regular", "poisson"};
    LinkConfig link{};
    PackingConfig packing{};
    TraceConfig trace{};
    std::int64_t loopback_latency_ns{0};
    LoopbackSettings loopback{};
    BenchSettings bench{};
};

// Overlays `j` onto `config`; throws ConfigError naming the key path
void apply_json(RunConfig &config, const nlohmann::json &j);
RunConfig load_config(const std::filesystem::path &path, RunConfig base = {});
void validate(const RunConfig &config);
nlohmann::json to_json(const RunConfig &config);

// Point setup for one (kind, rate, seed) of a characterization sweep
PointSetup point_setup(const RunConfig &config, TrainKind kind, double rate_khz,
        std::uint64_t seed);

} // namespace pulsecomm

#endif
