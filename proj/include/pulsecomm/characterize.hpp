// characterize.hpp
//  Single-point loopback (downstream) and BEG (upstream) measurements as
//  used by the characterization sweeps. Rates are per HICANN in kHz
//  biological time.
#ifndef PULSECOMM_CHARACTERIZE_HPP
#define PULSECOMM_CHARACTERIZE_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pulsecomm/analysis.hpp"
#include "pulsecomm/experiment.hpp"

namespace pulsecomm
{

enum class TrainKind
{
    regular,
    poisson, // pseudo-random geometric ISIs for BEG sources
};

const char *kind_name(TrainKind kind, bool upstream = false);
TrainKind parse_kind(const std::string &name);

struct PointSetup
{
    TrainKind kind{TrainKind::regular};
    double rate_khz{1.0};
    int hicanns{1};
    int pulses{20000}; // per HICANN (expected count for stochastic trains)
    std::uint64_t seed{1};
    LinkConfig link{};
    PackingConfig packing{};
    TraceConfig trace{};
    std::int64_t loopback_latency_ns{0};
};

struct DownstreamPoint
{
    PointSetup setup;
    QosSummary qos;
    std::optional<double> received_mpulses_s;
    std::optional<double> cv_sent;
    std::optional<double> cv_traced;
    std::optional<double> min_traced_isi_ms;
    double max_packing_shift_ms{0.0};
    std::uint64_t hash{0};
    std::vector<LabeledTrain> sent;
    std::vector<LabeledTrain> traced;
    MatchResult match;
};

DownstreamPoint measure_downstream(const PointSetup &setup);

struct UpstreamPoint
{
    PointSetup setup;
    std::size_t sent{0};
    std::size_t traced{0};
    std::size_t dropped{0};
    double loss_fraction{0.0};
    std::optional<double> received_mpulses_s;
    std::uint64_t packets_single{0};
    std::uint64_t packets_double{0};
    std::uint64_t trace_drops{0};
    std::uint64_t hash{0};
};

UpstreamPoint measure_upstream(const PointSetup &setup);

// Lowest rate whose loss exceeds `threshold`; rates must be ascending
std::optional<double> loss_onset(std::span<const double> rates,
        std::span<const double> losses, double threshold = 0.0);

// Evenly spaced grid from `first` to `last` inclusive
std::vector<double> rate_grid(double first, double last, double step);

} // namespace pulsecomm

#endif
