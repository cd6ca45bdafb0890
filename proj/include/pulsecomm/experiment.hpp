// experiment.hpp
//  One FPGA with up to 8 HICANNs: playback -> downstream channels ->
//  HICANNs -> upstream channels -> trace module, all driven by one engine.
#ifndef PULSECOMM_EXPERIMENT_HPP
#define PULSECOMM_EXPERIMENT_HPP

#include <array>
#include <cstdint>
#include <vector>

#include "pulsecomm/hicann.hpp"
#include "pulsecomm/link.hpp"
#include "pulsecomm/playback.hpp"
#include "pulsecomm/trace.hpp"

namespace pulsecomm
{

struct ExperimentPlan
{
    // Playback stimulus; every target HICANN must be in loopback mode
    std::vector<LabeledTrain> stimulus;
    std::array<HicannConfig, hicanns_per_fpga> hicanns{};
    LinkConfig link{};
    PackingConfig packing{};
    TraceConfig trace{};
    int playback_iterations{1};
    // 0: run until every pulse has been traced or dropped
    std::int64_t duration_ns{0};
};

// Stimulus trains all sent to HICANNs in loopback mode
ExperimentPlan loopback_plan(std::vector<LabeledTrain> stimulus);

struct RunResult
{
    GroundTruthLog log;
    TraceMemory trace;
    PackingReport packing;
    std::array<ChannelStats, hicanns_per_fpga> downstream{};
    std::array<ChannelStats, hicanns_per_fpga> upstream{};
    std::vector<std::int64_t> group_starts;
    TimePoint duration{};
    std::uint64_t events_executed{0};

    // Hash of the ground truth log and the trace content
    [[nodiscard]] std::uint64_t hash() const;
};

RunResult run(const ExperimentPlan &plan);

} // namespace pulsecomm

#endif
