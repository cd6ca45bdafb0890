// experiment.cpp
#include <memory>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/experiment.hpp"

pulsecomm::ExperimentPlan pulsecomm::loopback_plan(std::vector<LabeledTrain> stimulus)
{
    ExperimentPlan plan;
    for (const LabeledTrain &t : stimulus)
    {
        plan.hicanns.at(t.hicann).mode = HicannMode::loopback;
    }
    plan.stimulus = std::move(stimulus);
    return plan;
}

std::uint64_t pulsecomm::RunResult::hash() const
{
    std::uint64_t h = log.hash();
    auto mix = [&h](std::uint64_t v) {
        for (int i = 0; i < 8; ++i)
        {
            h ^= (v >> (8 * i)) & 0xFFU;
            h *= 0x100000001B3ULL;
        }
    };
    for (const TraceRecord &r : trace.records)
    {
        mix(r.hicann);
        mix(r.label9);
        mix(r.ts.ticks15);
        mix(static_cast<std::uint64_t>(r.overflow_epoch));
        mix(r.pulse_id);
    }
    return h;
}

namespace
{

void schedule_marker(pulsecomm::Engine &engine, pulsecomm::TraceModule &trace,
        std::int64_t k, std::int64_t duration_ns)
{
    using namespace pulsecomm;
    const TimePoint t{k * wrap_period_ns};
    if (t.tech_ns >= duration_ns)
    {
        return;
    }
    engine.schedule(t, Priority::trace, [&engine, &trace, k, duration_ns]() {
        trace.insert_overflow_marker(engine.now());
        schedule_marker(engine, trace, k + 1, duration_ns);
    });
}

} // namespace

pulsecomm::RunResult pulsecomm::run(const ExperimentPlan &plan)
{
    validate(plan.link);
    validate(plan.trace);
    validate(plan.packing);
    if (plan.duration_ns < 0)
    {
        throw ConfigError("experiment.duration_ns must be >= 0");
    }
    for (const LabeledTrain &t : plan.stimulus)
    {
        if (t.hicann >= hicanns_per_fpga)
        {
            throw ConfigError("stimulus targets HICANN outside [0, 7]");
        }
        if (plan.hicanns[t.hicann].mode != HicannMode::loopback)
        {
            throw ConfigError("stimulus targets HICANN " + std::to_string(t.hicann)
                    + " which is not in loopback mode");
        }
    }

    RunResult result;
    Engine engine;
    GroundTruthLog *log = &result.log;

    PackedImage packed = pack(plan.stimulus, plan.packing);
    std::vector<std::int64_t> requested;
    requested.reserve(packed.report.pulses.size());
    for (const PackedPulse &p : packed.report.pulses)
    {
        requested.push_back(p.requested_ns);
    }

    TraceModule trace(engine, plan.trace, log);
    std::vector<std::unique_ptr<UpstreamChannel>> up;
    std::vector<std::unique_ptr<HicannNode>> nodes;
    std::vector<std::unique_ptr<DownstreamChannel>> down;
    for (int h = 0; h < hicanns_per_fpga; ++h)
    {
        up.push_back(std::make_unique<UpstreamChannel>(engine, plan.link, log,
                [&trace](const InFlightPulse &p) { trace.push(p); }));
        nodes.push_back(std::make_unique<HicannNode>(engine,
                static_cast<std::uint8_t>(h), plan.hicanns[h], *up.back(), log));
        HicannNode *node = nodes.back().get();
        down.push_back(std::make_unique<DownstreamChannel>(engine, plan.link, log,
                [node](const InFlightPulse &p) { node->on_downstream_arrival(p); }));
    }

    PlaybackSettings settings;
    settings.group_overhead_cycles = plan.packing.group_overhead_cycles;
    settings.early_release_limit_cycles = plan.packing.early_release_limit_cycles;
    settings.iterations = plan.playback_iterations;
    PlaybackModule playback(engine, packed.image, std::move(requested), settings, log,
            [&down](const InFlightPulse &p) { down[p.pulse.hicann]->push(p); });

    playback.start();
    for (auto &n : nodes)
    {
        n->start();
    }
    if (plan.duration_ns > 0)
    {
        schedule_marker(engine, trace, 1, plan.duration_ns);
        engine.run_until(TimePoint{plan.duration_ns});
        result.duration = TimePoint{plan.duration_ns};
    }
    else
    {
        // record epochs come from the counter value, so open-ended runs can
        // add the markers once the end is known
        engine.run_all();
        result.duration = TimePoint{engine.now().tech_ns + 1};
        for (std::int64_t k = 1; k * wrap_period_ns < result.duration.tech_ns; ++k)
        {
            trace.insert_overflow_marker(TimePoint{k * wrap_period_ns});
        }
    }
    result.log.finalize(result.duration);

    result.trace = trace.take_memory();
    result.packing = std::move(packed.report);
    for (int h = 0; h < hicanns_per_fpga; ++h)
    {
        result.downstream[h] = down[h]->stats();
        result.upstream[h] = up[h]->stats();
    }
    result.group_starts = playback.group_starts();
    result.events_executed = engine.executed();
    return result;
}
