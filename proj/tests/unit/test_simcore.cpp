#include "doctest.h"

#include <sstream>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/experiment.hpp"
#include "pulsecomm/simcore.hpp"

using namespace pulsecomm;

namespace
{

ExperimentPlan poisson_plan(double rate_hz, double duration_ms, std::uint64_t seed, int hicanns)
{
    std::vector<LabeledTrain> stim;
    for (int h = 0; h < hicanns; ++h)
    {
        stim.push_back({static_cast<std::uint8_t>(h), static_cast<std::uint16_t>(h),
                gen_poisson(rate_hz, duration_ms, seed, h)});
    }
    return loopback_plan(stim);
}

void check_conservation(const RunResult &r)
{
    std::size_t traced = 0;
    std::size_t dropped = 0;
    for (const PulseHistory &p : r.log.pulses())
    {
        REQUIRE((p.traced() != p.dropped()));
        traced += p.traced();
        dropped += p.dropped();
    }
    CHECK(traced + dropped == r.log.size());
    CHECK(traced == r.trace.records.size());
    CHECK(traced == r.log.traced_count());
    CHECK(dropped == r.log.dropped_count());
}

} // namespace

TEST_CASE("engine orders by time, priority, seq")
{
    Engine e;
    std::vector<int> order;
    e.schedule(TimePoint{10}, Priority::trace, [&] { order.push_back(4); });
    e.schedule(TimePoint{10}, Priority::playback, [&] { order.push_back(1); });
    e.schedule(TimePoint{10}, Priority::hicann, [&] { order.push_back(2); });
    e.schedule(TimePoint{10}, Priority::hicann, [&] { order.push_back(3); });
    e.schedule(TimePoint{5}, Priority::trace, [&] {
        order.push_back(0);
        // an event at now() still runs before later ones
        e.schedule(e.now(), Priority::trace, [&] { order.push_back(-1); });
    });
    e.run_all();
    CHECK(order == std::vector<int>{0, -1, 1, 2, 3, 4});
    CHECK(e.now().tech_ns == 10);
    CHECK_THROWS_AS(e.schedule(TimePoint{9}, Priority::playback, [] {}), InvariantViolation);
}

TEST_CASE("run_until stops before the end time")
{
    Engine e;
    int n = 0;
    for (int t = 0; t < 10; ++t)
    {
        e.schedule(TimePoint{t}, Priority::playback, [&] { ++n; });
    }
    e.run_until(TimePoint{5});
    CHECK(n == 5);
    CHECK(e.pending() == 5);
    e.run_all();
    CHECK(n == 10);
}

TEST_CASE("one million events execute exactly once")
{
    Engine e;
    constexpr int n = 1'000'000;
    std::vector<std::uint8_t> hits(n, 0);
    for (int i = 0; i < n; ++i)
    {
        e.schedule(TimePoint{(i * 7919LL) % 100000}, static_cast<Priority>(i % 4), [&hits, i] { ++hits[i]; });
    }
    e.run_all();
    CHECK(e.executed() == std::uint64_t(n));
    CHECK(std::count(hits.begin(), hits.end(), 1) == n);
}

TEST_CASE("empty plan gives an empty trace")
{
    ExperimentPlan plan;
    plan.duration_ns = 500000;
    const RunResult r = run(plan);
    CHECK(r.trace.records.empty());
    CHECK(r.log.size() == 0);
    CHECK(r.trace.overflow_markers == 3);
}

TEST_CASE("one pulse is traced exactly once")
{
    std::vector<LabeledTrain> stim{{0, 7, SpikeTrain{0, {1.0}}}};
    const RunResult r = run(loopback_plan(stim));
    REQUIRE(r.trace.records.size() == 1);
    CHECK(r.trace.records[0].label9 == 7);
    const PulseHistory &p = r.log.pulses().at(0);
    CHECK(p.traced());
    // 1 ms requested, compensation 228 ns -> released at ceil((100 - 228)/8) -> 0
    CHECK(p.at(Stage::released) == 0);
    CHECK(p.at(Stage::hicann_arrival) == 230);
}

TEST_CASE("stimulus for a HICANN that is not in loopback is rejected")
{
    ExperimentPlan plan = loopback_plan({{0, 1, SpikeTrain{0, {1.0}}}});
    plan.hicanns[0].mode = HicannMode::off;
    CHECK_THROWS_AS(run(plan), ConfigError);
}

TEST_CASE("property: conservation and determinism")
{
    for (std::uint64_t seed = 1; seed <= 4; ++seed)
    {
        // 2.2 kHz per HICANN overloads the downstream links
        const ExperimentPlan plan = poisson_plan(2200.0, 2000.0, seed, seed % 2 ? 1 : 8);
        const RunResult a = run(plan);
        check_conservation(a);
        CHECK(a.log.dropped_count() > 0);
        const RunResult b = run(plan);
        CHECK(a.hash() == b.hash());
        CHECK(a.log.hash() == b.log.hash());
        std::ostringstream sa, sb;
        a.log.write_csv(sa);
        b.log.write_csv(sb);
        CHECK(sa.str() == sb.str());
    }
}

TEST_CASE("property: events run in total order")
{
    // drive the components directly so the observer sees every event
    Engine e;
    GroundTruthLog log;
    LinkConfig cfg;
    TraceModule trace(e, TraceConfig{}, &log);
    UpstreamChannel up(e, cfg, &log, [&](const InFlightPulse &p) { trace.push(p); });
    HicannConfig hc;
    hc.mode = HicannMode::beg;
    hc.beg_train = gen_beg(3000.0, BegMode::pseudorandom, 200.0, 2);
    HicannNode node(e, 0, hc, up, &log);
    TimePoint last_t{-1};
    Priority last_p = Priority::playback;
    std::uint64_t last_seq = 0;
    bool ordered = true;
    e.set_observer([&](const SimEvent &ev) {
        if (ev.time < last_t || (ev.time == last_t && (ev.priority < last_p || (ev.priority == last_p && ev.seq < last_seq))))
        {
            ordered = false;
        }
        last_t = ev.time;
        last_p = ev.priority;
        last_seq = ev.seq;
    });
    node.start();
    e.run_all();
    CHECK(ordered);
    CHECK(e.executed() > 1000);
}

TEST_CASE("finalize marks unfinished pulses as cut off")
{
    ExperimentPlan plan = poisson_plan(1000.0, 100.0, 1, 1);
    plan.duration_ns = 5000;
    const RunResult r = run(plan);
    CHECK(r.log.dropped_at(Stage::cutoff) > 0);
    check_conservation(r);
}

TEST_CASE("stage names")
{
    CHECK(std::string(stage_name(Stage::trace_record)) == "trace_record");
    CHECK(is_drop_stage(Stage::channel_drop));
    CHECK(is_drop_stage(Stage::cutoff));
    CHECK_FALSE(is_drop_stage(Stage::upstream_emit));
}
