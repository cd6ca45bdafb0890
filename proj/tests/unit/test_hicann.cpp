#include "doctest.h"

#include "pulsecomm/errors.hpp"
#include "pulsecomm/hicann.hpp"

using namespace pulsecomm;

namespace
{

struct Harness
{
    Engine engine;
    GroundTruthLog log;
    std::vector<std::pair<std::int64_t, PulseEvent>> out; // delivery time, pulse
    UpstreamChannel up;
    HicannNode node;

    explicit Harness(const HicannConfig &cfg, LinkConfig link = {})
            : up(engine, link, &log, [this](const InFlightPulse &p) { out.emplace_back(engine.now().tech_ns, p.pulse); })
            , node(engine, 2, cfg, up, &log)
    {
    }

    void arrive(std::int64_t t, std::uint16_t label9, std::uint16_t ts15)
    {
        engine.schedule(TimePoint{t}, Priority::hicann, [this, label9, ts15] {
            InFlightPulse p;
            p.pulse = PulseEvent{2, label9, HicannTimestamp{ts15}};
            p.pulse_id = log.add_pulse(2, label9, PulseOrigin::playback, Stage::requested, engine.now());
            node.on_downstream_arrival(p);
        });
    }
};

HicannConfig loopback()
{
    HicannConfig c;
    c.mode = HicannMode::loopback;
    return c;
}

HicannConfig beg(double rate_hz, BegMode mode, double duration_ms)
{
    HicannConfig c;
    c.mode = HicannMode::beg;
    c.beg_label9 = 33;
    c.beg_train = gen_beg(rate_hz, mode, duration_ms, 4);
    return c;
}

} // namespace

TEST_CASE("loopback keeps the label and restamps on arrival")
{
    Harness h(loopback());
    h.arrive(1001, 300, 12345);
    h.arrive(131073, 511, 7);
    h.engine.run_all();
    REQUIRE(h.out.size() == 2);
    CHECK(h.out[0].second.label9 == 300);
    CHECK(h.out[0].second.hicann == 2);
    CHECK(h.out[0].second.ts.ticks15 == 250); // floor(1001 / 4)
    CHECK(h.out[1].second.ts.ticks15 == 0);   // 131073 ns wraps to tick 0
    CHECK(h.out[0].first == 1001 + 56);
    CHECK(h.node.received() == 2);
    CHECK(h.node.emitted() == 2);
    const PulseHistory &p = h.log.pulses()[0];
    CHECK(p.at(Stage::hicann_arrival) == 1001);
    CHECK(p.at(Stage::upstream_emit) == 1000);
}

TEST_CASE("loopback latency delays the emission")
{
    HicannConfig c = loopback();
    c.loopback_latency_ns = 40;
    Harness h(c);
    h.arrive(100, 1, 0);
    h.engine.run_all();
    REQUIRE(h.out.size() == 1);
    CHECK(h.out[0].first == 100 + 40 + 56);
    // the stamp is taken when the pulse enters the merger
    CHECK(h.out[0].second.ts.ticks15 == 35);
}

TEST_CASE("arrival at a HICANN that is not looping back is a bug")
{
    Harness h(HicannConfig{});
    h.arrive(0, 0, 0);
    CHECK_THROWS_AS(h.engine.run_all(), InvariantViolation);
}

TEST_CASE("background generator")
{
    SUBCASE("2.5 kHz regular saturates the link without gaps")
    {
        Harness h(beg(2500.0, BegMode::regular, 4000.0));
        h.node.start();
        h.engine.run_all();
        const ChannelStats &s = h.up.stats();
        CHECK(s.dropped == 0);
        CHECK(s.delivered == 10000);
        // busy from the first emit to the last delivery
        const std::int64_t span = h.out.back().first - h.log.pulses().front().at(Stage::upstream_emit);
        CHECK(s.busy_ns == span);
        for (const auto &[t, p] : h.out)
        {
            REQUIRE(p.label9 == 33);
        }
    }
    SUBCASE("1 kHz regular has no drops")
    {
        Harness h(beg(1000.0, BegMode::regular, 20000.0));
        h.node.start();
        h.engine.run_all();
        CHECK(h.up.stats().dropped == 0);
        CHECK(h.up.stats().delivered == 20000);
        CHECK(h.up.stats().packets_double == 0);
    }
    SUBCASE("empty train schedules nothing")
    {
        HicannConfig c;
        c.mode = HicannMode::beg;
        Harness h(c);
        h.node.start();
        CHECK(h.engine.pending() == 0);
        h.engine.run_all();
        CHECK(h.engine.executed() == 0);
    }
}

TEST_CASE("property: record stamps are non-decreasing between wraps")
{
    Harness h(beg(2000.0, BegMode::pseudorandom, 500.0));
    h.node.start();
    h.engine.run_all();
    REQUIRE(h.out.size() > 500);
    // 500 ms bio = 50 us tech, well inside one wrap period
    for (std::size_t i = 1; i < h.out.size(); ++i)
    {
        REQUIRE(h.out[i].second.ts >= h.out[i - 1].second.ts);
    }
    for (const PulseHistory &p : h.log.pulses())
    {
        REQUIRE(p.origin == PulseOrigin::beg);
        REQUIRE(p.at(Stage::upstream_emit) % 4 == 0);
    }
}

TEST_CASE("hicann config validation")
{
    HicannConfig c = loopback();
    c.loopback_latency_ns = -1;
    CHECK_THROWS_AS(validate(c), ConfigError);
    CHECK(std::string(mode_name(HicannMode::beg)) == "beg");
}
