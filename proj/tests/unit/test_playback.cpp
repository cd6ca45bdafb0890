#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/playback.hpp"

using namespace pulsecomm;

namespace
{

PackingConfig raw()
{
    PackingConfig c;
    c.delay_compensation_ns = 0;
    return c;
}

std::vector<std::int64_t> requested(const PackedImage &p)
{
    std::vector<std::int64_t> out;
    for (const PackedPulse &q : p.report.pulses)
    {
        out.push_back(q.requested_ns);
    }
    return out;
}

// Release times (ns) of every pulse, in emission order
std::vector<std::int64_t> play(const PackedImage &p, const PlaybackSettings &s = {}, std::vector<std::int64_t> *starts = nullptr)
{
    Engine e;
    std::vector<std::int64_t> times;
    PlaybackModule m(e, p.image, requested(p), s, nullptr, [&](const InFlightPulse &) { times.push_back(e.now().tech_ns); });
    m.start();
    e.run_all();
    if (starts)
    {
        *starts = m.group_starts();
    }
    return times;
}

} // namespace

TEST_CASE("single pulse")
{
    // 8 ms bio = 800 ns = tick 100
    const std::vector<LabeledTrain> t{{0, 3, SpikeTrain{0, {8.0}}}};
    const PackedImage p = pack(t, raw());
    REQUIRE(p.image.groups.size() == 1);
    CHECK(p.image.groups[0].release.ticks8 == 100);
    CHECK(p.report.pulses[0].shift_ns() == 0);
    CHECK(p.report.shifted == 0);
}

TEST_CASE("185 pulses on one tick")
{
    std::vector<LabeledTrain> t;
    for (int i = 0; i < 185; ++i)
    {
        t.push_back({0, static_cast<std::uint16_t>(i), SpikeTrain{i, {8.0}}});
    }
    const PackedImage p = pack(t, raw());
    REQUIRE(p.image.groups.size() == 2);
    CHECK(p.image.groups[0].pulses.size() == 184);
    CHECK(p.image.groups[1].pulses.size() == 1);
    // group 2 opens at 100 + 184 + 6; the pulse wanted tick 100 + 184
    CHECK(p.image.groups[1].release.ticks8 == 290);
    // shift is actual - desired, so pulse 184 is 190 ticks late; compared
    // with a back-to-back stream (tick 100 + 184) the group boundary costs
    // the 6 overhead ticks, 48 ns
    CHECK(p.report.pulses[184].shift_ns() == 190 * 8);
    CHECK(p.report.pulses[184].actual_ns() - (100 + 184) * 8 == 48);
    CHECK(p.report.pulses[183].shift_ns() == 183 * 8);
    CHECK(p.report.max_shift_ns == 190 * 8);
}

TEST_CASE("compensation moves desired ticks earlier")
{
    const std::vector<LabeledTrain> t{{0, 0, SpikeTrain{0, {8.0, 1.0}}}};
    const PackedImage p = pack(std::vector<LabeledTrain>{{0, 0, SpikeTrain{0, {1.0, 8.0}}}}, PackingConfig{});
    // (100 - 228) clamps to 0, (800 - 228)/8 = 71.5 -> 72
    CHECK(p.report.pulses[0].desired_tick == 0);
    CHECK(p.report.pulses[1].desired_tick == 72);
    CHECK_THROWS_AS(pack(t, PackingConfig{}), ValidationError);
}

TEST_CASE("regular trains below 1.78 kHz come at most 0.12 ms late")
{
    for (const double khz : {0.5, 1.0, 1.5, 1.78})
    {
        const std::vector<LabeledTrain> t{{0, 0, gen_regular(khz * 1000.0, 20000.0 / khz)}};
        const PackedImage p = pack(t, raw());
        CHECK(double(p.report.max_shift_ns) / 100.0 <= 0.12);
    }
}

TEST_CASE("property: never early, ordered groups, bounded emission rate")
{
    std::mt19937_64 gen(3);
    for (int trial = 0; trial < 20; ++trial)
    {
        std::vector<LabeledTrain> t;
        const int n = 1 + int(gen() % 8);
        for (int h = 0; h < n; ++h)
        {
            // up to 20 kHz per HICANN saturates the 121 M/s playback limit
            const double rate = 500.0 + double(gen() % 20000);
            t.push_back({static_cast<std::uint8_t>(h), static_cast<std::uint16_t>(gen() % 512),
                    gen_poisson(rate, 200.0, gen(), h)});
        }
        const PackedImage p = pack(t, PackingConfig{});
        for (const PackedPulse &q : p.report.pulses)
        {
            REQUIRE(q.release_tick >= q.desired_tick);
        }
        for (std::size_t g = 1; g < p.image.groups.size(); ++g)
        {
            REQUIRE(p.image.groups[g].release.ticks8 >=
                    p.image.groups[g - 1].release.ticks8 + std::int64_t(p.image.groups[g - 1].pulses.size()) + 6);
        }

        std::vector<std::int64_t> starts;
        const std::vector<std::int64_t> times = play(p, {}, &starts);
        REQUIRE(times.size() == p.report.pulses.size());
        // emission order equals image order and follows the packed ticks
        for (std::size_t i = 0; i < times.size(); ++i)
        {
            REQUIRE(times[i] == p.report.pulses[i].actual_ns());
        }
        // a window of w ticks holds at most w * 184/190 pulses plus the
        // burst of one group (184 * 6/190 < 6)
        for (const std::int64_t w : {1, 50, 184, 190, 374, 1000, 10000})
        {
            std::size_t lo = 0;
            for (std::size_t hi = 0; hi < times.size(); ++hi)
            {
                while (times[hi] - times[lo] >= w * 8)
                {
                    ++lo;
                }
                REQUIRE(double(hi - lo + 1) <= double(w) * 184.0 / 190.0 + 6.0);
            }
        }
    }
}

TEST_CASE("saturated playback runs at 121 M pulses/s")
{
    std::vector<LabeledTrain> t;
    for (int i = 0; i < 184 * 100; ++i)
    {
        t.push_back({static_cast<std::uint8_t>(i % 8), static_cast<std::uint16_t>(i / 8 % 512), SpikeTrain{i, {0.0}}});
    }
    // every pulse wants tick 0; labels repeat, which pack() accepts
    const PackedImage p = pack(t, raw());
    CHECK(p.image.groups.size() == 100);
    const std::vector<std::int64_t> times = play(p);
    const double rate = double(times.size()) / (double(times.back() + 8 + 6 * 8) * 1e-9);
    CHECK(rate == doctest::Approx(125e6 * 184.0 / 190.0).epsilon(1e-9));
    CHECK(rate / 1e6 == doctest::Approx(121.05).epsilon(1e-3));
}

TEST_CASE("loop mode repeats the image with its occupied span")
{
    const std::vector<LabeledTrain> t{{0, 0, gen_regular(1000.0, 10.0, 0.0)}};
    const PackedImage p = pack(t, raw());
    PlaybackSettings s;
    s.iterations = 3;
    std::vector<std::int64_t> starts;
    const std::vector<std::int64_t> times = play(p, s, &starts);
    REQUIRE(times.size() == 30);
    Engine e;
    PlaybackModule m(e, p.image, requested(p), s, nullptr, [](const InFlightPulse &) {});
    // groups at ticks 0, 12.5.. -> last group tick 113 (900 ns / 8 = 112.5 -> 113)
    CHECK(m.period_ticks() == 113 + 1 + 6);
    REQUIRE(starts.size() == 30);
    for (std::size_t i = 0; i < 10; ++i)
    {
        CHECK(starts[i + 10] == starts[i] + m.period_ticks());
        CHECK(starts[i + 20] == starts[i] + 2 * m.period_ticks());
    }
}

TEST_CASE("early release limit")
{
    const std::vector<LabeledTrain> t{{0, 0, SpikeTrain{0, {8.0}}}};
    const PackedImage p = pack(t, raw());
    PlaybackSettings s;
    s.early_release_limit_cycles = 4;
    CHECK(play(p, s).at(0) == 96 * 8);
}

TEST_CASE("capacity")
{
    CHECK(capacity(PlaybackImage{}).pulses == 0);
    CHECK(capacity(PlaybackImage{}).bytes == 4);
    // 1000 neurons at 10 Hz for 3.5 h bio
    const std::int64_t n = 1000LL * 10 * 3600 * 35 / 10;
    CHECK(n == 126'000'000);
    CHECK_THROWS_AS(memory_budget(n), CapacityError);
    CHECK_NOTHROW(memory_budget(125'000'000));
}

TEST_CASE("release tick limit")
{
    // 2^29 ticks * 8 ns = 4.29 s tech = 42949.67 s bio
    const std::vector<LabeledTrain> t{{0, 0, SpikeTrain{0, {43000.0 * 1000.0}}}};
    CHECK_THROWS_AS(pack(t, raw()), CapacityError);
}

TEST_CASE("config validation")
{
    PackingConfig c;
    c.max_group_size = 185;
    CHECK_THROWS_AS(validate(c), ConfigError);
    c = {};
    c.group_overhead_cycles = 5;
    CHECK_THROWS_AS(validate(c), ConfigError);
}

TEST_CASE("packing report csv")
{
    const PackedImage p = pack(std::vector<LabeledTrain>{{1, 2, SpikeTrain{0, {8.0}}}}, raw());
    std::ostringstream out;
    p.report.write_csv(out);
    CHECK(out.str() == "pulse_id,hicann,label9,requested_ns,desired_ns,actual_ns,shift_ns\n0,1,2,800,800,800,0\n");
}
