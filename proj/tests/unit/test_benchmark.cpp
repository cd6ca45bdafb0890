#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "pulsecomm/benchmark.hpp"
#include "pulsecomm/errors.hpp"
#include "pulsecomm/spikegen.hpp"

using namespace pulsecomm;

namespace
{

std::vector<SpikeTrain> surrogate(std::uint64_t seed, double duration_ms)
{
    SurrogateParams p;
    p.seed = seed;
    p.duration_ms = duration_ms;
    return gen_updown_surrogate(p);
}

// Peak 10 ms bin rate (kHz) of the neurons mapped to one HICANN
double peak_bin_khz(std::span<const SpikeTrain> trains)
{
    const ActivitySeries a = network_activity(trains, 10.0);
    double peak = 0.0;
    for (const double r : a.rate_hz)
    {
        peak = std::max(peak, r);
    }
    return peak / 1000.0;
}

} // namespace

TEST_CASE("mapping counts")
{
    const MappingPlan a = build_mapping(500, 5);
    CHECK(a.hicann_count() == 100);
    CHECK(a.fpga_count() == 13);
    const MappingPlan b = build_mapping(500, 64);
    CHECK(b.hicann_count() == 8);
    CHECK(b.fpga_count() == 1);
    const MappingPlan c = build_mapping(1, 1);
    CHECK(c.hicann_count() == 1);
    CHECK(c.fpga_count() == 1);

    CHECK_THROWS_AS(build_mapping(0, 5), DomainError);
    CHECK_THROWS_AS(build_mapping(10, 0), DomainError);
    CHECK_THROWS_AS(build_mapping(10, 257), DomainError);
}

TEST_CASE("property: mapping is a bijection onto unique slots")
{
    for (const int n : {1, 7, 64, 500, 1031})
    {
        for (const int nph : {1, 3, 5, 39, 64, 256})
        {
            const MappingPlan plan = build_mapping(n, nph);
            const int expect_h = (n + nph - 1) / nph;
            CHECK(plan.hicann_count() == expect_h);
            CHECK(plan.fpga_count() == (n + 8 * nph - 1) / (8 * nph));
            std::vector<std::tuple<int, int, int>> slots;
            for (int i = 0; i < n; ++i)
            {
                const NeuronSlot &s = plan.assignment[static_cast<std::size_t>(i)];
                REQUIRE(s.hicann < 8);
                REQUIRE(s.label9 < nph);
                REQUIRE(plan.neuron_at(s.fpga, s.hicann, s.label9) == i);
                slots.emplace_back(s.fpga, s.hicann, s.label9);
            }
            std::sort(slots.begin(), slots.end());
            CHECK(std::adjacent_find(slots.begin(), slots.end()) == slots.end());
            CHECK(plan.neuron_at(0, 0, nph) == -1);
        }
    }
}

TEST_CASE("run_benchmark checks its inputs")
{
    std::vector<SpikeTrain> trains{gen_regular(100.0, 100.0, 0.0, 0),
            gen_regular(100.0, 100.0, 0.0, 5)};
    CHECK_THROWS_AS(run_benchmark(trains, build_mapping(2, 1)), ConfigError);
    CHECK_THROWS_AS(run_benchmark(trains, build_mapping(3, 1)), ConfigError);
    const std::vector<int> none;
    CHECK_THROWS_AS(sweep(trains, none), ConfigError);
}

TEST_CASE("property: conservation across FPGAs")
{
    const auto trains = surrogate(4, 3000.0);
    for (const int nph : {5, 20, 48})
    {
        const BenchmarkPoint p = run_benchmark(trains, build_mapping(500, nph));
        std::size_t sent = 0;
        for (const SpikeTrain &t : trains)
        {
            sent += t.times_bio_ms.size();
        }
        std::size_t merged = 0;
        for (const SpikeTrain &t : p.traced_trains)
        {
            merged += t.times_bio_ms.size();
        }
        CHECK(p.sent == sent);
        CHECK(p.traced == merged);
        CHECK(p.traced + p.dropped == p.sent);
        CHECK(p.loss_fraction >= 0.0);
        CHECK(p.loss_fraction <= 1.0);
        CHECK(p.fpgas == build_mapping(500, nph).fpga_count());
    }
}

TEST_CASE("property: low per-HICANN rate means no loss")
{
    for (std::uint64_t seed = 1; seed <= 6; ++seed)
    {
        const int nph = 8 + int(seed) * 6;
        const int n = nph * 8 + 3; // spills onto a second FPGA
        const double rate_hz = 500.0 / double(nph);
        std::vector<SpikeTrain> trains;
        for (int i = 0; i < n; ++i)
        {
            trains.push_back(gen_poisson(rate_hz, 2000.0, seed, i));
        }
        const MappingPlan plan = build_mapping(n, nph);
        // precondition measured, not assumed
        for (int h = 0; h < plan.hicann_count(); ++h)
        {
            const auto first = static_cast<std::size_t>(h * nph);
            const auto count = std::min<std::size_t>(nph, trains.size() - first);
            const std::span<const SpikeTrain> group(trains.data() + first, count);
            std::size_t spikes = 0;
            for (const SpikeTrain &t : group)
            {
                spikes += t.times_bio_ms.size();
            }
            REQUIRE(double(spikes) / 2000.0 < 1.0);
            REQUIRE(peak_bin_khz(group) < 1.78);
        }
        const BenchmarkPoint p = run_benchmark(trains, plan);
        CHECK(p.sent > 0);
        CHECK(p.dropped == 0);
        CHECK(p.loss_fraction == 0.0);
    }
}

TEST_CASE("sweep: loss grows with neurons per HICANN")
{
    const std::vector<int> nph{10, 20, 30, 40, 52, 64};
    std::vector<double> mean(nph.size(), 0.0);
    const int seeds = 3;
    for (int s = 1; s <= seeds; ++s)
    {
        const auto trains = surrogate(std::uint64_t(s), 8000.0);
        const auto points = sweep(trains, nph, {}, 4);
        REQUIRE(points.size() == nph.size());
        for (std::size_t i = 0; i < nph.size(); ++i)
        {
            CHECK(points[i].neurons_per_hicann == nph[i]);
            mean[i] += points[i].loss_fraction / seeds;
            if (nph[i] > 39)
            {
                CHECK(points[i].loss_fraction > 0.0);
            }
            if (points[i].loss_fraction > 0.02)
            {
                REQUIRE(points[i].cv_traced.has_value());
                CHECK(*points[i].cv_traced < *points[i].cv_sent);
            }
        }
        // fewer neurons per HICANN never needs fewer FPGAs
        for (std::size_t i = 1; i < points.size(); ++i)
        {
            CHECK(points[i].fpgas <= points[i - 1].fpgas);
        }
    }
    for (std::size_t i = 1; i < nph.size(); ++i)
    {
        CHECK(mean[i] >= mean[i - 1]);
    }
    CHECK(mean.front() < 0.005);
}

TEST_CASE("benchmark is deterministic and job count does not matter")
{
    const auto trains = surrogate(9, 2000.0);
    const std::vector<int> nph{16, 48};
    const auto a = sweep(trains, nph, {}, 1);
    const auto b = sweep(trains, nph, {}, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
    {
        CHECK(a[i].hash == b[i].hash);
        CHECK(a[i].traced == b[i].traced);
        CHECK(a[i].traced_trains[17].times_bio_ms == b[i].traced_trains[17].times_bio_ms);
    }
}

TEST_CASE("activity series and correlation")
{
    const auto trains = surrogate(2, 3000.0);
    const BenchmarkPoint p = run_benchmark(trains, build_mapping(500, 10));
    CHECK(p.sent_activity.rate_hz.size() == p.traced_activity.rate_hz.size());
    REQUIRE(p.activity_correlation.has_value());
    CHECK(*p.activity_correlation > 0.9);
}

TEST_CASE("sweep CSV")
{
    const auto trains = surrogate(3, 1000.0);
    const std::vector<int> nph{8, 64};
    const auto points = sweep(trains, nph);
    std::ostringstream out;
    write_sweep_csv(out, points);
    std::istringstream in(out.str());
    std::string line;
    std::getline(in, line);
    CHECK(line == "nph,hicanns,fpgas,sent,traced,loss,cv_sent,cv_traced,activity_correlation");
    int rows = 0;
    while (std::getline(in, line))
    {
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 8);
    }
    CHECK(rows == 2);
    CHECK(out.str().find("\n8,63,8,") != std::string::npos);
}
