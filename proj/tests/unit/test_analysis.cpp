#include "doctest.h"

#include <cmath>
#include <sstream>

#include "pulsecomm/analysis.hpp"
#include "pulsecomm/errors.hpp"
#include "pulsecomm/experiment.hpp"

using namespace pulsecomm;

namespace
{

struct Loop
{
    std::vector<LabeledTrain> sent;
    RunResult result;
};

// Raw-delay loopback of one train per HICANN
Loop loopback_run(std::vector<SpikeTrain> trains, std::int64_t compensation = 0)
{
    Loop l;
    for (std::size_t h = 0; h < trains.size(); ++h)
    {
        l.sent.push_back({static_cast<std::uint8_t>(h), static_cast<std::uint16_t>(h), std::move(trains[h])});
    }
    ExperimentPlan plan = loopback_plan(l.sent);
    plan.packing.delay_compensation_ns = compensation;
    l.result = run(plan);
    return l;
}

double duration_ms(const RunResult &r)
{
    return tech_to_bio(r.duration);
}

// Reference CV with population sigma, computed from scratch
double cv_reference(const std::vector<double> &t)
{
    std::vector<double> isi;
    for (std::size_t i = 1; i < t.size(); ++i)
    {
        isi.push_back(t[i] - t[i - 1]);
    }
    double m = 0.0;
    for (const double x : isi)
    {
        m += x;
    }
    m /= double(isi.size());
    double v = 0.0;
    for (const double x : isi)
    {
        v += (x - m) * (x - m);
    }
    return std::sqrt(v / double(isi.size())) / m;
}

} // namespace

TEST_CASE("blind matching example")
{
    const std::vector<LabeledTrain> sent{{0, 0, SpikeTrain{0, {1.0, 2.0, 3.0}}}};
    const std::vector<LabeledTrain> traced{{0, 0, SpikeTrain{0, {3.3, 5.3}}}};
    const MatchResult m = match_blind(sent, traced);
    REQUIRE(m.pairs.size() == 2);
    REQUIRE(m.losses.size() == 1);
    CHECK(m.losses[0].sent_ms == 2.0);
    CHECK(m.pairs[0].delay_ms() == doctest::Approx(2.3));
    CHECK(m.pairs[1].delay_ms() == doctest::Approx(2.3));
}

TEST_CASE("blind matching errors")
{
    const std::vector<LabeledTrain> one{{0, 0, SpikeTrain{0, {1.0}}}};
    const std::vector<LabeledTrain> two{{0, 0, SpikeTrain{0, {1.0, 2.0}}}};
    CHECK_THROWS_AS(match_blind(one, two), ConsistencyError);
    const std::vector<LabeledTrain> late{{0, 0, SpikeTrain{0, {50.0}}}};
    CHECK_THROWS_AS(match_blind(one, late), ConsistencyError);
    CHECK_THROWS_AS(match_blind(one, one, 0.0), DomainError);
    // traced key that was never sent
    const std::vector<LabeledTrain> other{{1, 0, SpikeTrain{0, {1.0}}}};
    CHECK_THROWS_AS(match_blind(one, other), ConsistencyError);
}

TEST_CASE("empty trace: everything lost, delays absent")
{
    const std::vector<LabeledTrain> sent{{0, 0, SpikeTrain{0, {1.0, 2.0}}}};
    const MatchResult m = match_blind(sent, {});
    CHECK(m.losses.size() == 2);
    const QosSummary q = qos(m, 10.0);
    CHECK(q.loss_fraction == 1.0);
    CHECK_FALSE(q.mean_delay_ms.has_value());
    CHECK_FALSE(q.jitter_ms.has_value());
    const nlohmann::json j = to_json(q);
    CHECK(j["mean_delay_ms"].is_null());
    CHECK(j["loss_fraction"] == 1.0);
}

TEST_CASE("property: blind equals oracle on lossless runs")
{
    for (std::uint64_t seed = 1; seed <= 6; ++seed)
    {
        std::vector<SpikeTrain> trains;
        const int n = seed % 2 ? 1 : 8;
        for (int h = 0; h < n; ++h)
        {
            trains.push_back(gen_poisson(300.0 + 100.0 * double(seed), 10000.0, seed, h));
        }
        const Loop l = loopback_run(trains);
        REQUIRE(l.result.log.dropped_count() == 0);
        const MatchResult oracle = match_oracle(l.result.log, l.result.trace);
        const auto traced = to_spike_trains(l.result.trace);
        const MatchResult blind = match_blind(l.sent, traced);
        REQUIRE(oracle.losses.empty());
        REQUIRE(blind.losses.empty());
        REQUIRE(blind.pairs.size() == oracle.pairs.size());
        for (std::size_t i = 0; i < blind.pairs.size(); ++i)
        {
            REQUIRE(blind.pairs[i].hicann == oracle.pairs[i].hicann);
            REQUIRE(blind.pairs[i].label9 == oracle.pairs[i].label9);
            // the log keeps requested times rounded to 1 ns = 0.01 ms
            REQUIRE(std::abs(blind.pairs[i].sent_ms - oracle.pairs[i].sent_ms) <= 0.005 + 1e-9);
            REQUIRE(blind.pairs[i].traced_ms == doctest::Approx(oracle.pairs[i].traced_ms));
        }
    }
}

TEST_CASE("property: oracle loss equals the ground-truth drop ratio")
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed)
    {
        const Loop l = loopback_run({gen_poisson(2000.0, 10000.0, seed)});
        const MatchResult m = match_oracle(l.result.log, l.result.trace);
        const QosSummary q = qos(m, duration_ms(l.result));
        CHECK(q.loss_fraction > 0.0);
        CHECK(q.loss_fraction == doctest::Approx(double(l.result.log.dropped_count()) / double(l.result.log.size())));
        CHECK(q.traced_count == l.result.trace.records.size());
    }
}

TEST_CASE("regular 417 Hz: 2.3 ms delay, negligible jitter")
{
    const Loop l = loopback_run({gen_regular(417.0, 10000 * 1000.0 / 417.0)});
    const QosSummary q = qos(match_oracle(l.result.log, l.result.trace), duration_ms(l.result));
    CHECK(q.loss_fraction == 0.0);
    CHECK(*q.mean_delay_ms == doctest::Approx(2.3).epsilon(0.12 / 2.3));
    CHECK(*q.jitter_ms < 0.04);
}

TEST_CASE("poisson 417 Hz: delay and jitter")
{
    const Loop l = loopback_run({gen_poisson(417.0, 10000 * 1000.0 / 417.0, 1)});
    const QosSummary q = qos(match_oracle(l.result.log, l.result.trace), duration_ms(l.result));
    CHECK(q.loss_fraction == 0.0);
    CHECK(*q.mean_delay_ms >= 2.25);
    CHECK(*q.mean_delay_ms <= 2.45);
    CHECK(*q.jitter_ms >= 0.12);
    CHECK(*q.jitter_ms <= 0.30);
}

TEST_CASE("cv_isi")
{
    CHECK(*cv_isi(gen_regular(100.0, 1000.0)) == doctest::Approx(0.0).epsilon(1e-9));
    // ISIs 1, 2, 3: mean 2, sigma sqrt(2/3)
    const SpikeTrain t{0, {0.0, 1.0, 3.0, 6.0}};
    CHECK(*cv_isi(t) == doctest::Approx(std::sqrt(2.0 / 3.0) / 2.0));
    CHECK(*cv_isi(t) == doctest::Approx(0.4082).epsilon(1e-4));
    CHECK_FALSE(cv_isi(SpikeTrain{0, {1.0, 2.0}}).has_value());
    CHECK(*cv_isi(gen_poisson(1000.0, 200000.0, 3)) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("property: cv_isi matches the reference and is scale invariant")
{
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
    {
        SpikeTrain t = gen_poisson(50.0 * double(seed), 2000.0, seed);
        REQUIRE(*cv_isi(t) == doctest::Approx(cv_reference(t.times_bio_ms)).epsilon(1e-12));
        const double c = 0.1 + 0.37 * double(seed);
        SpikeTrain scaled = t;
        for (double &x : scaled.times_bio_ms)
        {
            x *= c;
        }
        REQUIRE(*cv_isi(scaled) == doctest::Approx(*cv_isi(t)).epsilon(1e-9));
    }
}

TEST_CASE("isi histogram")
{
    const Histogram reg = isi_histogram(gen_regular(1000.0, 100.0), 0.1);
    std::size_t occupied = 0;
    for (const auto c : reg.counts)
    {
        occupied += c > 0;
    }
    CHECK(occupied == 1);
    CHECK(reg.total() == 99);
    const SpikeTrain p = gen_poisson(500.0, 1000.0, 1);
    CHECK(isi_histogram(p, 0.05).total() == p.times_bio_ms.size() - 1);
    CHECK_THROWS_AS(isi_histogram(p, 0.0), DomainError);
}

TEST_CASE("traced 1 kHz poisson has no ISI below 0.56 ms")
{
    const Loop l = loopback_run({gen_poisson(1000.0, 20000.0, 5)});
    const auto traced = to_spike_trains(l.result.trace);
    REQUIRE(traced.size() == 1);
    const Histogram h = isi_histogram(traced[0].train, 0.01);
    for (std::size_t b = 0; b < 50; ++b)
    {
        REQUIRE(h.counts.at(b) == 0);
    }
    CHECK(*min_isi(traced[0].train) == doctest::Approx(0.56));
    // 0.56 ms is the most frequent short interval: the serializer pile-up
    CHECK(h.counts.at(56) > h.counts.at(60));
}

TEST_CASE("property: single-HICANN loopback never traces ISIs below 0.56 ms")
{
    for (std::uint64_t seed = 1; seed <= 6; ++seed)
    {
        const double rate = 500.0 * double(seed);
        const Loop l = loopback_run({gen_poisson(rate, 5000.0, seed)}, 228);
        const auto traced = to_spike_trains(l.result.trace);
        REQUIRE(*min_isi(traced.at(0).train) >= 0.56 - 1e-9);
    }
}

TEST_CASE("network activity")
{
    const std::vector<SpikeTrain> flat{gen_regular(1000.0, 100.0)};
    const ActivitySeries a = network_activity(flat, 10.0, 100.0);
    REQUIRE(a.rate_hz.size() == 10);
    for (const double r : a.rate_hz)
    {
        CHECK(r == doctest::Approx(1000.0));
    }
    SurrogateParams p;
    p.duration_ms = 10000.0;
    const auto trains = gen_updown_surrogate(p);
    const ActivitySeries s = network_activity(trains, 10.0, p.duration_ms);
    double spikes = 0.0;
    std::size_t total = 0;
    for (const double r : s.rate_hz)
    {
        spikes += r * s.bin_ms / 1000.0;
    }
    for (const auto &t : trains)
    {
        total += t.times_bio_ms.size();
    }
    CHECK(spikes == doctest::Approx(double(total)));
    // Up/Down switching gives a two-mode activity distribution
    CHECK(*bimodality_coefficient(s.rate_hz) > 5.0 / 9.0);
    const std::vector<SpikeTrain> single_state{gen_poisson(20000.0, 10000.0, 1)};
    CHECK(*bimodality_coefficient(network_activity(single_state, 10.0).rate_hz) < 5.0 / 9.0);
}

TEST_CASE("delay versus ISI")
{
    const std::vector<MatchedPair> pairs{{0, 0, 1.0, 3.3}, {0, 0, 1.28, 3.86}, {0, 0, 5.0, 7.3}, {0, 1, 2.0, 4.3}};
    const auto d = delay_vs_isi(pairs);
    REQUIRE(d.size() == 2);
    CHECK(d[0].isi_ms == doctest::Approx(0.28));
    CHECK(d[0].delay_ms == doctest::Approx(2.58));
    CHECK(d[1].isi_ms == doctest::Approx(3.72));
    CHECK(delay_vs_isi(std::span(pairs).first(1)).empty());
}

TEST_CASE("two pulses 0.28 ms apart: the second waits 0.28 ms in the serializer")
{
    Engine e;
    std::vector<std::int64_t> arrivals;
    DownstreamChannel ch(e, LinkConfig{}, nullptr, [&](const InFlightPulse &) { arrivals.push_back(e.now().tech_ns); });
    e.schedule(TimePoint{800}, Priority::playback, [&] { ch.push({}); });
    e.schedule(TimePoint{828}, Priority::playback, [&] { ch.push({}); });
    e.run_all();
    REQUIRE(arrivals.size() == 2);
    CHECK(arrivals[0] - 800 == 230);
    CHECK(arrivals[1] - 828 == 230 + 28);
}

TEST_CASE("lossless regular run: ISI >= 0.56 ms means baseline delay")
{
    const Loop l = loopback_run({gen_regular(1500.0, 10000.0, 0.0)});
    const MatchResult m = match_oracle(l.result.log, l.result.trace);
    REQUIRE(m.losses.empty());
    for (const IsiDelay &d : delay_vs_isi(m.pairs))
    {
        REQUIRE(d.isi_ms >= 0.56);
        // packing rounds to 8 ns and the stamp floors to 4 ns
        REQUIRE(d.delay_ms == doctest::Approx(2.3).epsilon(0.12 / 2.3));
    }
}

TEST_CASE("statistics helpers")
{
    const std::vector<double> a{1, 2, 3, 4};
    const std::vector<double> b{2, 4, 6, 8};
    const std::vector<double> c{4, 3, 2, 1};
    CHECK(mean(a) == 2.5);
    CHECK(*pearson(a, b) == doctest::Approx(1.0));
    CHECK(*pearson(a, c) == doctest::Approx(-1.0));
    const std::vector<double> flat{1, 1, 1, 1};
    CHECK_FALSE(pearson(a, flat).has_value());
    CHECK(*mean_cv_isi(std::vector<SpikeTrain>{gen_regular(10.0, 1000.0), SpikeTrain{1, {0.0, 1.0, 3.0, 6.0}}}) ==
            doctest::Approx(0.4082 / 2).epsilon(1e-3));
}

TEST_CASE("writers")
{
    std::ostringstream out;
    const std::vector<MatchedPair> pairs{{1, 2, 1.0, 3.3}};
    write_pairs_csv(out, pairs);
    CHECK(out.str().rfind("hicann,label9,sent_ms,traced_ms,delay_ms\n1,2,1,3.3,", 0) == 0);
    std::ostringstream h;
    write_histogram_csv(h, Histogram{0.5, {0, 2}});
    CHECK(h.str() == "bin_start_ms,count\n0,0\n0.5,2\n");
}
