#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pulsecomm/analysis.hpp"
#include "pulsecomm/errors.hpp"
#include "pulsecomm/spikegen.hpp"

using namespace pulsecomm;

namespace
{

std::vector<double> isis(const SpikeTrain &t)
{
    std::vector<double> out;
    for (std::size_t i = 1; i < t.times_bio_ms.size(); ++i)
    {
        out.push_back(t.times_bio_ms[i] - t.times_bio_ms[i - 1]);
    }
    return out;
}

bool strictly_increasing(const SpikeTrain &t)
{
    return std::adjacent_find(t.times_bio_ms.begin(), t.times_bio_ms.end(),
                   [](double a, double b) { return b <= a; })
            == t.times_bio_ms.end();
}

} // namespace

TEST_CASE("regular trains")
{
    const SpikeTrain t = gen_regular(1000.0, 10.0, 0.0);
    REQUIRE(t.times_bio_ms.size() == 10);
    for (int i = 0; i < 10; ++i)
    {
        CHECK(t.times_bio_ms[i] == doctest::Approx(double(i)));
    }
    const SpikeTrain r = gen_regular(417.0, 10000 * 1000.0 / 417.0, 0.0);
    CHECK(r.times_bio_ms.size() == 10000);
    for (const double isi : isis(r))
    {
        REQUIRE(isi == doctest::Approx(2.398).epsilon(1e-3));
    }
    CHECK(*cv_isi(r) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(gen_regular(0.0, 10.0), DomainError);
    CHECK_THROWS_AS(gen_regular(10.0, 0.0), DomainError);
}

TEST_CASE("poisson trains")
{
    const SpikeTrain t = gen_poisson(1000.0, 100000.0, 42);
    const double n = double(t.times_bio_ms.size());
    CHECK(n / 100.0 == doctest::Approx(1000.0).epsilon(0.01));
    const double cv = *cv_isi(t);
    CHECK(cv >= 0.98);
    CHECK(cv <= 1.02);
    CHECK(strictly_increasing(t));
    CHECK(gen_poisson(1000.0, 100000.0, 42) == t);
    CHECK(gen_poisson(1000.0, 100000.0, 43) != t);
    CHECK(gen_poisson(1000.0, 100000.0, 42, 1) != t);
}

TEST_CASE("property: exponential ISI moments within 3 sigma")
{
    for (std::uint64_t seed = 1; seed <= 5; ++seed)
    {
        const SpikeTrain t = gen_poisson(1000.0, 150000.0, seed);
        const std::vector<double> x = isis(t);
        const double n = double(x.size());
        REQUIRE(n >= 1e5);
        const double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
        double var = 0.0;
        for (const double v : x)
        {
            var += (v - m) * (v - m);
        }
        var /= n;
        // exponential with mean 1: sd of the mean is 1/sqrt(n), of the
        // variance sqrt((mu4 - sigma^4)/n) = sqrt(8/n)
        CHECK(std::abs(m - 1.0) < 3.0 / std::sqrt(n));
        CHECK(std::abs(var - 1.0) < 3.0 * std::sqrt(8.0 / n));
    }
}

TEST_CASE("background event generator")
{
    const SpikeTrain reg = gen_beg(2500.0, BegMode::regular, 100.0, 1);
    for (const double isi : isis(reg))
    {
        REQUIRE(isi == doctest::Approx(0.4));
    }
    const SpikeTrain pr = gen_beg(1000.0, BegMode::pseudorandom, 120000.0, 3);
    REQUIRE(pr.times_bio_ms.size() >= 100000);
    const double rate = double(pr.times_bio_ms.size()) / 120.0;
    CHECK(rate == doctest::Approx(1000.0).epsilon(0.02));
    for (const double isi : isis(pr))
    {
        // one 4 ns tick is 0.04 ms
        REQUIRE(isi >= 0.04 - 1e-9);
    }
    CHECK(gen_beg(1000.0, BegMode::pseudorandom, 1000.0, 3) ==
            gen_beg(1000.0, BegMode::pseudorandom, 1000.0, 3));
}

TEST_CASE("surrogate")
{
    SurrogateParams p;
    const auto trains = gen_updown_surrogate(p);
    REQUIRE(trains.size() == 500);
    std::size_t total = 0;
    std::vector<double> cvs;
    for (std::size_t i = 0; i < trains.size(); ++i)
    {
        REQUIRE(trains[i].source_id == int(i));
        REQUIRE(strictly_increasing(trains[i]));
        total += trains[i].times_bio_ms.size();
        if (const auto cv = cv_isi(trains[i]))
        {
            cvs.push_back(*cv);
        }
    }
    const double rate_khz = double(total) / p.duration_ms;
    CHECK(rate_khz == doctest::Approx(19.9).epsilon(0.10));
    std::nth_element(cvs.begin(), cvs.begin() + cvs.size() / 2, cvs.end());
    CHECK(cvs[cvs.size() / 2] > 1.0);
    CHECK(gen_updown_surrogate(p) == trains);
}

TEST_CASE("surrogate without a down state is plain poisson")
{
    SurrogateParams p;
    p.n_neurons = 4;
    p.down_rate_hz = 0.0;
    p.mean_down_ms = 1e12;
    p.initial_ai_ms = p.duration_ms;
    p.seed = 9;
    const auto trains = gen_updown_surrogate(p);
    for (int i = 0; i < 4; ++i)
    {
        CHECK(trains[i] == gen_poisson(p.up_rate_hz, p.duration_ms, 9, i));
    }
}

TEST_CASE("surrogate up intervals")
{
    SurrogateParams p;
    const auto up = updown_up_intervals(p);
    REQUIRE(!up.empty());
    CHECK(up[0].first == 0.0);
    CHECK(up[0].second == doctest::Approx(p.initial_ai_ms));
    for (std::size_t i = 1; i < up.size(); ++i)
    {
        REQUIRE(up[i].first > up[i - 1].second);
        REQUIRE(up[i].second > up[i].first);
    }
    p.mean_up_ms = 0.0;
    CHECK_THROWS_AS(updown_up_intervals(p), DomainError);
}

TEST_CASE("spike file parsing")
{
    const auto one = parse_spike_csv("0,1.0\n0,2.0\n");
    REQUIRE(one.size() == 1);
    CHECK(one[0].times_bio_ms == std::vector<double>{1.0, 2.0});

    const auto sorted = parse_spike_csv("neuron_id,time_ms\n3,5.0\n1,2.0\n3,1.5\n");
    REQUIRE(sorted.size() == 2);
    CHECK(sorted[0].source_id == 1);
    CHECK(sorted[1].times_bio_ms == std::vector<double>{1.5, 5.0});

    CHECK_THROWS_AS(parse_spike_csv("0,1.0\n0,1.0\n"), ValidationError);
    CHECK_THROWS_AS(parse_spike_csv("0;1.0\n"), ParseError);
    CHECK_THROWS_AS(parse_spike_csv("0,abc\n"), ParseError);
    CHECK_THROWS_AS(parse_spike_csv("-1,2\n"), ParseError);
    try
    {
        parse_spike_csv("0,1\n0,x\n");
        FAIL("expected a parse error");
    }
    catch (const ParseError &e)
    {
        CHECK(e.line() == 2);
    }
}

TEST_CASE("spike file round trip")
{
    const std::vector<SpikeTrain> trains{gen_poisson(50.0, 1000.0, 1, 0), gen_poisson(50.0, 1000.0, 1, 1)};
    const auto path = std::filesystem::temp_directory_path() / "pulsecomm_spikes.csv";
    write_spike_file(path, trains);
    CHECK(load_spike_file(path) == trains);
    std::filesystem::remove(path);
}
