// spikegen.cpp
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/rng.hpp"
#include "pulsecomm/spikegen.hpp"
#include "pulsecomm/timebase.hpp"

namespace
{

// Stream id reserved for the shared Up/Down state sequence
constexpr std::uint64_t updown_state_stream = 0xD0D0'0000'0000'0001ULL;

void check_rate(const double rate_bio_hz, const char *who)
{
    if (!(rate_bio_hz > 0.0) || !std::isfinite(rate_bio_hz))
    {
        throw pulsecomm::DomainError(std::string(who) +
                ": rate must be positive, got " + std::to_string(rate_bio_hz));
    }
}

void check_duration(const double duration_ms, const char *who)
{
    if (!(duration_ms > 0.0) || !std::isfinite(duration_ms))
    {
        throw pulsecomm::DomainError(
                std::string(who) + ": duration must be positive");
    }
}

// Appends a homogeneous Poisson process on [start, end)
void append_poisson(pulsecomm::CounterRng &rng, const double rate_bio_hz,
        const double start, const double end, std::vector<double> &times)
{
    if (rate_bio_hz <= 0.0)
    {
        return;
    }
    const double mean_isi = 1000.0 / rate_bio_hz;
    double t = start;
    while (true)
    {
        t += rng.next_exponential(mean_isi);
        if (t >= end)
        {
            break;
        }
        if (times.empty() || t > times.back())
        {
            times.push_back(t);
        }
    }
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    {
        s.remove_prefix(1);
    }
    while (!s.empty() &&
            (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    {
        s.remove_suffix(1);
    }
    return s;
}

} // namespace

double pulsecomm::CounterRng::next_exponential(const double mean)
{
    return -mean * std::log(next_open_uniform());
}

void pulsecomm::validate(const SpikeTrain &train)
{
    double last = -1.0;
    for (const double t : train.times_bio_ms)
    {
        if (!std::isfinite(t) || t < 0.0)
        {
            throw ValidationError("spike train " +
                    std::to_string(train.source_id) +
                    ": negative or non-finite time");
        }
        if (t <= last)
        {
            throw ValidationError("spike train " +
                    std::to_string(train.source_id) +
                    ": times not strictly increasing at " + std::to_string(t));
        }
        last = t;
    }
}

pulsecomm::SpikeTrain pulsecomm::gen_regular(const double rate_bio_hz,
        const double duration_ms, const double phase_ms, const int source_id)
{
    check_rate(rate_bio_hz, "gen_regular");
    check_duration(duration_ms, "gen_regular");
    if (phase_ms < 0.0)
    {
        throw DomainError("gen_regular: phase must be >= 0");
    }
    SpikeTrain train{source_id, {}};
    const double isi = 1000.0 / rate_bio_hz;
    for (std::int64_t k = 0;; ++k)
    {
        const double t = phase_ms + double(k) * isi;
        if (t >= duration_ms)
        {
            break;
        }
        train.times_bio_ms.push_back(t);
    }
    return train;
}

pulsecomm::SpikeTrain pulsecomm::gen_poisson(const double rate_bio_hz,
        const double duration_ms, const std::uint64_t seed, const int source_id)
{
    check_rate(rate_bio_hz, "gen_poisson");
    check_duration(duration_ms, "gen_poisson");
    SpikeTrain train{source_id, {}};
    CounterRng rng(seed, static_cast<std::uint64_t>(source_id));
    train.times_bio_ms.reserve(
            static_cast<std::size_t>(rate_bio_hz * duration_ms / 1000.0 * 1.1) +
            16);
    append_poisson(rng, rate_bio_hz, 0.0, duration_ms, train.times_bio_ms);
    return train;
}

pulsecomm::SpikeTrain pulsecomm::gen_beg(const double mean_rate_bio_hz,
        const BegMode mode, const double duration_ms, const std::uint64_t seed,
        const int source_id)
{
    if (mode == BegMode::regular)
    {
        return gen_regular(mean_rate_bio_hz, duration_ms, 0.0, source_id);
    }
    check_rate(mean_rate_bio_hz, "gen_beg");
    check_duration(duration_ms, "gen_beg");
    // Mean ISI in 4 ns ticks: (1000 / rate) ms * 100 ns/ms / 4 ns
    const double mean_ticks = 1000.0 / mean_rate_bio_hz *
            double(ns_per_bio_ms) / double(hicann_tick_ns);
    const double p = std::min(1.0, 1.0 / mean_ticks);
    const double log_q = std::log1p(-p);
    const double tick_ms = double(hicann_tick_ns) / double(ns_per_bio_ms);
    const auto limit_ticks = static_cast<std::int64_t>(
            std::ceil(duration_ms / tick_ms));

    SpikeTrain train{source_id, {}};
    CounterRng rng(seed, static_cast<std::uint64_t>(source_id));
    std::int64_t tick = 0;
    while (true)
    {
        std::int64_t step = 1;
        if (p < 1.0)
        {
            step += static_cast<std::int64_t>(
                    std::floor(std::log(rng.next_open_uniform()) / log_q));
        }
        tick += step;
        if (tick >= limit_ticks)
        {
            break;
        }
        train.times_bio_ms.push_back(double(tick) * tick_ms);
    }
    return train;
}

void pulsecomm::validate(const SurrogateParams &p)
{
    const bool ok = p.n_neurons > 0 && p.frac_excitatory >= 0.0 &&
            p.frac_excitatory <= 1.0 && p.up_rate_hz >= 0.0 &&
            p.down_rate_hz >= 0.0 && p.mean_up_ms > 0.0 &&
            p.mean_down_ms > 0.0 && p.initial_ai_ms >= 0.0 &&
            p.duration_ms > 0.0 && p.inhibitory_rate_scale >= 0.0;
    if (!ok)
    {
        throw DomainError("invalid surrogate parameters");
    }
}

std::vector<std::pair<double, double>> pulsecomm::updown_up_intervals(
        const SurrogateParams &p)
{
    validate(p);
    std::vector<std::pair<double, double>> up;
    CounterRng rng(p.seed, updown_state_stream);
    double t = std::min(p.initial_ai_ms, p.duration_ms);
    if (t > 0.0)
    {
        up.emplace_back(0.0, t);
    }
    bool in_up = false;
    while (t < p.duration_ms)
    {
        const double dwell =
                rng.next_exponential(in_up ? p.mean_up_ms : p.mean_down_ms);
        const double end = std::min(t + dwell, p.duration_ms);
        if (in_up)
        {
            up.emplace_back(t, end);
        }
        t = end;
        in_up = !in_up;
    }
    return up;
}

std::vector<pulsecomm::SpikeTrain> pulsecomm::gen_updown_surrogate(
        const SurrogateParams &p)
{
    const auto up = updown_up_intervals(p);
    const int n_exc = static_cast<int>(
            std::lround(p.frac_excitatory * double(p.n_neurons)));

    std::vector<SpikeTrain> trains;
    trains.reserve(static_cast<std::size_t>(p.n_neurons));
    for (int i = 0; i < p.n_neurons; ++i)
    {
        const double scale = (i < n_exc) ? 1.0 : p.inhibitory_rate_scale;
        CounterRng rng(p.seed, static_cast<std::uint64_t>(i));
        SpikeTrain train{i, {}};
        double t = 0.0;
        for (const auto &[start, end] : up)
        {
            append_poisson(rng, p.down_rate_hz * scale, t, start,
                    train.times_bio_ms);
            append_poisson(rng, p.up_rate_hz * scale, start, end,
                    train.times_bio_ms);
            t = end;
        }
        append_poisson(rng, p.down_rate_hz * scale, t, p.duration_ms,
                train.times_bio_ms);
        trains.push_back(std::move(train));
    }
    return trains;
}

std::vector<pulsecomm::SpikeTrain> pulsecomm::parse_spike_csv(
        const std::string &text)
{
    std::map<int, std::vector<double>> by_neuron;
    std::istringstream in(text);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw))
    {
        ++line_no;
        const std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#')
        {
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string_view::npos)
        {
            throw ParseError("expected 'neuron_id,time_ms'", line_no);
        }
        const std::string_view id_text = trim(line.substr(0, comma));
        const std::string_view time_text = trim(line.substr(comma + 1));
        if (line_no == 1 && id_text == "neuron_id")
        {
            continue;
        }
        int id = 0;
        double time = 0.0;
        const auto r1 = std::from_chars(
                id_text.data(), id_text.data() + id_text.size(), id);
        const auto r2 = std::from_chars(
                time_text.data(), time_text.data() + time_text.size(), time);
        if (r1.ec != std::errc{} || r1.ptr != id_text.data() + id_text.size() ||
                r2.ec != std::errc{} ||
                r2.ptr != time_text.data() + time_text.size() || id_text.empty())
        {
            throw ParseError("malformed row '" + std::string(line) + "'",
                    line_no);
        }
        if (id < 0 || !std::isfinite(time) || time < 0.0)
        {
            throw ParseError("negative neuron id or time", line_no);
        }
        by_neuron[id].push_back(time);
    }

    std::vector<SpikeTrain> trains;
    trains.reserve(by_neuron.size());
    for (auto &[id, times] : by_neuron)
    {
        std::sort(times.begin(), times.end());
        const auto dup = std::adjacent_find(times.begin(), times.end());
        if (dup != times.end())
        {
            throw ValidationError("neuron " + std::to_string(id) +
                    ": duplicate spike time " + std::to_string(*dup));
        }
        trains.push_back(SpikeTrain{id, std::move(times)});
    }
    return trains;
}

std::vector<pulsecomm::SpikeTrain> pulsecomm::load_spike_file(
        const std::filesystem::path &path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open spike file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_spike_csv(buffer.str());
}

void pulsecomm::write_spike_file(
        const std::filesystem::path &path, std::span<const SpikeTrain> trains)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
    {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out << "neuron_id,time_ms\n";
    char buf[64];
    for (const SpikeTrain &train : trains)
    {
        for (const double t : train.times_bio_ms)
        {
            const auto res = std::to_chars(buf, buf + sizeof(buf), t);
            out << train.source_id << ',' << std::string_view(buf, res.ptr - buf)
                << '\n';
        }
    }
}
