// characterize.cpp
#include <algorithm>
#include <cmath>

#include "pulsecomm/characterize.hpp"
#include "pulsecomm/errors.hpp"

const char *pulsecomm::kind_name(const TrainKind kind, const bool upstream)
{
    if (kind == TrainKind::regular)
    {
        return "regular";
    }
    return upstream ? "pseudorandom" : "poisson";
}

pulsecomm::TrainKind pulsecomm::parse_kind(const std::string &name)
{
    if (name == "regular")
    {
        return TrainKind::regular;
    }
    if (name == "poisson" || name == "pseudorandom")
    {
        return TrainKind::poisson;
    }
    throw ConfigError("unknown train kind '" + name + "'");
}

namespace
{

void check_setup(const pulsecomm::PointSetup &s)
{
    if (s.hicanns < 1 || s.hicanns > pulsecomm::hicanns_per_fpga)
    {
        throw pulsecomm::ConfigError("hicanns must be in [1, 8]");
    }
    if (!(s.rate_khz > 0.0) || s.pulses < 1)
    {
        throw pulsecomm::ConfigError("rate and pulse count must be positive");
    }
}

double duration_ms(const pulsecomm::PointSetup &s)
{
    return double(s.pulses) / s.rate_khz;
}

} // namespace

pulsecomm::DownstreamPoint pulsecomm::measure_downstream(const PointSetup &setup)
{
    check_setup(setup);
    const double dur = duration_ms(setup);
    const double rate_hz = setup.rate_khz * 1000.0;
    std::vector<LabeledTrain> stimulus;
    for (int h = 0; h < setup.hicanns; ++h)
    {
        LabeledTrain t;
        t.hicann = static_cast<std::uint8_t>(h);
        t.label9 = static_cast<std::uint16_t>(h);
        t.train = setup.kind == TrainKind::regular
                ? gen_regular(rate_hz, dur, 0.0, h)
                : gen_poisson(rate_hz, dur, setup.seed, h);
        stimulus.push_back(std::move(t));
    }
    ExperimentPlan plan = loopback_plan(stimulus);
    plan.link = setup.link;
    plan.packing = setup.packing;
    plan.trace = setup.trace;
    for (HicannConfig &h : plan.hicanns)
    {
        h.loopback_latency_ns = setup.loopback_latency_ns;
    }
    const RunResult result = run(plan);

    DownstreamPoint p;
    p.setup = setup;
    p.match = match_oracle(result.log, result.trace);
    p.qos = qos(p.match, dur);
    if (const auto rx = received_rate_tech(result.trace))
    {
        p.received_mpulses_s = *rx / 1e6;
    }
    p.traced = to_spike_trains(result.trace);
    p.cv_sent = mean_cv_isi(std::span<const LabeledTrain>(stimulus));
    p.cv_traced = mean_cv_isi(std::span<const LabeledTrain>(p.traced));
    for (const LabeledTrain &t : p.traced)
    {
        if (const auto m = min_isi(t.train))
        {
            p.min_traced_isi_ms = std::min(p.min_traced_isi_ms.value_or(*m), *m);
        }
    }
    p.max_packing_shift_ms = tech_to_bio(TimePoint{result.packing.max_shift_ns});
    p.hash = result.hash();
    p.sent = std::move(stimulus);
    return p;
}

pulsecomm::UpstreamPoint pulsecomm::measure_upstream(const PointSetup &setup)
{
    check_setup(setup);
    const double dur = duration_ms(setup);
    const BegMode mode =
            setup.kind == TrainKind::regular ? BegMode::regular : BegMode::pseudorandom;
    ExperimentPlan plan;
    plan.link = setup.link;
    plan.trace = setup.trace;
    for (int h = 0; h < setup.hicanns; ++h)
    {
        HicannConfig &c = plan.hicanns[static_cast<std::size_t>(h)];
        c.mode = HicannMode::beg;
        c.beg_label9 = static_cast<std::uint16_t>(h);
        c.beg_train = gen_beg(setup.rate_khz * 1000.0, mode, dur, setup.seed, h);
    }
    const RunResult result = run(plan);

    UpstreamPoint p;
    p.setup = setup;
    p.sent = result.log.size();
    p.traced = result.log.traced_count();
    p.dropped = result.log.dropped_count();
    p.loss_fraction = p.sent == 0 ? 0.0 : double(p.dropped) / double(p.sent);
    if (const auto rx = received_rate_tech(result.trace))
    {
        p.received_mpulses_s = *rx / 1e6;
    }
    for (const ChannelStats &s : result.upstream)
    {
        p.packets_single += s.packets_single;
        p.packets_double += s.packets_double;
    }
    p.trace_drops = result.trace.drops();
    p.hash = result.hash();
    return p;
}

std::optional<double> pulsecomm::loss_onset(std::span<const double> rates,
        std::span<const double> losses, const double threshold)
{
    if (rates.size() != losses.size())
    {
        throw DomainError("loss_onset: rates and losses differ in length");
    }
    for (std::size_t i = 0; i < rates.size(); ++i)
    {
        if (losses[i] > threshold)
        {
            return rates[i];
        }
    }
    return std::nullopt;
}

std::vector<double> pulsecomm::rate_grid(const double first, const double last, const double step)
{
    if (!(step > 0.0) || last < first)
    {
        throw DomainError("rate_grid: empty grid");
    }
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((last - first) / step + 1e-9));
    for (long k = 0; k <= n; ++k)
    {
        // rounded to 1e-6 so grid points print cleanly
        out.push_back(std::round((first + double(k) * step) * 1e6) / 1e6);
    }
    return out;
}
