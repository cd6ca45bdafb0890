// hicann.cpp
#include "pulsecomm/errors.hpp"
#include "pulsecomm/hicann.hpp"

const char *pulsecomm::mode_name(const HicannMode mode)
{
    switch (mode)
    {
    case HicannMode::off:
        return "off";
    case HicannMode::loopback:
        return "loopback";
    case HicannMode::beg:
        return "beg";
    }
    return "?";
}

void pulsecomm::validate(const HicannConfig &config)
{
    if (config.loopback_latency_ns < 0)
    {
        throw ConfigError("hicann.loopback_latency_ns must be >= 0");
    }
    if (config.beg_label9 >= label9_limit)
    {
        throw ConfigError("hicann.beg_label9 must be < 512");
    }
    validate(config.beg_train);
}

pulsecomm::HicannNode::HicannNode(Engine &engine, const std::uint8_t index,
        const HicannConfig &config, UpstreamChannel &upstream,
        GroundTruthLog *log)
        : engine_(engine)
        , index_(index)
        , config_(config)
        , upstream_(upstream)
        , log_(log)
{
    validate(config_);
}

void pulsecomm::HicannNode::start()
{
    if (config_.mode == HicannMode::beg && !config_.beg_train.times_bio_ms.empty())
    {
        schedule_beg(0);
    }
}

void pulsecomm::HicannNode::schedule_beg(const std::size_t k)
{
    const auto &times = config_.beg_train.times_bio_ms;
    // times are increasing, so the floored tick never lies in the past
    const TimePoint t = floor_to_hicann_grid(bio_to_tech(times[k]));
    engine_.schedule(t, Priority::hicann, [this, k]() {
        std::uint64_t id = 0;
        if (log_ != nullptr)
        {
            id = log_->add_pulse(index_, config_.beg_label9, PulseOrigin::beg,
                    Stage::upstream_emit, engine_.now());
        }
        emit(config_.beg_label9, id);
        if (k + 1 < config_.beg_train.times_bio_ms.size())
        {
            schedule_beg(k + 1);
        }
    });
}

void pulsecomm::HicannNode::on_downstream_arrival(const InFlightPulse &pulse)
{
    ++received_;
    if (log_ != nullptr)
    {
        log_->record(pulse.pulse_id, Stage::hicann_arrival, engine_.now());
    }
    if (config_.mode != HicannMode::loopback)
    {
        throw InvariantViolation("downstream pulse reached a HICANN that is "
                                 "not in loopback mode");
    }
    const std::uint16_t label = pulse.pulse.label9;
    const std::uint64_t id = pulse.pulse_id;
    if (config_.loopback_latency_ns == 0)
    {
        if (log_ != nullptr)
        {
            log_->record(id, Stage::upstream_emit,
                    floor_to_hicann_grid(engine_.now()));
        }
        emit(label, id);
        return;
    }
    const TimePoint t{engine_.now().tech_ns + config_.loopback_latency_ns};
    engine_.schedule(t, Priority::hicann, [this, label, id]() {
        if (log_ != nullptr)
        {
            log_->record(id, Stage::upstream_emit,
                    floor_to_hicann_grid(engine_.now()));
        }
        emit(label, id);
    });
}

void pulsecomm::HicannNode::emit(const std::uint16_t label9, const std::uint64_t pulse_id)
{
    ++emitted_;
    PulseEvent p;
    p.hicann = index_;
    p.label9 = label9;
    p.ts = wrap_timestamp(floor_to_hicann_grid(engine_.now()));
    upstream_.push(InFlightPulse{p, pulse_id});
}
