// playback.cpp
#include <algorithm>
#include <ostream>

#include "pulsecomm/errors.hpp"
#include "pulsecomm/playback.hpp"

void pulsecomm::validate(const PackingConfig &config)
{
    if (config.max_group_size < 1
            || config.max_group_size > static_cast<int>(max_group_pulses))
    {
        throw ConfigError("packing.max_group_size must be in [1, 184]");
    }
    if (config.group_overhead_cycles < 6)
    {
        throw ConfigError("packing.group_overhead_cycles must be >= 6");
    }
    if (config.delay_compensation_ns < 0)
    {
        throw ConfigError("packing.delay_compensation_ns must be >= 0");
    }
    if (config.early_release_limit_cycles < 0)
    {
        throw ConfigError("packing.early_release_limit_cycles must be >= 0");
    }
}

void pulsecomm::PackingReport::write_csv(std::ostream &out) const
{
    out << "pulse_id,hicann,label9,requested_ns,desired_ns,actual_ns,shift_ns\n";
    for (std::size_t i = 0; i < pulses.size(); ++i)
    {
        const PackedPulse &p = pulses[i];
        out << i << ',' << int(p.hicann) << ',' << p.label9 << ','
            << p.requested_ns << ',' << p.desired_ns() << ',' << p.actual_ns()
            << ',' << p.shift_ns() << '\n';
    }
}

pulsecomm::PackedImage pulsecomm::pack(
        std::span<const LabeledTrain> trains, const PackingConfig &config)
{
    validate(config);
    std::size_t total = 0;
    for (const LabeledTrain &t : trains)
    {
        if (t.hicann >= hicanns_per_fpga || t.label9 >= label9_limit)
        {
            throw DomainError("pack: label out of range");
        }
        validate(t.train);
        total += t.train.times_bio_ms.size();
    }
    // cheap early refusal before allocating; the exact check runs below
    memory_budget(static_cast<std::int64_t>(total),
            static_cast<std::int64_t>(
                    (total + max_group_pulses - 1) / max_group_pulses));

    std::vector<PackedPulse> pulses;
    pulses.reserve(total);
    for (const LabeledTrain &t : trains)
    {
        for (const double ms : t.train.times_bio_ms)
        {
            PackedPulse p;
            p.hicann = t.hicann;
            p.label9 = t.label9;
            p.requested_ns = bio_to_tech(ms).tech_ns;
            const std::int64_t lead = p.requested_ns - config.delay_compensation_ns;
            p.desired_tick = lead <= 0 ? 0 : (lead + fpga_tick_ns - 1) / fpga_tick_ns;
            pulses.push_back(p);
        }
    }
    std::stable_sort(pulses.begin(), pulses.end(),
            [](const PackedPulse &a, const PackedPulse &b) {
                if (a.desired_tick != b.desired_tick)
                {
                    return a.desired_tick < b.desired_tick;
                }
                if (a.requested_ns != b.requested_ns)
                {
                    return a.requested_ns < b.requested_ns;
                }
                if (a.hicann != b.hicann)
                {
                    return a.hicann < b.hicann;
                }
                return a.label9 < b.label9;
            });

    PackedImage out;
    const auto max_size = static_cast<std::size_t>(config.max_group_size);
    std::size_t i = 0;
    std::int64_t next_free = 0;
    while (i < pulses.size())
    {
        const std::int64_t g = std::max(pulses[i].desired_tick, next_free);
        if (g > std::int64_t{payload_mask})
        {
            throw CapacityError("pack: release tick exceeds 29 bits");
        }
        PulseGroup group;
        group.release = FpgaTick{g};
        while (i < pulses.size() && group.pulses.size() < max_size
                && pulses[i].desired_tick
                        <= g + static_cast<std::int64_t>(group.pulses.size()))
        {
            PackedPulse &p = pulses[i];
            p.release_tick = g + static_cast<std::int64_t>(group.pulses.size());
            group.pulses.push_back(PlaybackPulse{make_label14(p.hicann, p.label9),
                    wrap_timestamp(TimePoint{p.requested_ns}).ticks15});
            if (p.release_tick > p.desired_tick)
            {
                ++out.report.shifted;
                out.report.max_shift_ns = std::max(out.report.max_shift_ns, p.shift_ns());
            }
            ++i;
        }
        next_free = g + static_cast<std::int64_t>(group.pulses.size())
                + config.group_overhead_cycles;
        out.image.groups.push_back(std::move(group));
    }
    out.report.pulses = std::move(pulses);
    capacity(out.image);
    return out;
}

pulsecomm::MemoryUsage pulsecomm::capacity(const PlaybackImage &image)
{
    return memory_budget(static_cast<std::int64_t>(image.pulse_count()),
            static_cast<std::int64_t>(image.groups.size()));
}

pulsecomm::PlaybackModule::PlaybackModule(Engine &engine, PlaybackImage image,
        std::vector<std::int64_t> requested_ns, const PlaybackSettings &settings,
        GroundTruthLog *log, Sink sink)
        : engine_(engine)
        , image_(std::move(image))
        , requested_ns_(std::move(requested_ns))
        , settings_(settings)
        , log_(log)
        , sink_(std::move(sink))
{
    if (requested_ns_.size() != image_.pulse_count())
    {
        throw ConfigError("playback: requested times do not match the image");
    }
    if (settings_.iterations < 1)
    {
        throw ConfigError("playback.iterations must be >= 1");
    }
    if (settings_.group_overhead_cycles < 6 || settings_.early_release_limit_cycles < 0)
    {
        throw ConfigError("playback: invalid overhead or release limit");
    }
    std::size_t offset = 0;
    for (const PulseGroup &g : image_.groups)
    {
        group_offset_.push_back(offset);
        offset += g.pulses.size();
    }
    if (!image_.groups.empty())
    {
        const PulseGroup &last = image_.groups.back();
        period_ticks_ = last.release.ticks8 + static_cast<std::int64_t>(last.pulses.size())
                + settings_.group_overhead_cycles - image_.groups.front().release.ticks8;
    }
}

void pulsecomm::PlaybackModule::start()
{
    if (!image_.groups.empty())
    {
        begin_iteration(0);
    }
}

void pulsecomm::PlaybackModule::begin_iteration(const int k)
{
    iteration_ = k;
    pulse_ids_.assign(requested_ns_.size(), 0);
    if (log_ != nullptr)
    {
        const std::int64_t shift = std::int64_t{k} * period_ticks_ * fpga_tick_ns;
        std::size_t idx = 0;
        for (const PulseGroup &g : image_.groups)
        {
            for (const PlaybackPulse &p : g.pulses)
            {
                pulse_ids_[idx] = log_->add_pulse(label14_hicann(p.label14),
                        label14_label9(p.label14), PulseOrigin::playback,
                        Stage::requested, TimePoint{requested_ns_[idx] + shift});
                ++idx;
            }
        }
    }
    schedule_group(0);
}

void pulsecomm::PlaybackModule::schedule_group(const std::size_t g)
{
    const std::int64_t release = image_.groups[g].release.ticks8
            + std::int64_t{iteration_} * period_ticks_;
    std::int64_t start = release - settings_.early_release_limit_cycles;
    if (has_prev_)
    {
        start = std::max(start, prev_end_tick_ + settings_.group_overhead_cycles);
    }
    start = std::max(start, (engine_.now().tech_ns + fpga_tick_ns - 1) / fpga_tick_ns);
    has_prev_ = true;
    prev_end_tick_ = start + static_cast<std::int64_t>(image_.groups[g].pulses.size());
    group_starts_.push_back(start);
    release_pulse(g, 0, start);
}

void pulsecomm::PlaybackModule::release_pulse(
        const std::size_t g, const std::size_t j, const std::int64_t start_tick)
{
    const TimePoint t{(start_tick + static_cast<std::int64_t>(j)) * fpga_tick_ns};
    engine_.schedule(t, Priority::playback, [this, g, j, start_tick]() {
        const PlaybackPulse &p = image_.groups[g].pulses[j];
        const std::size_t idx = group_offset_[g] + j;
        InFlightPulse out;
        out.pulse.hicann = label14_hicann(p.label14);
        out.pulse.label9 = label14_label9(p.label14);
        out.pulse.ts = HicannTimestamp{p.ts15};
        out.pulse_id = pulse_ids_[idx];
        ++released_;
        if (log_ != nullptr)
        {
            log_->record(out.pulse_id, Stage::released, engine_.now());
        }
        sink_(out);
        if (j + 1 < image_.groups[g].pulses.size())
        {
            release_pulse(g, j + 1, start_tick);
        }
        else if (g + 1 < image_.groups.size())
        {
            schedule_group(g + 1);
        }
        else if (iteration_ + 1 < settings_.iterations)
        {
            begin_iteration(iteration_ + 1);
        }
    });
}
