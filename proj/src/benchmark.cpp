// benchmark.cpp
#include <algorithm>
#include <ostream>

#include "pulsecomm/benchmark.hpp"
#include "pulsecomm/errors.hpp"
#include "pulsecomm/parallel.hpp"

int pulsecomm::MappingPlan::hicann_count() const
{
    if (assignment.empty())
    {
        return 0;
    }
    const NeuronSlot &last = assignment.back();
    return last.fpga * hicanns_per_fpga + last.hicann + 1;
}

int pulsecomm::MappingPlan::fpga_count() const
{
    return assignment.empty() ? 0 : assignment.back().fpga + 1;
}

int pulsecomm::MappingPlan::neuron_at(const int fpga, const int hicann, const int label9) const
{
    if (label9 < 0 || label9 >= neurons_per_hicann)
    {
        return -1;
    }
    const long id = (long(fpga) * hicanns_per_fpga + hicann) * neurons_per_hicann + label9;
    if (id < 0 || id >= static_cast<long>(assignment.size()))
    {
        return -1;
    }
    return static_cast<int>(id);
}

pulsecomm::MappingPlan pulsecomm::build_mapping(const int n_neurons, const int neurons_per_hicann)
{
    if (n_neurons <= 0)
    {
        throw DomainError("build_mapping: need at least one neuron");
    }
    if (neurons_per_hicann < 1 || neurons_per_hicann > max_neurons_per_hicann)
    {
        throw DomainError("build_mapping: neurons per HICANN must be in [1, 256]");
    }
    MappingPlan plan;
    plan.neurons_per_hicann = neurons_per_hicann;
    plan.assignment.reserve(static_cast<std::size_t>(n_neurons));
    for (int i = 0; i < n_neurons; ++i)
    {
        const int global = i / neurons_per_hicann;
        plan.assignment.push_back({global / hicanns_per_fpga,
                static_cast<std::uint8_t>(global % hicanns_per_fpga),
                static_cast<std::uint16_t>(i % neurons_per_hicann)});
    }
    return plan;
}

pulsecomm::BenchmarkPoint pulsecomm::run_benchmark(std::span<const SpikeTrain> trains,
        const MappingPlan &plan, const BenchmarkOptions &options)
{
    if (trains.size() != plan.assignment.size())
    {
        throw ConfigError("run_benchmark: mapping does not cover every train");
    }
    double end_ms = 0.0;
    for (std::size_t i = 0; i < trains.size(); ++i)
    {
        if (trains[i].source_id != static_cast<int>(i))
        {
            throw ConfigError("run_benchmark: train " + std::to_string(i)
                    + " has source_id " + std::to_string(trains[i].source_id));
        }
        if (!trains[i].times_bio_ms.empty())
        {
            end_ms = std::max(end_ms, trains[i].times_bio_ms.back());
        }
    }
    const double run_ms = end_ms + options.drain_ms;

    BenchmarkPoint point;
    point.neurons_per_hicann = plan.neurons_per_hicann;
    point.hicanns = plan.hicann_count();
    point.fpgas = plan.fpga_count();
    point.traced_trains.resize(trains.size());
    for (std::size_t i = 0; i < trains.size(); ++i)
    {
        point.traced_trains[i].source_id = static_cast<int>(i);
    }

    std::uint64_t hash = 0xCBF29CE484222325ULL;
    for (int f = 0; f < point.fpgas; ++f)
    {
        std::vector<LabeledTrain> stimulus;
        for (std::size_t i = 0; i < trains.size(); ++i)
        {
            const NeuronSlot &slot = plan.assignment[i];
            if (slot.fpga == f)
            {
                stimulus.push_back({slot.hicann, slot.label9, trains[i]});
            }
        }
        ExperimentPlan xp = loopback_plan(std::move(stimulus));
        xp.link = options.link;
        xp.packing = options.packing;
        xp.trace = options.trace;
        xp.duration_ns = bio_to_tech(run_ms).tech_ns;
        const RunResult result = run(xp);

        point.sent += result.log.size();
        point.traced += result.log.traced_count();
        point.dropped += result.log.dropped_count();
        hash = (hash ^ result.hash()) * 0x100000001B3ULL;
        for (const LabeledTrain &lt : to_spike_trains(result.trace))
        {
            const int id = plan.neuron_at(f, lt.hicann, lt.label9);
            if (id < 0)
            {
                throw ConsistencyError("trace holds a label that was never mapped");
            }
            point.traced_trains[static_cast<std::size_t>(id)].times_bio_ms =
                    lt.train.times_bio_ms;
        }
    }
    point.hash = hash;
    point.loss_fraction = point.sent == 0 ? 0.0 : double(point.dropped) / double(point.sent);
    point.cv_sent = mean_cv_isi(trains);
    point.cv_traced = mean_cv_isi(std::span<const SpikeTrain>(point.traced_trains));
    point.sent_activity = network_activity(trains, options.activity_bin_ms, run_ms);
    point.traced_activity = network_activity(
            std::span<const SpikeTrain>(point.traced_trains), options.activity_bin_ms, run_ms);
    point.activity_correlation =
            pearson(point.sent_activity.rate_hz, point.traced_activity.rate_hz);
    return point;
}

std::vector<pulsecomm::BenchmarkPoint> pulsecomm::sweep(std::span<const SpikeTrain> trains,
        std::span<const int> nph_values, const BenchmarkOptions &options, const int jobs)
{
    if (nph_values.empty())
    {
        throw ConfigError("sweep: no neurons-per-HICANN values");
    }
    const int n = static_cast<int>(trains.size());
    std::vector<MappingPlan> plans;
    for (const int nph : nph_values)
    {
        plans.push_back(build_mapping(n, nph));
    }
    std::vector<BenchmarkPoint> out(nph_values.size());
    parallel_for(plans.size(), jobs,
            [&](std::size_t i) { out[i] = run_benchmark(trains, plans[i], options); });
    return out;
}

void pulsecomm::write_sweep_csv(std::ostream &out, std::span<const BenchmarkPoint> points)
{
    auto opt = [&out](const std::optional<double> &v) {
        if (v)
        {
            out << *v;
        }
    };
    out << "nph,hicanns,fpgas,sent,traced,loss,cv_sent,cv_traced,activity_correlation\n";
    for (const BenchmarkPoint &p : points)
    {
        out << p.neurons_per_hicann << ',' << p.hicanns << ',' << p.fpgas << ',' << p.sent
            << ',' << p.traced << ',' << p.loss_fraction << ',';
        opt(p.cv_sent);
        out << ',';
        opt(p.cv_traced);
        out << ',';
        opt(p.activity_correlation);
        out << '\n';
    }
}
