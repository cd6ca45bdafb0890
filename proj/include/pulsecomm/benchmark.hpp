// benchmark.hpp
//  Network benchmark: a population of spike trains is spread over HICANNs
//  (8 per FPGA), every FPGA runs its own loopback experiment one after the
//  other, and the traces are merged back by neuron id and compared with the
//  sent activity.
#ifndef PULSECOMM_BENCHMARK_HPP
#define PULSECOMM_BENCHMARK_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "pulsecomm/analysis.hpp"
#include "pulsecomm/experiment.hpp"

namespace pulsecomm
{

inline constexpr int max_neurons_per_hicann = 256;

struct NeuronSlot
{
    int fpga{0};
    std::uint8_t hicann{0}; // within the FPGA
    std::uint16_t label9{0};
};

struct MappingPlan
{
    int neurons_per_hicann{1};
    std::vector<NeuronSlot> assignment; // indexed by neuron id

    [[nodiscard]] int hicann_count() const;
    [[nodiscard]] int fpga_count() const;
    // Inverse lookup; -1 if the slot is unused
    [[nodiscard]] int neuron_at(int fpga, int hicann, int label9) const;
};

// Neuron i goes to global HICANN i / nph, label i % nph
MappingPlan build_mapping(int n_neurons, int neurons_per_hicann);

struct BenchmarkOptions
{
    LinkConfig link{};
    PackingConfig packing{};
    TraceConfig trace{};
    // Run length past the last sent spike; anything not traced by then is lost
    double drain_ms{20.0};
    double activity_bin_ms{10.0};
};

struct BenchmarkPoint
{
    int neurons_per_hicann{0};
    int hicanns{0};
    int fpgas{0};
    std::size_t sent{0};
    std::size_t traced{0};
    std::size_t dropped{0};
    double loss_fraction{0.0};
    std::optional<double> cv_sent;
    std::optional<double> cv_traced;
    std::optional<double> activity_correlation;
    ActivitySeries sent_activity;
    ActivitySeries traced_activity;
    std::vector<SpikeTrain> traced_trains; // by neuron id, source_id = id
    std::uint64_t hash{0};
};

// trains[i] belongs to neuron i; every train must have source_id == i
BenchmarkPoint run_benchmark(std::span<const SpikeTrain> trains,
        const MappingPlan &plan, const BenchmarkOptions &options = {});

// Sweep points run on up to `jobs` threads; results come back in the order
// of `nph_values`
std::vector<BenchmarkPoint> sweep(std::span<const SpikeTrain> trains,
        std::span<const int> nph_values, const BenchmarkOptions &options = {},
        int jobs = 1);

// nph,hicanns,fpgas,sent,traced,loss,cv_sent,cv_traced,activity_correlation
void write_sweep_csv(std::ostream &out, std::span<const BenchmarkPoint> points);

} // namespace pulsecomm

#endif
