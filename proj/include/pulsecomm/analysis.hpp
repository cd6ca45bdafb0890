// analysis.hpp
//  Matching of sent and traced pulses and the QoS / spike statistics built
//  on it. Times are biological ms unless a name says otherwise.
#ifndef PULSECOMM_ANALYSIS_HPP
#define PULSECOMM_ANALYSIS_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "json.hpp"

#include "pulsecomm/simcore.hpp"
#include "pulsecomm/spikegen.hpp"
#include "pulsecomm/trace.hpp"

namespace pulsecomm
{

struct MatchedPair
{
    std::uint8_t hicann{0};
    std::uint16_t label9{0};
    double sent_ms{0.0};
    double traced_ms{0.0};

    [[nodiscard]] double delay_ms() const { return traced_ms - sent_ms; }
    bool operator==(const MatchedPair &) const = default;
};

struct LostPulse
{
    std::uint8_t hicann{0};
    std::uint16_t label9{0};
    double sent_ms{0.0};

    bool operator==(const LostPulse &) const = default;
};

struct MatchResult
{
    std::vector<MatchedPair> pairs; // sorted by (hicann, label9, sent)
    std::vector<LostPulse> losses; // same order

    [[nodiscard]] std::size_t sent_count() const { return pairs.size() + losses.size(); }
};

// Ground truth matching through pulse ids. Pulses that never reached the
// trace memory are losses. BEG pulses count as sent at their emit time.
MatchResult match_oracle(const GroundTruthLog &log, const TraceMemory &trace);

// Matching from spike times alone. Per (hicann, label9) the traced pulses
// are aligned in order onto a subsequence of the sent pulses, each delay in
// [0, window_ms]; among all such alignments the one whose consecutive
// delays vary least (sum of squared steps) wins, earliest sent pulses
// first on ties. Throws ConsistencyError if a key has more traced than
// sent pulses or no alignment exists.
MatchResult match_blind(std::span<const LabeledTrain> sent,
        std::span<const LabeledTrain> traced, double window_ms = 20.0);

struct QosSummary
{
    std::size_t sent_count{0};
    std::size_t traced_count{0};
    double loss_fraction{0.0};
    double duration_ms{0.0};
    double sent_rate_hz{0.0};
    double traced_rate_hz{0.0};
    // 24 bits per pulse, technical time base
    double throughput_mbit_s{0.0};
    std::optional<double> mean_delay_ms;
    std::optional<double> jitter_ms; // population standard deviation
    std::optional<double> min_delay_ms;
    std::optional<double> max_delay_ms;
};

inline constexpr double bits_per_pulse = 24.0;

QosSummary qos(const MatchResult &match, double duration_ms);

// Received pulse rate over the span of the traced pulses, in pulses per
// technical second; needs at least two traced pulses
std::optional<double> received_rate_tech(const TraceMemory &trace);

// sigma_ISI / mean_ISI with population sigma; absent below 3 spikes
std::optional<double> cv_isi(const SpikeTrain &train);

struct Histogram
{
    double bin_width{1.0};
    std::vector<std::size_t> counts; // bin k covers [k*w, (k+1)*w)

    [[nodiscard]] std::size_t total() const;
};

Histogram isi_histogram(const SpikeTrain &train, double bin_width_ms);
std::optional<double> min_isi(const SpikeTrain &train);

struct ActivitySeries
{
    double bin_ms{10.0};
    std::vector<double> rate_hz; // total spikes per bin / bin width
};

// Bins cover [0, duration_ms); duration_ms <= 0 means up to the last spike
ActivitySeries network_activity(std::span<const SpikeTrain> trains,
        double bin_ms = 10.0, double duration_ms = 0.0);
ActivitySeries network_activity(std::span<const LabeledTrain> trains,
        double bin_ms = 10.0, double duration_ms = 0.0);

struct IsiDelay
{
    double isi_ms{0.0};
    double delay_ms{0.0};
};

// Sent-side ISI to the preceding pulse of the same key, paired with the
// pulse's delay
std::vector<IsiDelay> delay_vs_isi(std::span<const MatchedPair> pairs);

std::optional<double> pearson(std::span<const double> a, std::span<const double> b);
double mean(std::span<const double> values);
// Sarle's bimodality coefficient; values above 5/9 suggest two modes
std::optional<double> bimodality_coefficient(std::span<const double> values);

// Mean CV_ISI over the trains where it is defined
std::optional<double> mean_cv_isi(std::span<const SpikeTrain> trains);
std::optional<double> mean_cv_isi(std::span<const LabeledTrain> trains);

// hicann,label9,sent_ms,traced_ms,delay_ms
void write_pairs_csv(std::ostream &out, std::span<const MatchedPair> pairs);
// bin_start_ms,count
void write_histogram_csv(std::ostream &out, const Histogram &histogram);
// bin_start_ms,rate_hz
void write_activity_csv(std::ostream &out, const ActivitySeries &series);
// isi_ms,delay_ms
void write_delay_isi_csv(std::ostream &out, std::span<const IsiDelay> points);
nlohmann::json to_json(const QosSummary &summary);

} // namespace pulsecomm

#endif
