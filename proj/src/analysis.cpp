// analysis.cpp
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <tuple>
#include <unordered_map>

#include "pulsecomm/analysis.hpp"
#include "pulsecomm/errors.hpp"

namespace
{

using Key = std::pair<int, int>;

bool pair_less(const pulsecomm::MatchedPair &a, const pulsecomm::MatchedPair &b)
{
    return std::tie(a.hicann, a.label9, a.sent_ms, a.traced_ms)
            < std::tie(b.hicann, b.label9, b.sent_ms, b.traced_ms);
}

bool loss_less(const pulsecomm::LostPulse &a, const pulsecomm::LostPulse &b)
{
    return std::tie(a.hicann, a.label9, a.sent_ms) < std::tie(b.hicann, b.label9, b.sent_ms);
}

} // namespace

pulsecomm::MatchResult pulsecomm::match_oracle(
        const GroundTruthLog &log, const TraceMemory &trace)
{
    std::unordered_map<std::uint64_t, const TraceRecord *> by_id;
    by_id.reserve(trace.records.size());
    for (const TraceRecord &r : trace.records)
    {
        by_id.emplace(r.pulse_id, &r);
    }
    MatchResult out;
    const auto &pulses = log.pulses();
    for (std::size_t id = 0; id < pulses.size(); ++id)
    {
        const PulseHistory &p = pulses[id];
        const Stage first = p.origin == PulseOrigin::playback ? Stage::requested
                                                              : Stage::upstream_emit;
        const double sent = tech_to_bio(TimePoint{p.at(first)});
        const auto it = by_id.find(id);
        if (p.traced() && it != by_id.end())
        {
            out.pairs.push_back(
                    {p.hicann, p.label9, sent, tech_to_bio(it->second->absolute())});
        }
        else
        {
            out.losses.push_back({p.hicann, p.label9, sent});
        }
    }
    // pulses that share a rounded send time keep their trace order
    std::stable_sort(out.pairs.begin(), out.pairs.end(), pair_less);
    std::stable_sort(out.losses.begin(), out.losses.end(), loss_less);
    return out;
}

namespace
{

// Order-preserving alignment of traced onto sent for one key
void align_key(const pulsecomm::LabeledTrain *sent, const pulsecomm::LabeledTrain *traced,
        double window, pulsecomm::MatchResult &out)
{
    using namespace pulsecomm;
    static const std::vector<double> none;
    const std::vector<double> &s = sent != nullptr ? sent->train.times_bio_ms : none;
    const std::vector<double> &r = traced != nullptr ? traced->train.times_bio_ms : none;
    const LabeledTrain *ref = sent != nullptr ? sent : traced;
    const std::uint8_t h = ref->hicann;
    const std::uint16_t l = ref->label9;
    if (r.size() > s.size())
    {
        throw ConsistencyError("match_blind: more traced than sent pulses for hicann "
                + std::to_string(h) + " label " + std::to_string(l));
    }
    constexpr double eps = 1e-9;
    const double inf = std::numeric_limits<double>::infinity();

    // candidates of traced k: sent indices [lo[k], hi[k])
    std::vector<std::size_t> lo(r.size());
    std::vector<std::size_t> hi(r.size());
    for (std::size_t k = 0; k < r.size(); ++k)
    {
        lo[k] = static_cast<std::size_t>(
                std::lower_bound(s.begin(), s.end(), r[k] - window - eps) - s.begin());
        hi[k] = static_cast<std::size_t>(
                std::upper_bound(s.begin(), s.end(), r[k] + eps) - s.begin());
    }
    std::vector<std::vector<double>> cost(r.size());
    std::vector<std::vector<std::size_t>> back(r.size());
    for (std::size_t k = 0; k < r.size(); ++k)
    {
        const std::size_t n = hi[k] > lo[k] ? hi[k] - lo[k] : 0;
        cost[k].assign(n, inf);
        back[k].assign(n, 0);
        for (std::size_t c = 0; c < n; ++c)
        {
            const std::size_t j = lo[k] + c;
            const double d = r[k] - s[j];
            if (k == 0)
            {
                cost[k][c] = 0.0;
                continue;
            }
            for (std::size_t pc = 0; pc < cost[k - 1].size(); ++pc)
            {
                const std::size_t pj = lo[k - 1] + pc;
                if (pj >= j || cost[k - 1][pc] == inf)
                {
                    continue;
                }
                const double step = d - (r[k - 1] - s[pj]);
                const double total = cost[k - 1][pc] + step * step;
                if (total < cost[k][c] - eps)
                {
                    cost[k][c] = total;
                    back[k][c] = pc;
                }
            }
        }
    }
    std::vector<bool> used(s.size(), false);
    if (!r.empty())
    {
        const std::size_t last = r.size() - 1;
        std::size_t best = cost[last].size();
        for (std::size_t c = 0; c < cost[last].size(); ++c)
        {
            if (cost[last][c] < inf
                    && (best == cost[last].size() || cost[last][c] < cost[last][best] - eps))
            {
                best = c;
            }
        }
        if (best == cost[last].size())
        {
            throw ConsistencyError("match_blind: no order-preserving alignment within "
                                   "the delay window for hicann "
                    + std::to_string(h) + " label " + std::to_string(l));
        }
        std::size_t c = best;
        for (std::size_t k = last + 1; k-- > 0;)
        {
            const std::size_t j = lo[k] + c;
            used[j] = true;
            out.pairs.push_back({h, l, s[j], r[k]});
            c = back[k][c];
        }
    }
    for (std::size_t j = 0; j < s.size(); ++j)
    {
        if (!used[j])
        {
            out.losses.push_back({h, l, s[j]});
        }
    }
}

} // namespace

pulsecomm::MatchResult pulsecomm::match_blind(std::span<const LabeledTrain> sent,
        std::span<const LabeledTrain> traced, const double window_ms)
{
    if (!(window_ms > 0.0))
    {
        throw DomainError("match_blind: window must be > 0");
    }
    std::map<Key, std::pair<const LabeledTrain *, const LabeledTrain *>> keys;
    for (const LabeledTrain &t : sent)
    {
        auto &slot = keys[{t.hicann, t.label9}].first;
        if (slot != nullptr)
        {
            throw ConsistencyError("match_blind: duplicate sent key");
        }
        slot = &t;
    }
    for (const LabeledTrain &t : traced)
    {
        auto &slot = keys[{t.hicann, t.label9}].second;
        if (slot != nullptr)
        {
            throw ConsistencyError("match_blind: duplicate traced key");
        }
        slot = &t;
    }
    MatchResult out;
    for (const auto &[key, trains] : keys)
    {
        align_key(trains.first, trains.second, window_ms, out);
    }
    std::sort(out.pairs.begin(), out.pairs.end(), pair_less);
    std::sort(out.losses.begin(), out.losses.end(), loss_less);
    return out;
}

pulsecomm::QosSummary pulsecomm::qos(const MatchResult &match, const double duration_ms)
{
    if (!(duration_ms > 0.0))
    {
        throw DomainError("qos: duration must be > 0");
    }
    QosSummary q;
    q.sent_count = match.sent_count();
    q.traced_count = match.pairs.size();
    q.duration_ms = duration_ms;
    q.loss_fraction = q.sent_count == 0
            ? 0.0
            : double(match.losses.size()) / double(q.sent_count);
    q.sent_rate_hz = double(q.sent_count) / (duration_ms / 1000.0);
    q.traced_rate_hz = double(q.traced_count) / (duration_ms / 1000.0);
    // duration_ms of biological time is duration_ms * 100 ns of hardware time
    const double tech_s = duration_ms * double(ns_per_bio_ms) * 1e-9;
    q.throughput_mbit_s = double(q.traced_count) * bits_per_pulse / tech_s / 1e6;
    if (!match.pairs.empty())
    {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const MatchedPair &p : match.pairs)
        {
            sum += p.delay_ms();
            lo = std::min(lo, p.delay_ms());
            hi = std::max(hi, p.delay_ms());
        }
        const double m = sum / double(match.pairs.size());
        double var = 0.0;
        for (const MatchedPair &p : match.pairs)
        {
            var += (p.delay_ms() - m) * (p.delay_ms() - m);
        }
        q.mean_delay_ms = m;
        q.jitter_ms = std::sqrt(var / double(match.pairs.size()));
        q.min_delay_ms = lo;
        q.max_delay_ms = hi;
    }
    return q;
}

std::optional<double> pulsecomm::received_rate_tech(const TraceMemory &trace)
{
    if (trace.records.size() < 2)
    {
        return std::nullopt;
    }
    std::int64_t first = std::numeric_limits<std::int64_t>::max();
    std::int64_t last = std::numeric_limits<std::int64_t>::min();
    for (const TraceRecord &r : trace.records)
    {
        first = std::min(first, r.absolute().tech_ns);
        last = std::max(last, r.absolute().tech_ns);
    }
    if (last == first)
    {
        return std::nullopt;
    }
    return double(trace.records.size() - 1) / (double(last - first) * 1e-9);
}

std::optional<double> pulsecomm::cv_isi(const SpikeTrain &train)
{
    const auto &t = train.times_bio_ms;
    if (t.size() < 3)
    {
        return std::nullopt;
    }
    const std::size_t n = t.size() - 1;
    double sum = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
    {
        sum += t[i] - t[i - 1];
    }
    const double m = sum / double(n);
    if (m <= 0.0)
    {
        return std::nullopt;
    }
    double var = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
    {
        const double d = t[i] - t[i - 1] - m;
        var += d * d;
    }
    return std::sqrt(var / double(n)) / m;
}

std::size_t pulsecomm::Histogram::total() const
{
    std::size_t n = 0;
    for (const std::size_t c : counts)
    {
        n += c;
    }
    return n;
}

pulsecomm::Histogram pulsecomm::isi_histogram(const SpikeTrain &train, const double bin_width_ms)
{
    if (!(bin_width_ms > 0.0))
    {
        throw DomainError("isi_histogram: bin width must be > 0");
    }
    Histogram h;
    h.bin_width = bin_width_ms;
    const auto &t = train.times_bio_ms;
    for (std::size_t i = 1; i < t.size(); ++i)
    {
        const auto bin = static_cast<std::size_t>(std::floor((t[i] - t[i - 1]) / bin_width_ms));
        if (bin >= h.counts.size())
        {
            h.counts.resize(bin + 1, 0);
        }
        ++h.counts[bin];
    }
    return h;
}

std::optional<double> pulsecomm::min_isi(const SpikeTrain &train)
{
    const auto &t = train.times_bio_ms;
    if (t.size() < 2)
    {
        return std::nullopt;
    }
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < t.size(); ++i)
    {
        m = std::min(m, t[i] - t[i - 1]);
    }
    return m;
}

namespace
{

template <typename Get>
pulsecomm::ActivitySeries activity(
        std::size_t n_trains, Get get, double bin_ms, double duration_ms)
{
    if (!(bin_ms > 0.0))
    {
        throw pulsecomm::DomainError("network_activity: bin must be > 0");
    }
    double end = duration_ms;
    if (end <= 0.0)
    {
        end = 0.0;
        for (std::size_t i = 0; i < n_trains; ++i)
        {
            const auto &t = get(i).times_bio_ms;
            if (!t.empty())
            {
                end = std::max(end, t.back() + bin_ms * 1e-9);
            }
        }
    }
    pulsecomm::ActivitySeries out;
    out.bin_ms = bin_ms;
    const auto n_bins = static_cast<std::size_t>(std::ceil(end / bin_ms - 1e-12));
    std::vector<std::size_t> counts(n_bins, 0);
    for (std::size_t i = 0; i < n_trains; ++i)
    {
        for (const double t : get(i).times_bio_ms)
        {
            const auto b = static_cast<std::size_t>(std::floor(t / bin_ms));
            if (b < n_bins)
            {
                ++counts[b];
            }
        }
    }
    out.rate_hz.reserve(n_bins);
    for (const std::size_t c : counts)
    {
        out.rate_hz.push_back(double(c) / (bin_ms / 1000.0));
    }
    return out;
}

} // namespace

pulsecomm::ActivitySeries pulsecomm::network_activity(
        std::span<const SpikeTrain> trains, const double bin_ms, const double duration_ms)
{
    return activity(
            trains.size(), [&](std::size_t i) -> const SpikeTrain & { return trains[i]; },
            bin_ms, duration_ms);
}

pulsecomm::ActivitySeries pulsecomm::network_activity(
        std::span<const LabeledTrain> trains, const double bin_ms, const double duration_ms)
{
    return activity(
            trains.size(),
            [&](std::size_t i) -> const SpikeTrain & { return trains[i].train; }, bin_ms,
            duration_ms);
}

std::vector<pulsecomm::IsiDelay> pulsecomm::delay_vs_isi(std::span<const MatchedPair> pairs)
{
    std::vector<MatchedPair> sorted(pairs.begin(), pairs.end());
    std::sort(sorted.begin(), sorted.end(), pair_less);
    std::vector<IsiDelay> out;
    for (std::size_t i = 1; i < sorted.size(); ++i)
    {
        const MatchedPair &a = sorted[i - 1];
        const MatchedPair &b = sorted[i];
        if (a.hicann == b.hicann && a.label9 == b.label9)
        {
            out.push_back({b.sent_ms - a.sent_ms, b.delay_ms()});
        }
    }
    return out;
}

double pulsecomm::mean(std::span<const double> values)
{
    if (values.empty())
    {
        return 0.0;
    }
    double s = 0.0;
    for (const double v : values)
    {
        s += v;
    }
    return s / double(values.size());
}

std::optional<double> pulsecomm::pearson(std::span<const double> a, std::span<const double> b)
{
    const std::size_t n = std::min(a.size(), b.size());
    if (n < 2)
    {
        return std::nullopt;
    }
    const double ma = mean(a.first(n));
    const double mb = mean(b.first(n));
    double sab = 0.0;
    double saa = 0.0;
    double sbb = 0.0;
    for (std::size_t i = 0; i < n; ++i)
    {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0)
    {
        return std::nullopt;
    }
    return sab / std::sqrt(saa * sbb);
}

std::optional<double> pulsecomm::bimodality_coefficient(std::span<const double> values)
{
    const std::size_t n = values.size();
    if (n < 4)
    {
        return std::nullopt;
    }
    const double m = mean(values);
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (const double v : values)
    {
        const double d = v - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= double(n);
    m3 /= double(n);
    m4 /= double(n);
    if (m2 <= 0.0)
    {
        return std::nullopt;
    }
    const double nn = double(n);
    // sample-size corrected skewness and excess kurtosis
    const double g1 = m3 / std::pow(m2, 1.5);
    const double g2 = m4 / (m2 * m2) - 3.0;
    const double skew = g1 * std::sqrt(nn * (nn - 1.0)) / (nn - 2.0);
    const double kurt = ((nn + 1.0) * g2 + 6.0) * (nn - 1.0) / ((nn - 2.0) * (nn - 3.0));
    return (skew * skew + 1.0)
            / (kurt + 3.0 * (nn - 1.0) * (nn - 1.0) / ((nn - 2.0) * (nn - 3.0)));
}

std::optional<double> pulsecomm::mean_cv_isi(std::span<const SpikeTrain> trains)
{
    std::vector<double> cvs;
    for (const SpikeTrain &t : trains)
    {
        if (const auto cv = cv_isi(t))
        {
            cvs.push_back(*cv);
        }
    }
    if (cvs.empty())
    {
        return std::nullopt;
    }
    return mean(cvs);
}

std::optional<double> pulsecomm::mean_cv_isi(std::span<const LabeledTrain> trains)
{
    std::vector<double> cvs;
    for (const LabeledTrain &t : trains)
    {
        if (const auto cv = cv_isi(t.train))
        {
            cvs.push_back(*cv);
        }
    }
    if (cvs.empty())
    {
        return std::nullopt;
    }
    return mean(cvs);
}

void pulsecomm::write_pairs_csv(std::ostream &out, std::span<const MatchedPair> pairs)
{
    out << "hicann,label9,sent_ms,traced_ms,delay_ms\n";
    for (const MatchedPair &p : pairs)
    {
        out << int(p.hicann) << ',' << p.label9 << ',' << p.sent_ms << ',' << p.traced_ms
            << ',' << p.delay_ms() << '\n';
    }
}

void pulsecomm::write_histogram_csv(std::ostream &out, const Histogram &histogram)
{
    out << "bin_start_ms,count\n";
    for (std::size_t k = 0; k < histogram.counts.size(); ++k)
    {
        out << double(k) * histogram.bin_width << ',' << histogram.counts[k] << '\n';
    }
}

void pulsecomm::write_activity_csv(std::ostream &out, const ActivitySeries &series)
{
    out << "bin_start_ms,rate_hz\n";
    for (std::size_t k = 0; k < series.rate_hz.size(); ++k)
    {
        out << double(k) * series.bin_ms << ',' << series.rate_hz[k] << '\n';
    }
}

void pulsecomm::write_delay_isi_csv(std::ostream &out, std::span<const IsiDelay> points)
{
    out << "isi_ms,delay_ms\n";
    for (const IsiDelay &p : points)
    {
        out << p.isi_ms << ',' << p.delay_ms << '\n';
    }
}

nlohmann::json pulsecomm::to_json(const QosSummary &summary)
{
    auto opt = [](const std::optional<double> &v) -> nlohmann::json {
        return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
    };
    return nlohmann::json{
            {"sent_count", summary.sent_count},
            {"traced_count", summary.traced_count},
            {"loss_fraction", summary.loss_fraction},
            {"duration_ms", summary.duration_ms},
            {"sent_rate_hz", summary.sent_rate_hz},
            {"traced_rate_hz", summary.traced_rate_hz},
            {"throughput_mbit_s", summary.throughput_mbit_s},
            {"mean_delay_ms", opt(summary.mean_delay_ms)},
            {"jitter_ms", opt(summary.jitter_ms)},
            {"min_delay_ms", opt(summary.min_delay_ms)},
            {"max_delay_ms", opt(summary.max_delay_ms)},
    };
}
