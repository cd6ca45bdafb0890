// commands.cpp
#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "pulsecomm/benchmark.hpp"
#include "pulsecomm/commands.hpp"
#include "pulsecomm/csv.hpp"
#include "pulsecomm/errors.hpp"
#include "pulsecomm/parallel.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

std::ofstream open_out(const fs::path &path)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.precision(10);
    return out;
}

void write_json(const fs::path &path, const json &j)
{
    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

void prepare(const fs::path &run_dir, const pulsecomm::RunConfig &config)
{
    fs::create_directories(run_dir);
    write_json(run_dir / "config.json", pulsecomm::to_json(config));
}

json opt(const std::optional<double> &v)
{
    return v ? json(*v) : json(nullptr);
}

void put(std::ostream &out, const std::optional<double> &v)
{
    if (v)
    {
        out << *v;
    }
}

struct SweepKey
{
    pulsecomm::TrainKind kind;
    double rate;
    std::uint64_t seed;
};

std::vector<SweepKey> sweep_keys(const pulsecomm::RunConfig &c, const std::vector<double> &rates)
{
    std::vector<SweepKey> keys;
    for (const std::string &k : c.kinds)
    {
        const pulsecomm::TrainKind kind = pulsecomm::parse_kind(k);
        // regular trains do not depend on the seed
        const int n_seeds = kind == pulsecomm::TrainKind::regular ? 1 : c.seeds;
        for (const double r : rates)
        {
            for (int s = 0; s < n_seeds; ++s)
            {
                keys.push_back({kind, r, c.seed + static_cast<std::uint64_t>(s)});
            }
        }
    }
    return keys;
}

// Seed-averaged loss per rate for one kind
std::pair<std::vector<double>, std::vector<double>> mean_loss(const std::vector<SweepKey> &keys,
        const std::vector<double> &losses, pulsecomm::TrainKind kind)
{
    std::map<double, std::pair<double, int>> acc;
    for (std::size_t i = 0; i < keys.size(); ++i)
    {
        if (keys[i].kind == kind)
        {
            auto &a = acc[keys[i].rate];
            a.first += losses[i];
            ++a.second;
        }
    }
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto &[rate, a] : acc)
    {
        out.first.push_back(rate);
        out.second.push_back(a.first / a.second);
    }
    return out;
}

} // namespace

std::vector<double> pulsecomm::default_rates(const bool upstream, const int hicanns)
{
    if (hicanns > 1)
    {
        return upstream ? rate_grid(1.0, 3.0, 0.1) : rate_grid(0.5, 2.0, 0.05);
    }
    return upstream ? rate_grid(1.0, 3.0, 0.05) : rate_grid(0.2, 3.0, 0.05);
}

json pulsecomm::cmd_char_downstream(const RunConfig &config, const fs::path &run_dir)
{
    RunConfig c = config;
    validate(c);
    // the sweeps measure the raw path delay
    c.packing.delay_compensation_ns = 0;
    if (c.rates_khz.empty())
    {
        c.rates_khz = default_rates(false, c.hicanns);
    }
    const std::vector<double> rates = c.rates_khz;
    prepare(run_dir, c);

    const std::vector<SweepKey> keys = sweep_keys(c, rates);
    std::vector<DownstreamPoint> points(keys.size());
    parallel_for(keys.size(), c.jobs, [&](std::size_t i) {
        DownstreamPoint p = measure_downstream(point_setup(c, keys[i].kind, keys[i].rate, keys[i].seed));
        // the histograms below only need the first seed's trains
        if (keys[i].seed != c.seed)
        {
            p.sent.clear();
            p.traced.clear();
            p.match = {};
        }
        points[i] = std::move(p);
    });

    std::ofstream qos_csv = open_out(run_dir / "qos.csv");
    qos_csv << "kind,rate_khz,total_rate_khz,seed,sent,traced,loss,throughput_mbit_s,"
               "received_mpulses_s,mean_delay_ms,jitter_ms,cv_sent,cv_traced,min_isi_ms,"
               "max_shift_ms\n";
    std::ofstream hist_csv = open_out(run_dir / "isi_hist.csv");
    hist_csv << "kind,rate_khz,bin_start_ms,count\n";
    std::ofstream delay_csv = open_out(run_dir / "delay_isi.csv");
    delay_csv << "kind,rate_khz,isi_ms,delay_ms\n";
    std::vector<double> losses;
    for (std::size_t i = 0; i < keys.size(); ++i)
    {
        const DownstreamPoint &p = points[i];
        const char *kind = kind_name(keys[i].kind);
        losses.push_back(p.qos.loss_fraction);
        qos_csv << kind << ',' << keys[i].rate << ',' << keys[i].rate * c.hicanns << ','
                << keys[i].seed << ',' << p.qos.sent_count << ',' << p.qos.traced_count << ','
                << p.qos.loss_fraction << ',' << p.qos.throughput_mbit_s << ',';
        put(qos_csv, p.received_mpulses_s);
        qos_csv << ',';
        put(qos_csv, p.qos.mean_delay_ms);
        qos_csv << ',';
        put(qos_csv, p.qos.jitter_ms);
        qos_csv << ',';
        put(qos_csv, p.cv_sent);
        qos_csv << ',';
        put(qos_csv, p.cv_traced);
        qos_csv << ',';
        put(qos_csv, p.min_traced_isi_ms);
        qos_csv << ',' << p.max_packing_shift_ms << '\n';
        if (keys[i].seed != c.seed || p.traced.empty())
        {
            continue;
        }
        // 0.04 ms bins are one 4 ns HICANN tick
        const Histogram h = isi_histogram(p.traced.front().train, 0.04);
        for (std::size_t b = 0; b < h.counts.size(); ++b)
        {
            if (h.counts[b] > 0)
            {
                hist_csv << kind << ',' << keys[i].rate << ',' << double(b) * h.bin_width << ','
                         << h.counts[b] << '\n';
            }
        }
        if (keys[i].kind == TrainKind::poisson)
        {
            for (const IsiDelay &d : delay_vs_isi(p.match.pairs))
            {
                delay_csv << kind << ',' << keys[i].rate << ',' << d.isi_ms << ',' << d.delay_ms << '\n';
            }
        }
    }

    json summary{{"command", "char-downstream"}, {"hicanns", c.hicanns}, {"points", keys.size()}};
    for (const std::string &k : c.kinds)
    {
        const TrainKind kind = parse_kind(k);
        const auto [r, l] = mean_loss(keys, losses, kind);
        double max_rx = 0.0;
        for (std::size_t i = 0; i < keys.size(); ++i)
        {
            if (keys[i].kind == kind)
            {
                max_rx = std::max(max_rx, points[i].received_mpulses_s.value_or(0.0));
            }
        }
        summary[kind_name(kind)] = {
                {"loss_onset_khz", opt(loss_onset(r, l, 0.0))},
                {"loss_onset_0p1pct_khz", opt(loss_onset(r, l, 1e-3))},
                {"saturation_mpulses_s", max_rx},
                {"saturation_mbit_s", max_rx * bits_per_pulse},
        };
    }
    write_json(run_dir / "summary.json", summary);
    return summary;
}

json pulsecomm::cmd_char_upstream(const RunConfig &config, const fs::path &run_dir)
{
    RunConfig c = config;
    validate(c);
    if (c.rates_khz.empty())
    {
        c.rates_khz = default_rates(true, c.hicanns);
    }
    const std::vector<double> rates = c.rates_khz;
    prepare(run_dir, c);

    const std::vector<SweepKey> keys = sweep_keys(c, rates);
    std::vector<UpstreamPoint> points(keys.size());
    parallel_for(keys.size(), c.jobs, [&](std::size_t i) {
        points[i] = measure_upstream(point_setup(c, keys[i].kind, keys[i].rate, keys[i].seed));
    });

    std::ofstream csv = open_out(run_dir / "upstream.csv");
    csv << "kind,rate_khz,total_rate_khz,seed,sent,traced,dropped,loss,received_mpulses_s,"
           "throughput_mbit_s,packets_single,packets_double,trace_drops\n";
    std::vector<double> losses;
    for (std::size_t i = 0; i < keys.size(); ++i)
    {
        const UpstreamPoint &p = points[i];
        losses.push_back(p.loss_fraction);
        csv << kind_name(keys[i].kind, true) << ',' << keys[i].rate << ','
            << keys[i].rate * c.hicanns << ',' << keys[i].seed << ',' << p.sent << ',' << p.traced
            << ',' << p.dropped << ',' << p.loss_fraction << ',';
        put(csv, p.received_mpulses_s);
        csv << ',' << p.received_mpulses_s.value_or(0.0) * bits_per_pulse << ','
            << p.packets_single << ',' << p.packets_double << ',' << p.trace_drops << '\n';
    }

    json summary{{"command", "char-upstream"}, {"hicanns", c.hicanns}, {"points", keys.size()},
            {"merger_depth", c.link.merger_depth}};
    for (const std::string &k : c.kinds)
    {
        const TrainKind kind = parse_kind(k);
        const auto [r, l] = mean_loss(keys, losses, kind);
        double max_rx = 0.0;
        std::uint64_t trace_drops = 0;
        for (std::size_t i = 0; i < keys.size(); ++i)
        {
            if (keys[i].kind == kind)
            {
                max_rx = std::max(max_rx, points[i].received_mpulses_s.value_or(0.0));
                trace_drops += points[i].trace_drops;
            }
        }
        summary[kind_name(kind, true)] = {
                {"loss_onset_khz", opt(loss_onset(r, l, 0.0))},
                {"loss_onset_0p1pct_khz", opt(loss_onset(r, l, 1e-3))},
                {"saturation_mpulses_s", max_rx},
                {"saturation_mbit_s", max_rx * bits_per_pulse},
                {"trace_drops", trace_drops},
        };
    }
    write_json(run_dir / "summary.json", summary);
    return summary;
}

json pulsecomm::cmd_loopback(const RunConfig &config, const fs::path &run_dir)
{
    validate(config);
    prepare(run_dir, config);
    const double rate_hz = config.loopback.rate_khz * 1000.0;
    const double dur = double(config.pulses) / config.loopback.rate_khz;
    const TrainKind kind = parse_kind(config.loopback.kind);
    std::vector<LabeledTrain> stimulus;
    for (int h = 0; h < config.hicanns; ++h)
    {
        LabeledTrain t;
        t.hicann = static_cast<std::uint8_t>(h);
        t.label9 = static_cast<std::uint16_t>(h);
        t.train = kind == TrainKind::regular ? gen_regular(rate_hz, dur, 0.0, h)
                                             : gen_poisson(rate_hz, dur, config.seed, h);
        stimulus.push_back(std::move(t));
    }
    ExperimentPlan plan = loopback_plan(stimulus);
    plan.link = config.link;
    plan.packing = config.packing;
    plan.trace = config.trace;
    plan.playback_iterations = config.loopback.playback_iterations;
    for (HicannConfig &h : plan.hicanns)
    {
        h.loopback_latency_ns = config.loopback_latency_ns;
    }
    const RunResult result = run(plan);
    const MatchResult match = match_oracle(result.log, result.trace);
    const QosSummary q = qos(match, tech_to_bio(result.duration));

    {
        std::ofstream out = open_out(run_dir / "pairs.csv");
        write_pairs_csv(out, match.pairs);
    }
    {
        std::ofstream out = open_out(run_dir / "trace.csv");
        write_trace_csv(out, result.trace);
    }
    write_words_le(run_dir / "trace.bin", encode_trace(result.trace));
    {
        std::ofstream out = open_out(run_dir / "ground_truth.csv");
        result.log.write_csv(out);
    }
    {
        std::ofstream out = open_out(run_dir / "packing.csv");
        result.packing.write_csv(out);
    }
    write_words_le(run_dir / "playback.bin", encode_playback_frame(pack(stimulus, plan.packing).image));
    {
        std::ofstream out = open_out(run_dir / "channels.csv");
        out << "hicann,direction,accepted,dropped,delivered,packets_single,packets_double,busy_ns,"
               "utilization\n";
        for (int h = 0; h < hicanns_per_fpga; ++h)
        {
            for (const auto &[dir, s] : {std::pair{"down", result.downstream[h]},
                         std::pair{"up", result.upstream[h]}})
            {
                out << h << ',' << dir << ',' << s.accepted << ',' << s.dropped << ','
                    << s.delivered << ',' << s.packets_single << ',' << s.packets_double << ','
                    << s.busy_ns << ',' << s.utilization(result.duration) << '\n';
            }
        }
    }
    json summary = to_json(q);
    summary["command"] = "loopback";
    summary["kind"] = kind_name(kind);
    summary["rate_khz"] = config.loopback.rate_khz;
    summary["hicanns"] = config.hicanns;
    summary["dropped_downstream"] = result.log.dropped_at(Stage::channel_drop);
    summary["dropped_upstream"] = result.log.dropped_at(Stage::merger_drop);
    summary["dropped_trace"] = result.log.dropped_at(Stage::trace_drop);
    summary["cutoff"] = result.log.dropped_at(Stage::cutoff);
    summary["overflow_markers"] = result.trace.overflow_markers;
    summary["run_hash"] = result.hash();
    write_json(run_dir / "qos.json", to_json(q));
    write_json(run_dir / "summary.json", summary);
    return summary;
}

json pulsecomm::cmd_bench(const RunConfig &config, const fs::path &run_dir)
{
    validate(config);
    prepare(run_dir, config);
    BenchmarkOptions options;
    options.link = config.link;
    options.packing = config.packing;
    options.trace = config.trace;
    options.drain_ms = config.bench.drain_ms;
    options.activity_bin_ms = config.bench.activity_bin_ms;

    const bool from_file = !config.bench.spike_file.empty();
    const int n_seeds = from_file ? 1 : config.seeds;
    std::vector<BenchmarkPoint> all;
    std::vector<std::uint64_t> seeds;
    std::vector<SpikeTrain> first_trains;
    for (int s = 0; s < n_seeds; ++s)
    {
        std::vector<SpikeTrain> trains;
        if (from_file)
        {
            trains = load_spike_file(config.bench.spike_file);
            // neuron ids become dense indices in file order
            for (std::size_t i = 0; i < trains.size(); ++i)
            {
                trains[i].source_id = static_cast<int>(i);
            }
        }
        else
        {
            SurrogateParams p = config.bench.surrogate;
            p.seed = config.seed + static_cast<std::uint64_t>(s);
            trains = gen_updown_surrogate(p);
        }
        std::vector<BenchmarkPoint> pts = sweep(trains, config.bench.nph, options, config.jobs);
        if (s == 0)
        {
            first_trains = std::move(trains);
        }
        for (BenchmarkPoint &p : pts)
        {
            seeds.push_back(config.seed + static_cast<std::uint64_t>(s));
            all.push_back(std::move(p));
        }
    }

    std::ofstream csv = open_out(run_dir / "sweep.csv");
    csv << "seed,nph,hicanns,fpgas,sent,traced,loss,cv_sent,cv_traced,activity_correlation\n";
    for (std::size_t i = 0; i < all.size(); ++i)
    {
        const BenchmarkPoint &p = all[i];
        csv << seeds[i] << ',' << p.neurons_per_hicann << ',' << p.hicanns << ',' << p.fpgas << ','
            << p.sent << ',' << p.traced << ',' << p.loss_fraction << ',';
        put(csv, p.cv_sent);
        csv << ',';
        put(csv, p.cv_traced);
        csv << ',';
        put(csv, p.activity_correlation);
        csv << '\n';

        if (seeds[i] != config.seed)
        {
            continue;
        }
        const fs::path dir = run_dir / ("nph_" + std::to_string(p.neurons_per_hicann));
        fs::create_directories(dir);
        std::ofstream act = open_out(dir / "activity.csv");
        act << "bin_start_ms,sent_hz,traced_hz\n";
        for (std::size_t b = 0; b < p.sent_activity.rate_hz.size(); ++b)
        {
            act << double(b) * p.sent_activity.bin_ms << ',' << p.sent_activity.rate_hz[b] << ','
                << p.traced_activity.rate_hz.at(b) << '\n';
        }
        std::ofstream cv = open_out(dir / "cv.csv");
        cv << "neuron,sent_spikes,traced_spikes,cv_sent,cv_traced\n";
        for (std::size_t n = 0; n < first_trains.size(); ++n)
        {
            const SpikeTrain &traced = p.traced_trains.at(n);
            cv << n << ',' << first_trains[n].times_bio_ms.size() << ','
               << traced.times_bio_ms.size() << ',';
            put(cv, cv_isi(first_trains[n]));
            cv << ',';
            put(cv, cv_isi(traced));
            cv << '\n';
        }
        write_json(dir / "summary.json",
                {{"nph", p.neurons_per_hicann}, {"hicanns", p.hicanns}, {"fpgas", p.fpgas},
                        {"sent", p.sent}, {"traced", p.traced}, {"loss", p.loss_fraction},
                        {"cv_sent", opt(p.cv_sent)}, {"cv_traced", opt(p.cv_traced)},
                        {"activity_correlation", opt(p.activity_correlation)},
                        {"run_hash", p.hash}});
    }

    json per_nph = json::array();
    for (const int nph : config.bench.nph)
    {
        double loss = 0.0;
        int n = 0;
        for (const BenchmarkPoint &p : all)
        {
            if (p.neurons_per_hicann == nph)
            {
                loss += p.loss_fraction;
                ++n;
            }
        }
        per_nph.push_back({{"nph", nph}, {"mean_loss", loss / n}});
    }
    json summary{{"command", "bench"}, {"source", from_file ? "file" : "surrogate"},
            {"seeds", n_seeds}, {"points", per_nph}};
    write_json(run_dir / "summary.json", summary);
    return summary;
}

namespace
{

// Checks that every cell of the listed columns parses as a number
void check_numeric(const pulsecomm::CsvTable &t, const std::set<std::string> &text_columns)
{
    for (std::size_t r = 0; r < t.rows.size(); ++r)
    {
        for (std::size_t c = 0; c < t.header.size(); ++c)
        {
            if (text_columns.count(t.header[c]) == 0)
            {
                (void)t.number(r, c);
            }
        }
    }
}

// Copies the named columns of `t` into a new CSV
void project(const pulsecomm::CsvTable &t, const std::vector<std::string> &columns, const fs::path &out_path)
{
    std::vector<std::size_t> idx;
    for (const std::string &c : columns)
    {
        idx.push_back(t.column(c));
    }
    std::ofstream out = open_out(out_path);
    for (std::size_t i = 0; i < columns.size(); ++i)
    {
        out << (i ? "," : "") << columns[i];
    }
    out << '\n';
    for (const auto &row : t.rows)
    {
        for (std::size_t i = 0; i < idx.size(); ++i)
        {
            out << (i ? "," : "") << row[idx[i]];
        }
        out << '\n';
    }
}

} // namespace

json pulsecomm::cmd_report(const fs::path &run_dir)
{
    if (!fs::is_directory(run_dir))
    {
        throw std::runtime_error("report: no such run directory " + run_dir.string());
    }
    const fs::path plots = run_dir / "plots";
    fs::create_directories(plots);
    json report{{"run_dir", run_dir.string()}};
    int hicanns = 1;
    if (fs::exists(run_dir / "config.json"))
    {
        std::ifstream in(run_dir / "config.json");
        try
        {
            const json cfg = json::parse(in);
            hicanns = cfg.value("hicanns", 1);
        }
        catch (const json::exception &e)
        {
            throw std::runtime_error(
                    (run_dir / "config.json").string() + ": " + e.what());
        }
    }
    const std::string suffix = hicanns > 1 ? "_8hicann" : "";
    bool found = false;

    if (fs::exists(run_dir / "qos.csv"))
    {
        found = true;
        const CsvTable t = read_csv(run_dir / "qos.csv");
        check_numeric(t, {"kind"});
        project(t, {"kind", "rate_khz", "total_rate_khz", "seed", "throughput_mbit_s", "received_mpulses_s", "loss"},
                plots / ("throughput" + suffix + ".csv"));
        project(t, {"kind", "rate_khz", "seed", "mean_delay_ms", "jitter_ms"}, plots / ("delay_jitter" + suffix + ".csv"));
        project(t, {"kind", "rate_khz", "seed", "cv_sent", "cv_traced"}, plots / ("cv" + suffix + ".csv"));
        const std::size_t loss = t.column("loss");
        const std::size_t rx = t.column("received_mpulses_s");
        double max_loss = 0.0;
        double max_rx = 0.0;
        for (std::size_t r = 0; r < t.rows.size(); ++r)
        {
            max_loss = std::max(max_loss, t.number(r, loss));
            const double v = t.number(r, rx);
            if (!std::isnan(v))
            {
                max_rx = std::max(max_rx, v);
            }
        }
        report["downstream"] = {{"points", t.rows.size()}, {"max_loss", max_loss},
                {"saturation_mpulses_s", max_rx}, {"saturation_mbit_s", max_rx * bits_per_pulse}};
    }
    if (fs::exists(run_dir / "isi_hist.csv"))
    {
        const CsvTable t = read_csv(run_dir / "isi_hist.csv");
        check_numeric(t, {"kind"});
        project(t, {"kind", "rate_khz", "bin_start_ms", "count"}, plots / ("isi_hist" + suffix + ".csv"));
    }
    if (fs::exists(run_dir / "delay_isi.csv"))
    {
        const CsvTable t = read_csv(run_dir / "delay_isi.csv");
        check_numeric(t, {"kind"});
        project(t, {"kind", "rate_khz", "isi_ms", "delay_ms"}, plots / ("delay_vs_isi" + suffix + ".csv"));
    }
    if (fs::exists(run_dir / "upstream.csv"))
    {
        found = true;
        const CsvTable t = read_csv(run_dir / "upstream.csv");
        check_numeric(t, {"kind"});
        project(t, {"kind", "rate_khz", "total_rate_khz", "seed", "loss", "received_mpulses_s", "throughput_mbit_s"},
                plots / ("upstream" + suffix + ".csv"));
        const std::size_t rx = t.column("received_mpulses_s");
        const std::size_t td = t.column("trace_drops");
        double max_rx = 0.0;
        double trace_drops = 0.0;
        for (std::size_t r = 0; r < t.rows.size(); ++r)
        {
            const double v = t.number(r, rx);
            if (!std::isnan(v))
            {
                max_rx = std::max(max_rx, v);
            }
            trace_drops += t.number(r, td);
        }
        report["upstream"] = {{"points", t.rows.size()}, {"saturation_mpulses_s", max_rx},
                {"trace_drops", trace_drops}};
    }
    if (fs::exists(run_dir / "sweep.csv"))
    {
        found = true;
        const CsvTable t = read_csv(run_dir / "sweep.csv");
        check_numeric(t, {});
        project(t, {"seed", "nph", "loss", "cv_sent", "cv_traced", "activity_correlation"}, plots / "sweep.csv");
        std::map<int, std::pair<double, int>> loss;
        const std::size_t nph = t.column("nph");
        const std::size_t l = t.column("loss");
        for (std::size_t r = 0; r < t.rows.size(); ++r)
        {
            auto &a = loss[static_cast<int>(t.number(r, nph))];
            a.first += t.number(r, l);
            ++a.second;
        }
        json pts = json::array();
        for (const auto &[n, a] : loss)
        {
            pts.push_back({{"nph", n}, {"mean_loss", a.first / a.second}});
            const fs::path act = run_dir / ("nph_" + std::to_string(n)) / "activity.csv";
            if (fs::exists(act))
            {
                const CsvTable at = read_csv(act);
                check_numeric(at, {});
                project(at, {"bin_start_ms", "sent_hz", "traced_hz"},
                        plots / ("activity_nph_" + std::to_string(n) + ".csv"));
            }
        }
        report["bench"] = {{"points", pts}};
    }
    if (fs::exists(run_dir / "pairs.csv"))
    {
        found = true;
        const CsvTable t = read_csv(run_dir / "pairs.csv");
        check_numeric(t, {});
        project(t, {"sent_ms", "delay_ms"}, plots / "delay_histogram_input.csv");
        if (fs::exists(run_dir / "qos.json"))
        {
            std::ifstream in(run_dir / "qos.json");
            try
            {
                report["loopback"] = json::parse(in);
            }
            catch (const json::exception &e)
            {
                throw std::runtime_error((run_dir / "qos.json").string() + ": " + e.what());
            }
        }
    }
    if (!found)
    {
        throw std::runtime_error("report: " + run_dir.string() + " holds no run outputs");
    }
    write_json(run_dir / "report.json", report);
    return report;
}
