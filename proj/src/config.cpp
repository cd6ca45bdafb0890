// config.cpp
#include <fstream>
#include <functional>
#include <limits>
#include <map>

#include "pulsecomm/config.hpp"
#include "pulsecomm/errors.hpp"

using nlohmann::json;

namespace
{

[[noreturn]] void fail(const std::string &path, const std::string &what)
{
    throw pulsecomm::ConfigError("config: " + path + ": " + what);
}

void expect_object(const json &j, const std::string &path)
{
    if (!j.is_object())
    {
        fail(path.empty() ? "<root>" : path, "expected an object");
    }
}

template <typename T>
void get_int(const json &j, const std::string &path, T &out, long long lo, long long hi)
{
    if (!j.is_number_integer())
    {
        fail(path, "expected an integer");
    }
    const long long v = j.get<long long>();
    if (v < lo || v > hi)
    {
        fail(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    out = static_cast<T>(v);
}

void get_real(const json &j, const std::string &path, double &out, double lo)
{
    if (!j.is_number())
    {
        fail(path, "expected a number");
    }
    const double v = j.get<double>();
    if (!(v >= lo))
    {
        fail(path, "must be >= " + std::to_string(lo));
    }
    out = v;
}

void get_string(const json &j, const std::string &path, std::string &out)
{
    if (!j.is_string())
    {
        fail(path, "expected a string");
    }
    out = j.get<std::string>();
}

using Handler = std::function<void(const json &, const std::string &)>;

void walk(const json &j, const std::string &prefix, const std::map<std::string, Handler> &keys)
{
    expect_object(j, prefix);
    for (const auto &[key, value] : j.items())
    {
        const std::string path = prefix.empty() ? key : prefix + "." + key;
        const auto it = keys.find(key);
        if (it == keys.end())
        {
            fail(path, "unknown key");
        }
        it->second(value, path);
    }
}

constexpr long long big = 1LL << 40;

} // namespace

void pulsecomm::apply_json(RunConfig &c, const json &j)
{
    walk(j, "",
            {
                    {"seed",
                            [&](const json &v, const std::string &p) {
                                get_int(v, p, c.seed, 0, std::numeric_limits<long long>::max());
                            }},
                    {"seeds", [&](const json &v, const std::string &p) { get_int(v, p, c.seeds, 1, 1000); }},
                    {"hicanns",
                            [&](const json &v, const std::string &p) {
                                get_int(v, p, c.hicanns, 1, 8);
                                if (c.hicanns != 1 && c.hicanns != 8)
                                {
                                    fail(p, "must be 1 or 8");
                                }
                            }},
                    {"pulses", [&](const json &v, const std::string &p) { get_int(v, p, c.pulses, 1, 100'000'000); }},
                    {"jobs", [&](const json &v, const std::string &p) { get_int(v, p, c.jobs, 1, 1024); }},
                    {"out_dir", [&](const json &v, const std::string &p) { get_string(v, p, c.out_dir); }},
                    {"rates_khz",
                            [&](const json &v, const std::string &p) {
                                if (!v.is_array() || v.empty())
                                {
                                    fail(p, "expected a non-empty array");
                                }
                                c.rates_khz.clear();
                                for (std::size_t i = 0; i < v.size(); ++i)
                                {
                                    double r = 0.0;
                                    get_real(v[i], p + "[" + std::to_string(i) + "]", r, 1e-9);
                                    c.rates_khz.push_back(r);
                                }
                            }},
                    {"kinds",
                            [&](const json &v, const std::string &p) {
                                if (!v.is_array() || v.empty())
                                {
                                    fail(p, "expected a non-empty array");
                                }
                                c.kinds.clear();
                                for (std::size_t i = 0; i < v.size(); ++i)
                                {
                                    std::string k;
                                    get_string(v[i], p + "[" + std::to_string(i) + "]", k);
                                    try
                                    {
                                        parse_kind(k);
                                    }
                                    catch (const ConfigError &)
                                    {
                                        fail(p + "[" + std::to_string(i) + "]", "unknown kind '" + k + "'");
                                    }
                                    c.kinds.push_back(k);
                                }
                            }},
                    {"link",
                            [&](const json &v, const std::string &p) {
                                walk(v, p,
                                        {
                                                {"downstream_fifo_depth", [&](const json &x, const std::string &q) { get_int(x, q, c.link.downstream_fifo_depth, 1, 4096); }},
                                                {"fixed_link_latency_ns", [&](const json &x, const std::string &q) { get_int(x, q, c.link.fixed_link_latency_ns, 0, big); }},
                                                {"merger_depth", [&](const json &x, const std::string &q) { get_int(x, q, c.link.merger_depth, 1, 4096); }},
                                                {"upstream_latency_ns", [&](const json &x, const std::string &q) { get_int(x, q, c.link.upstream_latency_ns, 0, big); }},
                                        });
                            }},
                    {"packing",
                            [&](const json &v, const std::string &p) {
                                walk(v, p,
                                        {
                                                {"max_group_size", [&](const json &x, const std::string &q) { get_int(x, q, c.packing.max_group_size, 1, 184); }},
                                                {"group_overhead_cycles", [&](const json &x, const std::string &q) { get_int(x, q, c.packing.group_overhead_cycles, 6, 1 << 20); }},
                                                {"delay_compensation_ns", [&](const json &x, const std::string &q) { get_int(x, q, c.packing.delay_compensation_ns, 0, big); }},
                                                {"early_release_limit_cycles", [&](const json &x, const std::string &q) { get_int(x, q, c.packing.early_release_limit_cycles, 0, 1 << 20); }},
                                        });
                            }},
                    {"trace",
                            [&](const json &v, const std::string &p) {
                                walk(v, p,
                                        {
                                                {"fifo_depth", [&](const json &x, const std::string &q) { get_int(x, q, c.trace.fifo_depth, 1, 1 << 20); }},
                                                {"capacity", [&](const json &x, const std::string &q) { get_int(x, q, c.trace.capacity, 0, playback_capacity_pulses); }},
                                                {"pulses_per_cycle", [&](const json &x, const std::string &q) { get_int(x, q, c.trace.pulses_per_cycle, 1, 64); }},
                                        });
                            }},
                    {"hicann",
                            [&](const json &v, const std::string &p) {
                                walk(v, p,
                                        {
                                                {"loopback_latency_ns", [&](const json &x, const std::string &q) { get_int(x, q, c.loopback_latency_ns, 0, big); }},
                                        });
                            }},
                    {"loopback",
                            [&](const json &v, const std::string &p) {
                                walk(v, p,
                                        {
                                                {"kind",
                                                        [&](const json &x, const std::string &q) {
                                                            get_string(x, q, c.loopback.kind);
                                                            if (c.loopback.kind != "regular" && c.loopback.kind != "poisson")
                                                            {
                                                                fail(q, "must be 'regular' or 'poisson'");
                                                            }
                                                        }},
                                                {"rate_khz", [&](const json &x, const std::string &q) { get_real(x, q, c.loopback.rate_khz, 1e-9); }},
                                                {"playback_iterations", [&](const json &x, const std::string &q) { get_int(x, q, c.loopback.playback_iterations, 1, 1 << 20); }},
                                        });
                            }},
                    {"bench",
                            [&](const json &v, const std::string &p) {
                                BenchSettings &b = c.bench;
                                SurrogateParams &s = b.surrogate;
                                walk(v, p,
                                        {
                                                {"spike_file", [&](const json &x, const std::string &q) { get_string(x, q, b.spike_file); }},
                                                {"nph",
                                                        [&](const json &x, const std::string &q) {
                                                            if (!x.is_array() || x.empty())
                                                            {
                                                                fail(q, "expected a non-empty array");
                                                            }
                                                            b.nph.clear();
                                                            for (std::size_t i = 0; i < x.size(); ++i)
                                                            {
                                                                int n = 0;
                                                                get_int(x[i], q + "[" + std::to_string(i) + "]", n, 1, 256);
                                                                b.nph.push_back(n);
                                                            }
                                                        }},
                                                {"drain_ms", [&](const json &x, const std::string &q) { get_real(x, q, b.drain_ms, 0.0); }},
                                                {"activity_bin_ms", [&](const json &x, const std::string &q) { get_real(x, q, b.activity_bin_ms, 1e-9); }},
                                                {"surrogate",
                                                        [&](const json &x, const std::string &q) {
                                                            walk(x, q,
                                                                    {
                                                                            {"n_neurons", [&](const json &y, const std::string &r) { get_int(y, r, s.n_neurons, 1, 1 << 24); }},
                                                                            {"frac_excitatory",
                                                                                    [&](const json &y, const std::string &r) {
                                                                                        get_real(y, r, s.frac_excitatory, 0.0);
                                                                                        if (s.frac_excitatory > 1.0)
                                                                                        {
                                                                                            fail(r, "must be <= 1");
                                                                                        }
                                                                                    }},
                                                                            {"up_rate_hz", [&](const json &y, const std::string &r) { get_real(y, r, s.up_rate_hz, 0.0); }},
                                                                            {"down_rate_hz", [&](const json &y, const std::string &r) { get_real(y, r, s.down_rate_hz, 0.0); }},
                                                                            {"mean_up_ms", [&](const json &y, const std::string &r) { get_real(y, r, s.mean_up_ms, 1e-9); }},
                                                                            {"mean_down_ms", [&](const json &y, const std::string &r) { get_real(y, r, s.mean_down_ms, 1e-9); }},
                                                                            {"initial_ai_ms", [&](const json &y, const std::string &r) { get_real(y, r, s.initial_ai_ms, 0.0); }},
                                                                            {"duration_ms", [&](const json &y, const std::string &r) { get_real(y, r, s.duration_ms, 1e-9); }},
                                                                            {"inhibitory_rate_scale", [&](const json &y, const std::string &r) { get_real(y, r, s.inhibitory_rate_scale, 0.0); }},
                                                                    });
                                                        }},
                                        });
                            }},
            });
}

pulsecomm::RunConfig pulsecomm::load_config(const std::filesystem::path &path, RunConfig base)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("config: cannot open " + path.string());
    }
    json j;
    try
    {
        j = json::parse(in);
    }
    catch (const json::parse_error &e)
    {
        throw ConfigError("config: " + path.string() + ": " + e.what());
    }
    apply_json(base, j);
    return base;
}

void pulsecomm::validate(const RunConfig &c)
{
    validate(c.link);
    validate(c.packing);
    validate(c.trace);
    validate(c.bench.surrogate);
    if (c.hicanns != 1 && c.hicanns != 8)
    {
        throw ConfigError("config: hicanns: must be 1 or 8");
    }
    if (c.seeds < 1 || c.pulses < 1 || c.jobs < 1)
    {
        throw ConfigError("config: seeds, pulses and jobs must be >= 1");
    }
    for (const double r : c.rates_khz)
    {
        if (!(r > 0.0))
        {
            throw ConfigError("config: rates_khz: rates must be > 0");
        }
    }
    if (c.kinds.empty())
    {
        throw ConfigError("config: kinds: must not be empty");
    }
    if (c.bench.nph.empty())
    {
        throw ConfigError("config: bench.nph: must not be empty");
    }
}

nlohmann::json pulsecomm::to_json(const RunConfig &c)
{
    const SurrogateParams &s = c.bench.surrogate;
    json j{
            {"seed", c.seed},
            {"seeds", c.seeds},
            {"hicanns", c.hicanns},
            {"pulses", c.pulses},
            {"jobs", c.jobs},
            {"out_dir", c.out_dir},
            {"kinds", c.kinds},
            {"link",
                    {{"downstream_fifo_depth", c.link.downstream_fifo_depth},
                            {"fixed_link_latency_ns", c.link.fixed_link_latency_ns},
                            {"merger_depth", c.link.merger_depth},
                            {"upstream_latency_ns", c.link.upstream_latency_ns}}},
            {"packing",
                    {{"max_group_size", c.packing.max_group_size},
                            {"group_overhead_cycles", c.packing.group_overhead_cycles},
                            {"delay_compensation_ns", c.packing.delay_compensation_ns},
                            {"early_release_limit_cycles", c.packing.early_release_limit_cycles}}},
            {"trace",
                    {{"fifo_depth", c.trace.fifo_depth}, {"capacity", c.trace.capacity},
                            {"pulses_per_cycle", c.trace.pulses_per_cycle}}},
            {"hicann", {{"loopback_latency_ns", c.loopback_latency_ns}}},
            {"loopback",
                    {{"kind", c.loopback.kind}, {"rate_khz", c.loopback.rate_khz},
                            {"playback_iterations", c.loopback.playback_iterations}}},
            {"bench",
                    {{"spike_file", c.bench.spike_file}, {"nph", c.bench.nph},
                            {"drain_ms", c.bench.drain_ms},
                            {"activity_bin_ms", c.bench.activity_bin_ms},
                            {"surrogate",
                                    {{"n_neurons", s.n_neurons},
                                            {"frac_excitatory", s.frac_excitatory},
                                            {"up_rate_hz", s.up_rate_hz},
                                            {"down_rate_hz", s.down_rate_hz},
                                            {"mean_up_ms", s.mean_up_ms},
                                            {"mean_down_ms", s.mean_down_ms},
                                            {"initial_ai_ms", s.initial_ai_ms},
                                            {"duration_ms", s.duration_ms},
                                            {"inhibitory_rate_scale", s.inhibitory_rate_scale}}}}},
    };
    // an absent grid means the command default
    if (!c.rates_khz.empty())
    {
        j["rates_khz"] = c.rates_khz;
    }
    return j;
}

pulsecomm::PointSetup pulsecomm::point_setup(
        const RunConfig &c, const TrainKind kind, const double rate_khz, const std::uint64_t seed)
{
    PointSetup s;
    s.kind = kind;
    s.rate_khz = rate_khz;
    s.hicanns = c.hicanns;
    s.pulses = c.pulses;
    s.seed = seed;
    s.link = c.link;
    s.packing = c.packing;
    s.trace = c.trace;
    s.loopback_latency_ns = c.loopback_latency_ns;
    return s;
}
