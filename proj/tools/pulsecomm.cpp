// pulsecomm: batch front end for the link characterization sweeps, single
// loopback runs, benchmark sweeps and report generation.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "CLI11.hpp"

#include "pulsecomm/commands.hpp"
#include "pulsecomm/config.hpp"

namespace fs = std::filesystem;

namespace
{

struct Flags
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    std::optional<int> hicanns;
    std::vector<double> rates;
    std::optional<int> jobs;
};

void add_flags(CLI::App *cmd, Flags &f)
{
    cmd->add_option("--config", f.config, "JSON configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", f.seed, "base seed");
    cmd->add_option("--out-dir", f.out_dir, "output root (default $PULSECOMM_OUT_DIR or ./pulsecomm-out)");
    cmd->add_option("--hicanns", f.hicanns, "HICANNs per FPGA used")->check(CLI::IsMember({1, 8}));
    cmd->add_option("--rates", f.rates, "rate grid in kHz per HICANN")->delimiter(',');
    cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
}

pulsecomm::RunConfig resolve(const Flags &f)
{
    pulsecomm::RunConfig c;
    if (!f.config.empty())
    {
        c = pulsecomm::load_config(f.config, c);
    }
    if (f.seed)
    {
        c.seed = *f.seed;
    }
    if (!f.out_dir.empty())
    {
        c.out_dir = f.out_dir;
    }
    if (f.hicanns)
    {
        c.hicanns = *f.hicanns;
    }
    if (!f.rates.empty())
    {
        c.rates_khz = f.rates;
    }
    if (f.jobs)
    {
        c.jobs = *f.jobs;
    }
    pulsecomm::validate(c);
    return c;
}

fs::path run_dir(const pulsecomm::RunConfig &c, const std::string &command)
{
    fs::path root = "pulsecomm-out";
    if (!c.out_dir.empty())
    {
        root = c.out_dir;
    }
    else if (const char *env = std::getenv("PULSECOMM_OUT_DIR"); env && *env)
    {
        root = env;
    }
    return root / command;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Pulse communication link simulator"};
    app.require_subcommand(1);

    Flags down_flags, up_flags, loop_flags, bench_flags;
    CLI::App *down = app.add_subcommand("char-downstream", "loopback sweep over rates and train kinds");
    CLI::App *up = app.add_subcommand("char-upstream", "background generator sweep");
    CLI::App *loop = app.add_subcommand("loopback", "single loopback experiment");
    CLI::App *bench = app.add_subcommand("bench", "benchmark sweep over neurons per HICANN");
    add_flags(down, down_flags);
    add_flags(up, up_flags);
    add_flags(loop, loop_flags);
    add_flags(bench, bench_flags);

    std::string report_dir;
    CLI::App *report = app.add_subcommand("report", "summarize an existing run directory");
    report->add_option("run_dir", report_dir, "run directory")->required();

    CLI11_PARSE(app, argc, argv);

    try
    {
        nlohmann::json summary;
        if (down->parsed())
        {
            const auto c = resolve(down_flags);
            summary = pulsecomm::cmd_char_downstream(c, run_dir(c, "char-downstream"));
        }
        else if (up->parsed())
        {
            const auto c = resolve(up_flags);
            summary = pulsecomm::cmd_char_upstream(c, run_dir(c, "char-upstream"));
        }
        else if (loop->parsed())
        {
            const auto c = resolve(loop_flags);
            summary = pulsecomm::cmd_loopback(c, run_dir(c, "loopback"));
        }
        else if (bench->parsed())
        {
            const auto c = resolve(bench_flags);
            summary = pulsecomm::cmd_bench(c, run_dir(c, "bench"));
        }
        else
        {
            summary = pulsecomm::cmd_report(report_dir);
        }
        std::cout << summary.dump(2) << '\n';
    }
    catch (const std::exception &e)
    {
        std::cerr << "pulsecomm: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
