// commands.hpp
//  The CLI subcommands as library functions. Each writes into `run_dir`
//  (created if needed) and returns the JSON summary it wrote.
//
//  Every run directory holds config.json (the effective configuration) and
//  summary.json next to the command's CSV files.
#ifndef PULSECOMM_COMMANDS_HPP
#define PULSECOMM_COMMANDS_HPP

#include <filesystem>

#include "json.hpp"

#include "pulsecomm/config.hpp"

namespace pulsecomm
{

// Loopback sweep over rates x train kinds x seeds, raw (uncompensated)
// delays. Writes qos.csv, isi_hist.csv, delay_isi.csv.
nlohmann::json cmd_char_downstream(const RunConfig &config, const std::filesystem::path &run_dir);

// BEG sweep over rates x {regular, pseudorandom} x seeds. Writes upstream.csv.
nlohmann::json cmd_char_upstream(const RunConfig &config, const std::filesystem::path &run_dir);

// One loopback experiment. Writes qos.json, pairs.csv, trace.csv,
// trace.bin, ground_truth.csv, packing.csv, playback.bin, channels.csv.
nlohmann::json cmd_loopback(const RunConfig &config, const std::filesystem::path &run_dir);

// Benchmark sweep over neurons per HICANN. Writes sweep.csv and one
// nph_<n>/ directory per point with activity.csv and cv.csv.
nlohmann::json cmd_bench(const RunConfig &config, const std::filesystem::path &run_dir);

// Re-reads a run directory, checks every CSV and writes report.json plus
// plot-ready tables under plots/.
nlohmann::json cmd_report(const std::filesystem::path &run_dir);

// Rate grid used when the configuration does not list rates
std::vector<double> default_rates(bool upstream, int hicanns);

} // namespace pulsecomm

#endif
