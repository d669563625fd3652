#ifndef EES_SIM_REPORT_HPP
#define EES_SIM_REPORT_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ees/scheduler.hpp"

namespace ees {

/// (t_s, value) samples of a step function.
using time_series = std::vector<std::pair<double, double>>;

struct response_summary
{
    std::size_t count = 0;
    double mean_s = 0.0;
    double p50_s = 0.0;
    double p95_s = 0.0;
    double p99_s = 0.0;
    double max_s = 0.0;
};

/// Nearest-rank percentiles over the given response times.
response_summary summarize(std::vector<double> response_times);

struct workload_report
{
    std::string workload_id;
    std::string function_id;
    double submitted_at_s = 0.0;
    std::optional<double> completed_at_s;
    std::optional<double> duration_s;

    std::uint64_t generated = 0;
    std::uint64_t completed = 0;
    std::uint64_t in_flight = 0;
    std::uint64_t rejected = 0;
    std::uint64_t slo_violations = 0;

    double achieved_throughput_rps = 0.0;
    double mean_busy_fraction = 0.0; ///< busy replica-seconds over ready replica-seconds
    response_summary response;
    double mean_cold_start_s = 0.0;

    bool unscheduled = false;
    bool profile_run = false;
    int freq_mhz = 0;            ///< frequency the deployment asked for (EES)
    int planned_replicas = 0;    ///< replicas of the initial deployment
    double predicted_rho = 0.0;
    int peak_replicas = 0;
    time_series replica_trace;
};

struct node_report
{
    std::string node_id;
    double energy_j = 0.0;
    double hosted_time_s = 0.0; ///< time with at least one replica placed
    time_series freq_trace;
};

struct sim_report
{
    strategy policy = strategy::ees;
    std::uint64_t seed = 0;
    double horizon_s = 0.0;
    double total_energy_j = 0.0;
    double sample_interval_s = 1.0;
    time_series power_timeseries; ///< mean cluster watts over [t, t + interval)
    std::vector<workload_report> workloads;
    std::vector<node_report> nodes;
    /// Fewest empty nodes while every workload is deployed, no profile run is alive and none has finished.
    std::optional<int> min_idle_nodes_all_active;
    std::vector<std::string> notes;
    std::vector<placement_event> events;

    std::uint64_t total_slo_violations() const;

    /// Integral of power_timeseries, bins ending at horizon_s.
    double integrated_energy_j() const;
};

nlohmann::json to_json(const sim_report& report);

/// Writes <stem>.json, and with `csv` also <stem>_power.csv, <stem>_frequency.csv,
/// <stem>_replicas.csv and <stem>_events.jsonl.
void write_report_files(const sim_report& report, const std::filesystem::path& dir,
                        const std::string& stem, bool json, bool csv);

struct comparison_row
{
    strategy policy = strategy::ees;
    double total_energy_j = 0.0;
    std::optional<double> savings_vs_bp_pct;
    std::uint64_t slo_violations = 0;
    std::vector<std::pair<std::string, std::optional<double>>> durations_s;
};

struct comparison
{
    std::vector<sim_report> reports;
    std::vector<comparison_row> rows;
};

nlohmann::json to_json(const comparison& cmp);

/// Fixed-width text table for terminals.
std::string format_comparison(const comparison& cmp);

} // namespace ees

#endif // EES_SIM_REPORT_HPP
