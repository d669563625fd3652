#ifndef EES_SIM_CONFIG_HPP
#define EES_SIM_CONFIG_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ees/profiles.hpp"
#include "ees/scaling.hpp"

namespace ees {

enum class service_distribution { exponential, deterministic };

enum class arrival_pattern
{
    poisson, ///< exponential inter-arrival times at the workload rate
    burst,   ///< a batch's requests all arrive at submission
};

struct workload_spec
{
    std::string workload_id;
    std::string function_id;
    job_kind kind = job_kind::stream;

    double rate_rps = 0.0;           ///< stream request rate
    double traffic_duration_s = 0.0; ///< stream: how long requests keep coming
    double batch_size = 0.0;         ///< batch: total requests
    double deadline_s = 0.0;         ///< batch: completion deadline after submission
    arrival_pattern arrivals = arrival_pattern::poisson;

    std::optional<double> slo_max_response_s;

    /// False when the scheduler has no history for the function and must profile it.
    bool profiled = true;

    /// Baseline autoscaler target; defaults to rho_max times one replica's throughput at max(P).
    std::optional<double> target_load_rps;

    /// Fixed EES deployment that bypasses the scaling component.
    std::optional<int> pinned_freq_mhz;
    std::optional<int> pinned_replicas;

    /// Fixed submission time; otherwise drawn from the inter-arrival process.
    std::optional<double> submit_at_s;
};

struct cold_start_model
{
    double base_s = 1.0;
    double extra_at_min_freq_s = 0.3; ///< added at min(P), falling linearly to 0 at max(P)
    std::map<std::string, std::map<int, double>> per_function; ///< explicit overrides

    double delay(const std::string& function_id, int freq_mhz, const frequency_set& freq_set) const;
};

struct sim_config
{
    frequency_set freq_set = default_frequency_set();
    double rho_max = default_rho_max;
    int node_count = 7;
    int cores_per_node = 4;
    std::map<int, double> idle_power_w;
    std::optional<double> max_node_power_w;

    /// Ground truth for every function the workloads run.
    std::vector<function_profile> profiles;
    std::vector<workload_spec> workloads;

    double workload_interarrival_rate = 0.05;
    cold_start_model cold_start;
    double duration_s = 600.0;     ///< minimum simulated time
    double max_duration_s = 7200.0;///< hard stop even if work remains
    std::uint64_t seed = 42;
    service_distribution service = service_distribution::exponential;
    double autoscaler_interval_s = 10.0;
    double rotation_period_s = 60.0;
    double profile_run_s = 30.0;
    double sample_interval_s = 1.0;

    /// Profiles the scheduler may consult: all but those of unprofiled workloads.
    std::vector<function_profile> known_profiles() const;

    /// idle_w(max P) + cores * the largest per-replica power at max(P), unless set.
    double effective_max_node_power() const;
};

/// Idle power rising linearly from `at_min_w` at min(P) to `at_max_w` at max(P).
std::map<int, double> linear_idle_power(const frequency_set& freq_set, double at_min_w, double at_max_w);

/// Throws config_error (or unknown_profile_error) describing the first problem.
void validate_config(const sim_config& config);

/// Parses a config document. Relative profile paths resolve against `base_dir`.
sim_config parse_sim_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);
sim_config load_sim_config(const std::filesystem::path& path);

nlohmann::json to_json(const sim_config& config);

} // namespace ees

#endif // EES_SIM_CONFIG_HPP
