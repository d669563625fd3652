#ifndef EES_SCALING_HPP
#define EES_SCALING_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "ees/profiles.hpp"

namespace ees {

/// Default ceiling on the M/M/c utilization factor (strict: rho must stay below it).
inline constexpr double default_rho_max = 0.8;

enum class job_kind { batch, stream };

struct job_request
{
    std::string job_id;
    std::string function_id;
    job_kind kind = job_kind::stream;
    double batch_size = 0.0;        ///< bs, batch only
    double deadline_s = 0.0;        ///< d, batch only
    double min_throughput_rps = 0.0;///< stream only
    std::optional<function_profile> profile;
};

/// Chosen <frequency, replicas> pair and what the queuing model predicts for it.
struct scaling_decision
{
    int freq_mhz = 0;
    int replicas = 1;
    double predicted_rho = 0.0;
    double predicted_power_w = 0.0; ///< per-replica power at freq_mhz times replicas
    double lambda_rps = 0.0;

    friend bool operator==(const scaling_decision&, const scaling_decision&) = default;
};

/// No history and no sample: deploy one replica at `freq_mhz` and collect monitoring data.
struct profile_run_directive
{
    int freq_mhz = 0;
    int replicas = 1;

    friend bool operator==(const profile_run_directive&, const profile_run_directive&) = default;
};

using plan_result = std::variant<scaling_decision, profile_run_directive>;

struct planning_options
{
    double rho_max = default_rho_max;
    frequency_set freq_set = default_frequency_set();
    std::uint64_t seed = 42;
};

/// Throws config_error when the job violates its own invariants.
void check_job(const job_request& job);

/// lambda: the stream rate, or bs/d for a batch.
double arrival_rate(const job_request& job);

/// mu = c / avgExecTime.
double service_rate(int replicas, double avg_exec_time_s);

/// rho = lambda / mu. May exceed 1.
double utilization(double lambda_rps, double mu_rps);

/// Smallest c >= 1 with utilization(lambda, service_rate(c, exec)) < rho_max.
int min_replicas(double lambda_rps, double avg_exec_time_s, double rho_max);

/**
 * Evaluates every curve point and keeps the one minimizing
 * per_replica_power_w * c. Ties prefer the lower frequency, then fewer
 * replicas.
 */
scaling_decision select_config(const function_profile& profile, double lambda_rps, double rho_max);

/**
 * Sizes a job. Uses the job's own profile or the store entry for its
 * function; failing that, predicts a profile from `sample`; failing that,
 * asks for a profile run at a seeded frequency with one replica.
 */
plan_result plan_job(const job_request& job, std::span<const function_profile> store,
                     const std::optional<observed_sample>& sample,
                     const planning_options& options = {});

/// Frequency drawn for a profile run. Depends only on the seed and the set.
int profile_run_frequency(std::span<const int> freq_set, std::uint64_t seed);

void to_json(nlohmann::json& j, const scaling_decision& d);
void to_json(nlohmann::json& j, const profile_run_directive& d);
void from_json(const nlohmann::json& j, job_request& job);

} // namespace ees

#endif // EES_SCALING_HPP
