#include "ees/scaling.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "ees/error.hpp"

namespace ees {

void check_job(const job_request& job)
{
    if (job.kind == job_kind::batch) {
        if (!(job.batch_size > 0.0) || !(job.deadline_s > 0.0))
            throw config_error("batch job '" + job.job_id + "' needs bs > 0 and d > 0");
    } else if (!(job.min_throughput_rps > 0.0)) {
        throw config_error("stream job '" + job.job_id + "' needs min_throughput_rps > 0");
    }
}

double arrival_rate(const job_request& job)
{
    return job.kind == job_kind::batch ? job.batch_size / job.deadline_s : job.min_throughput_rps;
}

double service_rate(int replicas, double avg_exec_time_s)
{
    return static_cast<double>(replicas) / avg_exec_time_s;
}

double utilization(double lambda_rps, double mu_rps)
{
    return lambda_rps / mu_rps;
}

int min_replicas(double lambda_rps, double avg_exec_time_s, double rho_max)
{
    if (!(lambda_rps > 0.0) || !(avg_exec_time_s > 0.0) || !(rho_max > 0.0) || rho_max > 1.0)
        throw error("min_replicas: inputs must be positive and rho_max in (0, 1]");

    const auto rho = [&](int c) { return utilization(lambda_rps, service_rate(c, avg_exec_time_s)); };

    const double offered = lambda_rps * avg_exec_time_s / rho_max;
    if (!(offered < static_cast<double>(std::numeric_limits<int>::max() / 2)))
        throw error("min_replicas: offered load too large");

    int c = std::max(1, static_cast<int>(std::floor(offered)));
    while (rho(c) >= rho_max)
        ++c;
    while (c > 1 && rho(c - 1) < rho_max)
        --c;
    return c;
}

scaling_decision select_config(const function_profile& profile, double lambda_rps, double rho_max)
{
    if (profile.curve.empty())
        throw config_error("profile '" + profile.function_id + "' has an empty curve");

    std::optional<scaling_decision> best;
    for (const auto& point : profile.curve) {
        scaling_decision candidate;
        candidate.freq_mhz = point.freq_mhz;
        candidate.replicas = min_replicas(lambda_rps, point.avg_exec_time_s, rho_max);
        candidate.predicted_rho
            = utilization(lambda_rps, service_rate(candidate.replicas, point.avg_exec_time_s));
        candidate.predicted_power_w = point.per_replica_power_w * candidate.replicas;
        candidate.lambda_rps = lambda_rps;

        if (!best) {
            best = candidate;
            continue;
        }
        const bool cheaper = candidate.predicted_power_w < best->predicted_power_w;
        const bool tie = candidate.predicted_power_w == best->predicted_power_w;
        if (cheaper
            || (tie && candidate.freq_mhz < best->freq_mhz)
            || (tie && candidate.freq_mhz == best->freq_mhz && candidate.replicas < best->replicas))
            best = candidate;
    }
    return *best;
}

int profile_run_frequency(std::span<const int> freq_set, std::uint64_t seed)
{
    if (freq_set.empty())
        throw config_error("empty frequency set");
    std::mt19937_64 engine(seed);
    return freq_set[engine() % freq_set.size()];
}

plan_result plan_job(const job_request& job, std::span<const function_profile> store,
                     const std::optional<observed_sample>& sample,
                     const planning_options& options)
{
    check_job(job);
    const double lambda = arrival_rate(job);

    if (job.profile)
        return select_config(*job.profile, lambda, options.rho_max);
    if (const auto* stored = find_profile(store, job.function_id))
        return select_config(*stored, lambda, options.rho_max);
    if (sample) {
        const auto& similar = match_closest(store, *sample);
        return select_config(predict_profile(similar, *sample), lambda, options.rho_max);
    }
    return profile_run_directive{profile_run_frequency(options.freq_set, options.seed), 1};
}

void to_json(nlohmann::json& j, const scaling_decision& d)
{
    j = nlohmann::json{{"freq_mhz", d.freq_mhz},
                       {"replicas", d.replicas},
                       {"predicted_rho", d.predicted_rho},
                       {"predicted_power_w", d.predicted_power_w},
                       {"lambda_rps", d.lambda_rps}};
}

void to_json(nlohmann::json& j, const profile_run_directive& d)
{
    j = nlohmann::json{{"directive", "profile-run"}, {"freq_mhz", d.freq_mhz}, {"replicas", d.replicas}};
}

void from_json(const nlohmann::json& j, job_request& job)
{
    job.job_id = j.value("job_id", std::string{});
    j.at("function_id").get_to(job.function_id);
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "batch") {
        job.kind = job_kind::batch;
        j.at("bs").get_to(job.batch_size);
        j.at("d").get_to(job.deadline_s);
    } else if (kind == "stream") {
        job.kind = job_kind::stream;
        j.at("min_throughput_rps").get_to(job.min_throughput_rps);
    } else {
        throw config_error("unknown job kind '" + kind + "'");
    }
    if (j.contains("profile"))
        job.profile = j.at("profile").get<function_profile>();
}

} // namespace ees
