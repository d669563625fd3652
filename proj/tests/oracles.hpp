// Brute-force reference implementations used by the property tests.
#ifndef EES_TESTS_ORACLES_HPP
#define EES_TESTS_ORACLES_HPP

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ees/node_agent.hpp"
#include "ees/profiles.hpp"
#include "ees/scaling.hpp"
#include "ees/scheduler.hpp"

namespace oracle {

/// Linear scan c = 1, 2, ... on rho = lambda / (c / exec).
inline int min_replicas(double lambda, double exec, double rho_max)
{
    for (int c = 1;; ++c)
        if (lambda / (c / exec) < rho_max)
            return c;
}

/// Enumerates every <freq, c> pair and sorts by (watts, freq, c).
inline ees::scaling_decision select_config(const ees::function_profile& p, double lambda, double rho_max)
{
    std::vector<std::tuple<double, int, int>> all;
    for (const auto& pt : p.curve) {
        const int c = min_replicas(lambda, pt.avg_exec_time_s, rho_max);
        all.emplace_back(pt.per_replica_power_w * c, pt.freq_mhz, c);
    }
    std::sort(all.begin(), all.end());
    ees::scaling_decision d;
    d.freq_mhz = std::get<1>(all.front());
    d.replicas = std::get<2>(all.front());
    d.predicted_power_w = std::get<0>(all.front());
    return d;
}

/// Spreadsheet-style prediction: every throughput times r.
inline std::map<int, double> predicted_throughput(const ees::function_profile& known,
                                                  const ees::observed_sample& s)
{
    double at_sample = 0.0;
    for (const auto& pt : known.curve)
        if (pt.freq_mhz == s.freq_mhz)
            at_sample = pt.throughput_rps;
    const double r = s.measured_throughput_rps / at_sample;
    std::map<int, double> out;
    for (const auto& pt : known.curve)
        out[pt.freq_mhz] = pt.throughput_rps * r;
    out[s.freq_mhz] = s.measured_throughput_rps;
    return out;
}

inline ees::core_map shift(const ees::core_map& m, int cores)
{
    ees::core_map out;
    for (const auto& [id, set] : m)
        for (int c : set)
            out[id].insert((c + 1) % cores);
    return out;
}

/// Impact straight from its definition, with per-job power maps.
inline double impact(const ees::node_view& n, int job_freq, const std::map<int, double>& job_power, int placed)
{
    if (n.current_freq_mhz > job_freq)
        return placed * (job_power.at(n.current_freq_mhz) - job_power.at(job_freq));
    if (n.current_freq_mhz == job_freq)
        return 0.0;
    double total = 0.0;
    for (const auto& h : n.hosted)
        total += h.replicas * (h.power_by_freq.at(job_freq) - h.power_by_freq.at(h.desired_freq_mhz));
    return total;
}

/// Valid random profile over `freqs`: exec falls and power rises with frequency.
inline ees::function_profile random_profile(std::mt19937_64& rng, const std::vector<int>& freqs,
                                            const std::string& id = "f", bool coarse_power = false)
{
    std::uniform_real_distribution<double> exec0(0.01, 2.0);
    std::uniform_real_distribution<double> step(0.0, 0.3);
    std::uniform_real_distribution<double> watts(1.0, 30.0);
    std::uniform_real_distribution<double> util(0.05, 1.0);
    std::uniform_int_distribution<int> coarse(1, 6);

    ees::function_profile p;
    p.function_id = id;
    p.cpu_cores = std::uniform_int_distribution<int>(0, 1)(rng) ? 1.0 : 0.5;
    p.memory_mb = 256;
    double exec = exec0(rng);
    double power = coarse_power ? coarse(rng) : watts(rng);
    const double u = util(rng);
    for (int f : freqs) {
        ees::frequency_point pt;
        pt.freq_mhz = f;
        pt.avg_exec_time_s = exec;
        pt.throughput_rps = 1.0 / exec;
        pt.per_replica_power_w = power;
        pt.cpu_utilization = u;
        p.curve.push_back(pt);
        exec *= 1.0 - step(rng);
        power += coarse_power ? coarse(rng) - 1 : watts(rng) * 0.2;
    }
    return p;
}

/// Random ascending subset of the default frequency set, of size 1..max_size.
inline std::vector<int> random_freqs(std::mt19937_64& rng, std::size_t max_size = 9)
{
    auto all = ees::default_frequency_set();
    std::shuffle(all.begin(), all.end(), rng);
    const auto n = std::uniform_int_distribution<std::size_t>(1, std::min(max_size, all.size()))(rng);
    std::vector<int> out(all.begin(), all.begin() + static_cast<long>(n));
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace oracle

#endif
