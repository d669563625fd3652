#ifndef EES_SIMULATOR_HPP
#define EES_SIMULATOR_HPP

#include <map>
#include <span>

#include "ees/profiles.hpp"
#include "ees/scheduler.hpp"
#include "ees/sim_config.hpp"
#include "ees/sim_report.hpp"

namespace ees {

struct busy_replica
{
    const function_profile* profile = nullptr;
    double busy_fraction = 1.0; ///< instantaneous, in [0, 1]
};

/// idle_w(freq) + sum of per-replica power at freq times busy fraction.
double node_power(int freq_mhz, std::span<const busy_replica> busy,
                  const std::map<int, double>& idle_power_w);

/**
 * Runs one strategy on a config and returns its report.
 *
 * Deterministic: the report is a pure function of the config (including its
 * seed) and the strategy. Arrivals and service demands come from per-workload
 * random streams, so every strategy sees the same requests.
 */
sim_report run(const sim_config& config, strategy policy);

/// Runs each strategy on the same config; savings are relative to BP when it is listed.
comparison compare(const sim_config& config, std::span<const strategy> strategies,
                   bool parallel = true);

} // namespace ees

#endif // EES_SIMULATOR_HPP
