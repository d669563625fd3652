#ifndef EES_SCHEDULER_HPP
#define EES_SCHEDULER_HPP

#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "ees/profiles.hpp"
#include "ees/scaling.hpp"

namespace ees {

/// Placement and frequency policy of a cluster.
enum class strategy
{
    ees,    ///< energy efficient scheduler
    bp,     ///< round-robin spread, fractional cores, max frequency
    bps,    ///< as bp, min frequency
    bp_cpu, ///< as bp, whole exclusive cores
};

std::string_view to_string(strategy s);
/// Accepts "EES", "BP", "BPS", "BP_CPU" / "BP+CPU" (case-insensitive).
strategy parse_strategy(std::string_view name);

/// EES and BP+CPU pin each replica to whole cores nobody else uses.
constexpr bool exclusive_cores(strategy s) noexcept
{
    return s == strategy::ees || s == strategy::bp_cpu;
}

struct hosted_job
{
    std::string job_id;
    int replicas = 0;
    double cpu_cores = 1.0;        ///< fractional request per replica
    int cores_per_replica = 1;     ///< whole cores per replica when pinning
    int desired_freq_mhz = 0;
    std::map<int, double> power_by_freq; ///< per-replica watts
};

struct node_view
{
    std::string node_id;
    int total_cores = 0;
    double free_cores = 0.0;
    int free_whole_cores = 0;
    int current_freq_mhz = 0;
    std::vector<hosted_job> hosted;

    bool empty() const noexcept { return hosted.empty(); }
    const hosted_job* find(std::string_view job_id) const noexcept;
};

struct cluster
{
    std::vector<node_view> nodes; ///< kept sorted by node_id
    frequency_set freq_set;
    strategy policy = strategy::ees;

    node_view& node(std::string_view node_id);
    const node_view& node(std::string_view node_id) const;
};

/// `count` idle nodes named prefix1..prefixN, each at the policy's resting frequency.
cluster make_cluster(int count, int cores_per_node, frequency_set freq_set, strategy policy,
                     std::string_view prefix = "n");

/// Frequency an idle node rests at: max(P) for BP and BP+CPU, min(P) otherwise.
int resting_frequency(const cluster& c);

struct assignment
{
    std::string node_id;
    int replicas = 0;

    friend bool operator==(const assignment&, const assignment&) = default;
};

struct freq_update
{
    std::string node_id;
    int freq_mhz = 0;

    friend bool operator==(const freq_update&, const freq_update&) = default;
};

struct placement_plan
{
    std::vector<assignment> assignments;
    std::vector<freq_update> freq_updates;
    bool unscheduled = false;
    std::string reason;

    int placed_replicas() const noexcept;
};

/// Whole cores one replica occupies exclusively.
int cores_needed(const function_profile& profile);

/**
 * Excess watts caused by placing `replicas` replicas of the job on `node`.
 *
 * A hotter node charges the new job's own excess over its target frequency;
 * a colder node charges the hosted replicas' excess after raising the node
 * to the job's frequency. Throws unknown_frequency_error on a missing power
 * point.
 */
double impact(const node_view& node, const scaling_decision& decision,
              const function_profile& profile, int replicas = 1);

/**
 * Greedy low-load / high-load placement.
 *
 * 1. Non-empty nodes already at the job frequency, fewest free cores first.
 * 2. Empty nodes in node_id order, retuned to the job frequency.
 * 3. Remaining nodes with room, lowest impact first; colder nodes are raised.
 *
 * Returns an unscheduled plan (no assignments) when the replicas do not fit.
 * Does not modify the cluster.
 */
placement_plan schedule_ees(const cluster& c, std::string_view job_id,
                            const scaling_decision& decision, const function_profile& profile);

/// Round-robin spread in node_id order at the baseline governor frequency.
placement_plan schedule_baseline(const cluster& c, std::string_view job_id, int replicas,
                                 const function_profile& profile, strategy s);

/// Commits a plan. Replicas are recorded with `desired_freq_mhz`.
void apply_plan(cluster& c, const placement_plan& plan, std::string_view job_id,
                const function_profile& profile, int desired_freq_mhz);

/**
 * Removes the job from the node. Under EES the node is retuned to the
 * highest remaining desired frequency, or to min(P) when it becomes empty.
 * Returns the update that was applied, if any.
 */
std::optional<freq_update> on_job_complete(cluster& c, std::string_view node_id,
                                           std::string_view job_id);

/// Removes `count` replicas of a job from one node; removing the last one
/// behaves like on_job_complete.
std::optional<freq_update> remove_replicas(cluster& c, std::string_view node_id,
                                           std::string_view job_id, int count);

/// ceil(ready * mean / target), at least 1.
int autoscale_rps(int ready_replicas, double mean_load_per_replica, double target_load_per_replica);

/// Every violated cluster invariant, empty when consistent.
std::vector<std::string> check_invariants(const cluster& c);

/// One line of the placement/frequency log.
struct placement_event
{
    double t_s = 0.0;
    std::string kind; ///< place, remove, freq, unscheduled, scale
    std::string node_id;
    std::string job_id;
    int freq_mhz = 0;
    int replicas = 0;
};

void to_json(nlohmann::json& j, const placement_event& e);

/// Appends events as JSON lines.
void write_event_log(std::ostream& out, const std::vector<placement_event>& events);

} // namespace ees

#endif // EES_SCHEDULER_HPP
