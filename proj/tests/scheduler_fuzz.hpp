// Randomized schedule/complete interleavings shared by the unit and acceptance suites.
#ifndef EES_TESTS_SCHEDULER_FUZZ_HPP
#define EES_TESTS_SCHEDULER_FUZZ_HPP

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ees/scheduler.hpp"
#include "oracles.hpp"

namespace fuzz {

inline std::string snapshot(const ees::cluster& c)
{
    std::ostringstream out;
    out.precision(17);
    for (const auto& n : c.nodes) {
        out << n.node_id << ' ' << n.total_cores << ' ' << n.free_cores << ' ' << n.free_whole_cores << ' '
            << n.current_freq_mhz << '|';
        for (const auto& j : n.hosted)
            out << j.job_id << ':' << j.replicas << ':' << j.desired_freq_mhz << ',';
        out << '\n';
    }
    return out.str();
}

/// Invariant violations beyond check_invariants: exclusivity and the EES frequency rules, recomputed here.
inline std::vector<std::string> independent_checks(const ees::cluster& c)
{
    std::vector<std::string> out;
    for (const auto& n : c.nodes) {
        int whole = 0;
        int max_desired = 0;
        for (const auto& j : n.hosted) {
            whole += j.replicas * j.cores_per_replica;
            max_desired = std::max(max_desired, j.desired_freq_mhz);
        }
        if (ees::exclusive_cores(c.policy) && whole > n.total_cores)
            out.push_back(n.node_id + ": cores shared between replicas");
        if (c.policy == ees::strategy::ees) {
            if (n.empty() && n.current_freq_mhz != c.freq_set.front())
                out.push_back(n.node_id + ": empty node above min(P)");
            if (!n.empty() && n.current_freq_mhz != max_desired)
                out.push_back(n.node_id + ": frequency is not the max desired frequency");
        }
    }
    return out;
}

struct outcome
{
    int sequences = 0;
    int operations = 0;
    int unscheduled = 0;
    std::vector<std::string> failures;
};

/**
 * Runs `sequences` random interleavings of schedule and complete operations
 * on small EES clusters and records every invariant violation.
 */
inline outcome run(int sequences, std::uint64_t seed, int ops_per_sequence = 12)
{
    using namespace ees;
    std::mt19937_64 rng(seed);
    outcome result;
    const auto P = default_frequency_set();

    for (int s = 0; s < sequences; ++s) {
        const int nodes = std::uniform_int_distribution<int>(1, 5)(rng);
        const int cores = std::uniform_int_distribution<int>(2, 8)(rng);
        auto c = make_cluster(nodes, cores, P, strategy::ees);
        std::vector<std::pair<std::string, function_profile>> live;
        int next_id = 0;

        for (int op = 0; op < ops_per_sequence; ++op) {
            ++result.operations;
            const bool complete = !live.empty() && std::uniform_int_distribution<int>(0, 2)(rng) == 0;
            if (complete) {
                const auto pick = std::uniform_int_distribution<std::size_t>(0, live.size() - 1)(rng);
                const auto job = live[pick].first;
                for (const auto& n : c.nodes)
                    if (n.find(job) != nullptr)
                        on_job_complete(c, n.node_id, job);
                live.erase(live.begin() + static_cast<long>(pick));
            } else {
                auto profile = oracle::random_profile(rng, P, "fn");
                profile.cpu_cores = std::uniform_int_distribution<int>(0, 2)(rng) == 0 ? 2.0 : 0.5;
                scaling_decision d;
                d.freq_mhz = P[std::uniform_int_distribution<std::size_t>(0, P.size() - 1)(rng)];
                d.replicas = std::uniform_int_distribution<int>(1, 6)(rng);
                const std::string job = "j" + std::to_string(next_id++);
                const auto before = snapshot(c);
                const auto plan = schedule_ees(c, job, d, profile);
                if (plan.unscheduled) {
                    ++result.unscheduled;
                    if (!plan.assignments.empty() || !plan.freq_updates.empty())
                        result.failures.push_back("unscheduled plan carries changes");
                    apply_plan(c, plan, job, profile, d.freq_mhz);
                    if (snapshot(c) != before)
                        result.failures.push_back("unscheduled plan changed the cluster");
                } else {
                    if (plan.placed_replicas() != d.replicas)
                        result.failures.push_back("plan places the wrong replica count");
                    if (snapshot(c) != before)
                        result.failures.push_back("schedule_ees mutated the cluster");
                    apply_plan(c, plan, job, profile, d.freq_mhz);
                    live.emplace_back(job, profile);
                }
            }
            for (const auto& v : check_invariants(c))
                result.failures.push_back(v);
            for (const auto& v : independent_checks(c))
                result.failures.push_back(v);
        }
        ++result.sequences;
    }
    return result;
}

} // namespace fuzz

#endif
