#include "ees/scheduler.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "ees/error.hpp"

namespace ees {

namespace {

constexpr double capacity_epsilon = 1e-9;

std::string upper(std::string_view s)
{
    std::string out(s);
    for (auto& ch : out)
        ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return out;
}

double power_at(const std::map<int, double>& power_by_freq, int freq_mhz)
{
    auto it = power_by_freq.find(freq_mhz);
    if (it == power_by_freq.end())
        throw unknown_frequency_error(freq_mhz);
    return it->second;
}

/// Recomputes free capacity from the hosted list.
void refresh(node_view& node, strategy policy)
{
    double used = 0.0;
    int used_whole = 0;
    for (const auto& job : node.hosted) {
        if (exclusive_cores(policy)) {
            used += job.replicas * job.cores_per_replica;
            used_whole += job.replicas * job.cores_per_replica;
        } else {
            used += job.replicas * job.cpu_cores;
        }
    }
    node.free_cores = node.total_cores - used;
    node.free_whole_cores = exclusive_cores(policy)
        ? node.total_cores - used_whole
        : std::max(0, static_cast<int>(std::floor(node.free_cores + capacity_epsilon)));
}

int max_desired(const node_view& node)
{
    int best = 0;
    for (const auto& job : node.hosted)
        best = std::max(best, job.desired_freq_mhz);
    return best;
}

} // namespace

std::string_view to_string(strategy s)
{
    switch (s) {
    case strategy::ees:
        return "EES";
    case strategy::bp:
        return "BP";
    case strategy::bps:
        return "BPS";
    case strategy::bp_cpu:
        return "BP_CPU";
    }
    return "?";
}

strategy parse_strategy(std::string_view name)
{
    const auto n = upper(name);
    if (n == "EES")
        return strategy::ees;
    if (n == "BP")
        return strategy::bp;
    if (n == "BPS")
        return strategy::bps;
    if (n == "BP_CPU" || n == "BP+CPU" || n == "BPCPU")
        return strategy::bp_cpu;
    throw config_error("unknown strategy '" + std::string(name) + "'");
}

const hosted_job* node_view::find(std::string_view job_id) const noexcept
{
    for (const auto& job : hosted)
        if (job.job_id == job_id)
            return &job;
    return nullptr;
}

node_view& cluster::node(std::string_view node_id)
{
    for (auto& n : nodes)
        if (n.node_id == node_id)
            return n;
    throw error("unknown node '" + std::string(node_id) + "'");
}

const node_view& cluster::node(std::string_view node_id) const
{
    return const_cast<cluster&>(*this).node(node_id);
}

int resting_frequency(const cluster& c)
{
    if (c.freq_set.empty())
        throw config_error("empty frequency set");
    const bool at_max = c.policy == strategy::bp || c.policy == strategy::bp_cpu;
    return at_max ? c.freq_set.back() : c.freq_set.front();
}

cluster make_cluster(int count, int cores_per_node, frequency_set freq_set, strategy policy,
                     std::string_view prefix)
{
    if (count < 0 || cores_per_node <= 0)
        throw config_error("cluster needs a non-negative node count and positive cores per node");
    cluster c;
    c.freq_set = std::move(freq_set);
    std::sort(c.freq_set.begin(), c.freq_set.end());
    c.policy = policy;
    const int resting = resting_frequency(c);
    for (int i = 1; i <= count; ++i) {
        node_view n;
        n.node_id = std::string(prefix) + std::to_string(i);
        n.total_cores = cores_per_node;
        n.current_freq_mhz = resting;
        refresh(n, policy);
        c.nodes.push_back(std::move(n));
    }
    std::sort(c.nodes.begin(), c.nodes.end(),
              [](const node_view& a, const node_view& b) { return a.node_id < b.node_id; });
    return c;
}

int placement_plan::placed_replicas() const noexcept
{
    int total = 0;
    for (const auto& a : assignments)
        total += a.replicas;
    return total;
}

int cores_needed(const function_profile& profile)
{
    if (!(profile.cpu_cores > 0.0))
        throw config_error("profile '" + profile.function_id + "' has non-positive cpu_cores");
    return static_cast<int>(std::ceil(profile.cpu_cores - capacity_epsilon));
}

double impact(const node_view& node, const scaling_decision& decision,
              const function_profile& profile, int replicas)
{
    if (node.current_freq_mhz > decision.freq_mhz) {
        const double hot = lookup(profile, node.current_freq_mhz).per_replica_power_w;
        const double target = lookup(profile, decision.freq_mhz).per_replica_power_w;
        return replicas * (hot - target);
    }
    if (node.current_freq_mhz < decision.freq_mhz) {
        double total = 0.0;
        for (const auto& job : node.hosted)
            total += job.replicas
                     * (power_at(job.power_by_freq, decision.freq_mhz)
                        - power_at(job.power_by_freq, job.desired_freq_mhz));
        return total;
    }
    return 0.0;
}

placement_plan schedule_ees(const cluster& c, std::string_view job_id,
                            const scaling_decision& decision, const function_profile& profile)
{
    const int need = cores_needed(profile);
    int remaining = decision.replicas;

    struct slot
    {
        const node_view* node;
        int free_whole;
        int placed = 0;
    };
    std::vector<slot> slots;
    slots.reserve(c.nodes.size());
    for (const auto& n : c.nodes)
        slots.push_back({&n, n.free_whole_cores});

    placement_plan plan;
    auto fill = [&](slot& s) {
        const int fit = std::min(remaining, s.free_whole / need);
        s.free_whole -= fit * need;
        s.placed += fit;
        remaining -= fit;
    };
    auto by_id = [](const slot* a, const slot* b) { return a->node->node_id < b->node->node_id; };

    // Low load: nodes already at the job frequency, tightest first.
    std::vector<slot*> matching;
    for (auto& s : slots)
        if (!s.node->empty() && s.node->current_freq_mhz == decision.freq_mhz && s.free_whole >= need)
            matching.push_back(&s);
    std::sort(matching.begin(), matching.end(), [&](const slot* a, const slot* b) {
        return a->free_whole != b->free_whole ? a->free_whole < b->free_whole : by_id(a, b);
    });
    for (auto* s : matching) {
        if (remaining == 0)
            break;
        fill(*s);
    }

    // Low load: empty nodes, retuned to the job frequency.
    std::vector<slot*> empties;
    for (auto& s : slots)
        if (s.node->empty() && s.free_whole >= need)
            empties.push_back(&s);
    std::sort(empties.begin(), empties.end(), by_id);
    for (auto* s : empties) {
        if (remaining == 0)
            break;
        fill(*s);
        if (s->node->current_freq_mhz != decision.freq_mhz)
            plan.freq_updates.push_back({s->node->node_id, decision.freq_mhz});
    }

    // High load: everything else with room, cheapest impact first.
    if (remaining > 0) {
        std::vector<std::pair<double, slot*>> ranked;
        for (auto& s : slots) {
            if (s.free_whole < need)
                continue;
            const int fit = std::min(remaining, s.free_whole / need);
            ranked.emplace_back(impact(*s.node, decision, profile, fit), &s);
        }
        std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
            return a.first != b.first ? a.first < b.first : by_id(a.second, b.second);
        });
        for (auto& [cost, s] : ranked) {
            if (remaining == 0)
                break;
            fill(*s);
            if (s->node->current_freq_mhz < decision.freq_mhz)
                plan.freq_updates.push_back({s->node->node_id, decision.freq_mhz});
        }
    }

    if (remaining > 0) {
        placement_plan rejected;
        rejected.unscheduled = true;
        rejected.reason = "insufficient free cores for job '" + std::string(job_id) + "': "
                          + std::to_string(remaining) + " of " + std::to_string(decision.replicas)
                          + " replicas do not fit";
        return rejected;
    }

    for (const auto& s : slots)
        if (s.placed > 0)
            plan.assignments.push_back({s.node->node_id, s.placed});
    std::sort(plan.assignments.begin(), plan.assignments.end(),
              [](const assignment& a, const assignment& b) { return a.node_id < b.node_id; });
    return plan;
}

placement_plan schedule_baseline(const cluster& c, std::string_view job_id, int replicas,
                                 const function_profile& profile, strategy s)
{
    if (s == strategy::ees)
        throw error("schedule_baseline called with the EES strategy");
    const bool exclusive = exclusive_cores(s);
    const int need = cores_needed(profile);
    const int governor = (s == strategy::bps) ? c.freq_set.front() : c.freq_set.back();

    std::vector<const node_view*> order;
    for (const auto& n : c.nodes)
        order.push_back(&n);
    std::sort(order.begin(), order.end(),
              [](const node_view* a, const node_view* b) { return a->node_id < b->node_id; });

    std::vector<double> free_cores;
    std::vector<int> free_whole;
    for (const auto* n : order) {
        free_cores.push_back(n->free_cores);
        free_whole.push_back(n->free_whole_cores);
    }
    std::vector<int> placed(order.size(), 0);

    int remaining = replicas;
    bool progress = true;
    while (remaining > 0 && progress) {
        progress = false;
        for (std::size_t i = 0; i < order.size() && remaining > 0; ++i) {
            const bool fits = exclusive ? free_whole[i] >= need
                                        : free_cores[i] + capacity_epsilon >= profile.cpu_cores;
            if (!fits)
                continue;
            if (exclusive) {
                free_whole[i] -= need;
                free_cores[i] -= need;
            } else {
                free_cores[i] -= profile.cpu_cores;
            }
            ++placed[i];
            --remaining;
            progress = true;
        }
    }

    placement_plan plan;
    if (remaining > 0) {
        plan.unscheduled = true;
        plan.reason = "insufficient capacity for job '" + std::string(job_id) + "': "
                      + std::to_string(remaining) + " of " + std::to_string(replicas)
                      + " replicas do not fit";
        return plan;
    }
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (placed[i] == 0)
            continue;
        plan.assignments.push_back({order[i]->node_id, placed[i]});
        if (order[i]->current_freq_mhz != governor)
            plan.freq_updates.push_back({order[i]->node_id, governor});
    }
    return plan;
}

void apply_plan(cluster& c, const placement_plan& plan, std::string_view job_id,
                const function_profile& profile, int desired_freq_mhz)
{
    if (plan.unscheduled)
        return;
    std::map<int, double> power;
    for (const auto& p : profile.curve)
        power.emplace(p.freq_mhz, p.per_replica_power_w);

    for (const auto& a : plan.assignments) {
        auto& node = c.node(a.node_id);
        auto it = std::find_if(node.hosted.begin(), node.hosted.end(),
                               [&](const hosted_job& j) { return j.job_id == job_id; });
        if (it != node.hosted.end()) {
            it->replicas += a.replicas;
        } else {
            hosted_job job;
            job.job_id = std::string(job_id);
            job.replicas = a.replicas;
            job.cpu_cores = profile.cpu_cores;
            job.cores_per_replica = cores_needed(profile);
            job.desired_freq_mhz = desired_freq_mhz;
            job.power_by_freq = power;
            node.hosted.push_back(std::move(job));
        }
        refresh(node, c.policy);
    }
    for (const auto& u : plan.freq_updates) {
        if (!contains_frequency(c.freq_set, u.freq_mhz))
            throw unknown_frequency_error(u.freq_mhz);
        c.node(u.node_id).current_freq_mhz = u.freq_mhz;
    }
}

std::optional<freq_update> remove_replicas(cluster& c, std::string_view node_id,
                                           std::string_view job_id, int count)
{
    auto& node = c.node(node_id);
    auto it = std::find_if(node.hosted.begin(), node.hosted.end(),
                           [&](const hosted_job& j) { return j.job_id == job_id; });
    if (it == node.hosted.end())
        throw unknown_job_error(std::string(job_id));

    it->replicas -= std::min(count, it->replicas);
    if (it->replicas > 0) {
        refresh(node, c.policy);
        return std::nullopt;
    }
    node.hosted.erase(it);
    refresh(node, c.policy);

    if (c.policy != strategy::ees)
        return std::nullopt;
    const int target = node.empty() ? c.freq_set.front() : max_desired(node);
    if (target == node.current_freq_mhz)
        return std::nullopt;
    node.current_freq_mhz = target;
    return freq_update{node.node_id, target};
}

std::optional<freq_update> on_job_complete(cluster& c, std::string_view node_id,
                                           std::string_view job_id)
{
    const auto* job = c.node(node_id).find(job_id);
    if (job == nullptr)
        throw unknown_job_error(std::string(job_id));
    return remove_replicas(c, node_id, job_id, job->replicas);
}

int autoscale_rps(int ready_replicas, double mean_load_per_replica, double target_load_per_replica)
{
    if (ready_replicas < 1 || !(target_load_per_replica > 0.0))
        throw error("autoscale_rps: needs ready_replicas >= 1 and a positive target");
    const double wanted = ready_replicas * (mean_load_per_replica / target_load_per_replica);
    const double rounded = std::ceil(wanted - 1e-9);
    return std::max(1, static_cast<int>(rounded));
}

std::vector<std::string> check_invariants(const cluster& c)
{
    std::vector<std::string> out;
    for (const auto& n : c.nodes) {
        const std::string where = "node " + n.node_id + ": ";
        if (!contains_frequency(c.freq_set, n.current_freq_mhz))
            out.push_back(where + "frequency not in P");
        if (n.free_whole_cores < 0 || n.free_whole_cores > n.total_cores)
            out.push_back(where + "free_whole_cores out of range");
        if (n.free_cores < -capacity_epsilon)
            out.push_back(where + "negative free cores");
        if (exclusive_cores(c.policy)) {
            int used = 0;
            for (const auto& j : n.hosted)
                used += j.replicas * j.cores_per_replica;
            if (used + n.free_whole_cores != n.total_cores)
                out.push_back(where + "whole-core accounting mismatch");
        }
        for (const auto& j : n.hosted)
            if (j.replicas <= 0)
                out.push_back(where + "job " + j.job_id + " with no replicas");
        if (c.policy == strategy::ees) {
            if (n.empty() && n.current_freq_mhz != c.freq_set.front())
                out.push_back(where + "empty node not at min(P)");
            if (!n.empty() && n.current_freq_mhz != max_desired(n))
                out.push_back(where + "frequency differs from max desired frequency");
        } else if (n.current_freq_mhz != resting_frequency(c)) {
            out.push_back(where + "frequency differs from governor setting");
        }
    }
    return out;
}

void to_json(nlohmann::json& j, const placement_event& e)
{
    j = nlohmann::json{{"t", e.t_s}, {"event", e.kind}, {"node", e.node_id},
                       {"job", e.job_id}, {"freq", e.freq_mhz}, {"replicas", e.replicas}};
}

void write_event_log(std::ostream& out, const std::vector<placement_event>& events)
{
    for (const auto& e : events)
        out << nlohmann::json(e).dump() << '\n';
}

} // namespace ees
