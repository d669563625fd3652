#include "ees/sim_report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "ees/error.hpp"

namespace ees {

response_summary summarize(std::vector<double> times)
{
    response_summary s;
    if (times.empty())
        return s;
    std::sort(times.begin(), times.end());
    const auto rank = [&](double q) {
        const auto idx = static_cast<std::size_t>(std::ceil(q * times.size()));
        return times[std::clamp<std::size_t>(idx, 1, times.size()) - 1];
    };
    s.count = times.size();
    s.mean_s = std::accumulate(times.begin(), times.end(), 0.0) / times.size();
    s.p50_s = rank(0.50);
    s.p95_s = rank(0.95);
    s.p99_s = rank(0.99);
    s.max_s = times.back();
    return s;
}

std::uint64_t sim_report::total_slo_violations() const
{
    std::uint64_t total = 0;
    for (const auto& w : workloads)
        total += w.slo_violations;
    return total;
}

double sim_report::integrated_energy_j() const
{
    double total = 0.0;
    for (std::size_t i = 0; i < power_timeseries.size(); ++i) {
        const double start = power_timeseries[i].first;
        const double end = i + 1 < power_timeseries.size() ? power_timeseries[i + 1].first : horizon_s;
        total += power_timeseries[i].second * (end - start);
    }
    return total;
}

namespace {

nlohmann::json series_json(const time_series& s)
{
    auto out = nlohmann::json::array();
    for (const auto& [t, v] : s)
        out.push_back({t, v});
    return out;
}

template <typename T>
nlohmann::json optional_json(const std::optional<T>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string num(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

void write_series_csv(const std::filesystem::path& path, const std::string& id_column,
                      const std::vector<std::pair<std::string, const time_series*>>& series)
{
    std::ofstream out(path);
    if (!out)
        throw config_error("cannot write " + path.string());
    out << "t_s," << id_column << ",value\n";
    for (const auto& [id, s] : series)
        for (const auto& [t, v] : *s)
            out << num(t) << ',' << id << ',' << num(v) << '\n';
}

} // namespace

nlohmann::json to_json(const sim_report& r)
{
    nlohmann::json j;
    j["strategy"] = std::string(to_string(r.policy));
    j["seed"] = r.seed;
    j["horizon_s"] = r.horizon_s;
    j["total_energy_j"] = r.total_energy_j;
    j["sample_interval_s"] = r.sample_interval_s;
    j["power_timeseries"] = series_json(r.power_timeseries);
    j["min_idle_nodes_all_active"] = optional_json(r.min_idle_nodes_all_active);
    j["total_slo_violations"] = r.total_slo_violations();
    j["notes"] = r.notes;

    auto workloads = nlohmann::json::array();
    for (const auto& w : r.workloads) {
        workloads.push_back({
            {"workload_id", w.workload_id},
            {"function_id", w.function_id},
            {"submitted_at_s", w.submitted_at_s},
            {"completed_at_s", optional_json(w.completed_at_s)},
            {"duration_s", optional_json(w.duration_s)},
            {"generated", w.generated},
            {"completed", w.completed},
            {"in_flight", w.in_flight},
            {"rejected", w.rejected},
            {"slo_violations", w.slo_violations},
            {"achieved_throughput_rps", w.achieved_throughput_rps},
            {"mean_busy_fraction", w.mean_busy_fraction},
            {"response_time_s", {{"count", w.response.count},
                                 {"mean", w.response.mean_s},
                                 {"p50", w.response.p50_s},
                                 {"p95", w.response.p95_s},
                                 {"p99", w.response.p99_s},
                                 {"max", w.response.max_s}}},
            {"mean_cold_start_s", w.mean_cold_start_s},
            {"unscheduled", w.unscheduled},
            {"profile_run", w.profile_run},
            {"freq_mhz", w.freq_mhz},
            {"planned_replicas", w.planned_replicas},
            {"predicted_rho", w.predicted_rho},
            {"peak_replicas", w.peak_replicas},
            {"replica_trace", series_json(w.replica_trace)},
        });
    }
    j["workloads"] = workloads;

    auto nodes = nlohmann::json::array();
    for (const auto& n : r.nodes)
        nodes.push_back({{"node_id", n.node_id},
                         {"energy_j", n.energy_j},
                         {"hosted_time_s", n.hosted_time_s},
                         {"freq_trace", series_json(n.freq_trace)}});
    j["nodes"] = nodes;
    return j;
}

void write_report_files(const sim_report& r, const std::filesystem::path& dir,
                        const std::string& stem, bool json, bool csv)
{
    std::filesystem::create_directories(dir);
    if (json) {
        std::ofstream out(dir / (stem + ".json"));
        if (!out)
            throw config_error("cannot write report to " + dir.string());
        out << to_json(r).dump(2) << '\n';
    }
    if (!csv)
        return;

    write_series_csv(dir / (stem + "_power.csv"), "node_id", {{"cluster", &r.power_timeseries}});

    std::vector<std::pair<std::string, const time_series*>> freq;
    for (const auto& n : r.nodes)
        freq.emplace_back(n.node_id, &n.freq_trace);
    write_series_csv(dir / (stem + "_frequency.csv"), "node_id", freq);

    std::vector<std::pair<std::string, const time_series*>> replicas;
    for (const auto& w : r.workloads)
        replicas.emplace_back(w.workload_id, &w.replica_trace);
    write_series_csv(dir / (stem + "_replicas.csv"), "workload_id", replicas);

    std::ofstream events(dir / (stem + "_events.jsonl"));
    write_event_log(events, r.events);
}

nlohmann::json to_json(const comparison& cmp)
{
    auto rows = nlohmann::json::array();
    for (const auto& row : cmp.rows) {
        auto durations = nlohmann::json::object();
        for (const auto& [id, d] : row.durations_s)
            durations[id] = optional_json(d);
        rows.push_back({{"strategy", std::string(to_string(row.policy))},
                        {"total_energy_j", row.total_energy_j},
                        {"savings_vs_bp_pct", optional_json(row.savings_vs_bp_pct)},
                        {"slo_violations", row.slo_violations},
                        {"duration_s", durations}});
    }
    return {{"rows", rows}};
}

std::string format_comparison(const comparison& cmp)
{
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof line, "%-8s %16s %14s %14s\n", "strategy", "energy_j",
                  "savings_vs_bp", "slo_violations");
    out << line;
    for (const auto& row : cmp.rows) {
        char savings[32] = "n/a";
        if (row.savings_vs_bp_pct) {
            const double pct = std::abs(*row.savings_vs_bp_pct) < 0.005 ? 0.0 : *row.savings_vs_bp_pct;
            std::snprintf(savings, sizeof savings, "%.2f%%", pct);
        }
        std::snprintf(line, sizeof line, "%-8s %16.1f %14s %14llu\n",
                      std::string(to_string(row.policy)).c_str(), row.total_energy_j,
                      savings, static_cast<unsigned long long>(row.slo_violations));
        out << line;
    }
    return out.str();
}

} // namespace ees
