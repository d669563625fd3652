#include "ees/sim_config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "ees/error.hpp"

namespace ees {

double cold_start_model::delay(const std::string& function_id, int freq_mhz,
                               const frequency_set& freq_set) const
{
    if (auto fn = per_function.find(function_id); fn != per_function.end()) {
        if (auto it = fn->second.find(freq_mhz); it != fn->second.end())
            return it->second;
    }
    const double lo = freq_set.front();
    const double hi = freq_set.back();
    const double slowdown = hi > lo ? (hi - freq_mhz) / (hi - lo) : 0.0;
    return base_s + extra_at_min_freq_s * slowdown;
}

std::vector<function_profile> sim_config::known_profiles() const
{
    std::set<std::string> hidden;
    for (const auto& w : workloads)
        if (!w.profiled)
            hidden.insert(w.function_id);
    std::vector<function_profile> out;
    for (const auto& p : profiles)
        if (!hidden.contains(p.function_id))
            out.push_back(p);
    return out;
}

double sim_config::effective_max_node_power() const
{
    if (max_node_power_w)
        return *max_node_power_w;
    const int top = freq_set.back();
    double per_replica = 0.0;
    for (const auto& p : profiles)
        if (const auto* point = find_point(p, top))
            per_replica = std::max(per_replica, point->per_replica_power_w);
    const auto idle = idle_power_w.find(top);
    const double base = idle == idle_power_w.end() ? 0.0 : idle->second;
    const double total = base + cores_per_node * per_replica;
    return total > 0.0 ? total : 1.0;
}

std::map<int, double> linear_idle_power(const frequency_set& freq_set, double at_min_w, double at_max_w)
{
    std::map<int, double> out;
    if (freq_set.empty())
        return out;
    const double lo = freq_set.front();
    const double hi = freq_set.back();
    for (int f : freq_set) {
        const double x = hi > lo ? (f - lo) / (hi - lo) : 0.0;
        out[f] = at_min_w + (at_max_w - at_min_w) * x;
    }
    return out;
}

void validate_config(const sim_config& c)
{
    if (c.freq_set.empty())
        throw config_error("frequency set is empty");
    if (!std::is_sorted(c.freq_set.begin(), c.freq_set.end())
        || std::adjacent_find(c.freq_set.begin(), c.freq_set.end()) != c.freq_set.end())
        throw config_error("frequency set must be strictly ascending");
    if (!(c.rho_max > 0.0 && c.rho_max <= 1.0))
        throw config_error("rho_max must be in (0, 1]");
    if (c.node_count < 0 || c.cores_per_node < 1)
        throw config_error("invalid node count or cores per node");
    for (int f : c.freq_set) {
        auto it = c.idle_power_w.find(f);
        if (it == c.idle_power_w.end() || !(it->second >= 0.0))
            throw config_error("missing idle power for " + std::to_string(f) + " MHz");
    }
    if (!(c.workload_interarrival_rate > 0.0))
        throw config_error("workload_interarrival_rate must be positive");
    if (!(c.duration_s >= 0.0) || !(c.max_duration_s >= c.duration_s))
        throw config_error("need 0 <= duration_s <= max_duration_s");
    if (!(c.autoscaler_interval_s > 0.0) || !(c.rotation_period_s > 0.0)
        || !(c.profile_run_s > 0.0) || !(c.sample_interval_s > 0.0))
        throw config_error("intervals must be positive");

    for (const auto& p : c.profiles) {
        const auto problems = validate_profile(p, c.freq_set);
        if (!problems.empty())
            throw config_error("profile '" + p.function_id + "': " + problems.front());
        for (int f : c.freq_set)
            if (find_point(p, f) == nullptr)
                throw config_error("profile '" + p.function_id + "' lacks a point at "
                                   + std::to_string(f) + " MHz");
    }

    std::set<std::string> ids;
    for (const auto& w : c.workloads) {
        if (w.workload_id.empty() || !ids.insert(w.workload_id).second)
            throw config_error("workload ids must be unique and non-empty");
        if (find_profile(c.profiles, w.function_id) == nullptr)
            throw unknown_profile_error(w.function_id);
        if (w.kind == job_kind::stream) {
            if (!(w.rate_rps > 0.0) || !(w.traffic_duration_s > 0.0))
                throw config_error("stream workload '" + w.workload_id
                                   + "' needs rate_rps and traffic_duration_s > 0");
        } else if (!(w.batch_size >= 1.0) || !(w.deadline_s > 0.0)) {
            throw config_error("batch workload '" + w.workload_id + "' needs bs >= 1 and d > 0");
        }
        if (w.pinned_freq_mhz && !contains_frequency(c.freq_set, *w.pinned_freq_mhz))
            throw config_error("workload '" + w.workload_id + "' pins a frequency outside P");
        if (w.pinned_replicas && *w.pinned_replicas < 1)
            throw config_error("workload '" + w.workload_id + "' pins fewer than one replica");
        if (w.target_load_rps && !(*w.target_load_rps > 0.0))
            throw config_error("workload '" + w.workload_id + "' has a non-positive target load");
    }
}

namespace {

std::map<int, double> parse_freq_map(const nlohmann::json& j)
{
    std::map<int, double> out;
    for (const auto& [key, value] : j.items())
        out[std::stoi(key)] = value.get<double>();
    return out;
}

nlohmann::json freq_map_json(const std::map<int, double>& m)
{
    auto out = nlohmann::json::object();
    for (const auto& [f, v] : m)
        out[std::to_string(f)] = v;
    return out;
}

workload_spec parse_workload(const nlohmann::json& j)
{
    workload_spec w;
    j.at("workload_id").get_to(w.workload_id);
    j.at("function_id").get_to(w.function_id);
    const auto kind = j.value("kind", std::string("stream"));
    if (kind == "stream") {
        w.kind = job_kind::stream;
        w.rate_rps = j.at("rate_rps").get<double>();
        w.traffic_duration_s = j.at("traffic_duration_s").get<double>();
    } else if (kind == "batch") {
        w.kind = job_kind::batch;
        w.batch_size = j.at("bs").get<double>();
        w.deadline_s = j.at("d").get<double>();
    } else {
        throw config_error("unknown workload kind '" + kind + "'");
    }
    const auto arrivals = j.value("arrivals", std::string("poisson"));
    if (arrivals == "poisson")
        w.arrivals = arrival_pattern::poisson;
    else if (arrivals == "burst")
        w.arrivals = arrival_pattern::burst;
    else
        throw config_error("unknown arrival pattern '" + arrivals + "'");

    if (j.contains("slo_max_response_s"))
        w.slo_max_response_s = j.at("slo_max_response_s").get<double>();
    w.profiled = j.value("profiled", true);
    if (j.contains("target_load_rps"))
        w.target_load_rps = j.at("target_load_rps").get<double>();
    if (j.contains("pin")) {
        const auto& pin = j.at("pin");
        if (pin.contains("freq_mhz"))
            w.pinned_freq_mhz = pin.at("freq_mhz").get<int>();
        if (pin.contains("replicas"))
            w.pinned_replicas = pin.at("replicas").get<int>();
    }
    if (j.contains("submit_at_s"))
        w.submit_at_s = j.at("submit_at_s").get<double>();
    return w;
}

nlohmann::json workload_json(const workload_spec& w)
{
    nlohmann::json j{{"workload_id", w.workload_id},
                     {"function_id", w.function_id},
                     {"arrivals", w.arrivals == arrival_pattern::burst ? "burst" : "poisson"},
                     {"profiled", w.profiled}};
    if (w.kind == job_kind::stream) {
        j["kind"] = "stream";
        j["rate_rps"] = w.rate_rps;
        j["traffic_duration_s"] = w.traffic_duration_s;
    } else {
        j["kind"] = "batch";
        j["bs"] = w.batch_size;
        j["d"] = w.deadline_s;
    }
    if (w.slo_max_response_s)
        j["slo_max_response_s"] = *w.slo_max_response_s;
    if (w.target_load_rps)
        j["target_load_rps"] = *w.target_load_rps;
    if (w.pinned_freq_mhz || w.pinned_replicas) {
        auto pin = nlohmann::json::object();
        if (w.pinned_freq_mhz)
            pin["freq_mhz"] = *w.pinned_freq_mhz;
        if (w.pinned_replicas)
            pin["replicas"] = *w.pinned_replicas;
        j["pin"] = pin;
    }
    if (w.submit_at_s)
        j["submit_at_s"] = *w.submit_at_s;
    return j;
}

} // namespace

sim_config parse_sim_config(const nlohmann::json& doc, const std::filesystem::path& base_dir)
{
    sim_config c;
    try {
        if (doc.contains("freq_set_mhz")) {
            const auto& fs = doc.at("freq_set_mhz");
            if (fs.is_array())
                c.freq_set = fs.get<frequency_set>();
            else
                c.freq_set = make_frequency_set(fs.at("first").get<int>(), fs.at("last").get<int>(),
                                                fs.at("step").get<int>());
        }
        c.rho_max = doc.value("rho_max", c.rho_max);
        if (doc.contains("nodes")) {
            c.node_count = doc.at("nodes").value("count", c.node_count);
            c.cores_per_node = doc.at("nodes").value("cores", c.cores_per_node);
        }
        if (doc.contains("idle_power_w")) {
            const auto& idle = doc.at("idle_power_w");
            if (idle.contains("at_min_w"))
                c.idle_power_w = linear_idle_power(c.freq_set, idle.at("at_min_w").get<double>(),
                                                   idle.at("at_max_w").get<double>());
            else
                c.idle_power_w = parse_freq_map(idle);
        }
        if (doc.contains("max_node_power_w"))
            c.max_node_power_w = doc.at("max_node_power_w").get<double>();

        if (doc.contains("profiles")) {
            const auto& p = doc.at("profiles");
            if (p.is_string()) {
                std::filesystem::path path = p.get<std::string>();
                if (path.is_relative())
                    path = base_dir / path;
                c.profiles = load_profile_store(path);
            } else {
                c.profiles = p.get<std::vector<function_profile>>();
            }
        }
        if (doc.contains("workloads"))
            for (const auto& w : doc.at("workloads"))
                c.workloads.push_back(parse_workload(w));

        c.workload_interarrival_rate = doc.value("workload_interarrival_rate", c.workload_interarrival_rate);
        if (doc.contains("cold_start")) {
            const auto& cs = doc.at("cold_start");
            c.cold_start.base_s = cs.value("base_s", c.cold_start.base_s);
            c.cold_start.extra_at_min_freq_s = cs.value("extra_at_min_freq_s", c.cold_start.extra_at_min_freq_s);
            if (cs.contains("per_function"))
                for (const auto& [fn, table] : cs.at("per_function").items())
                    c.cold_start.per_function[fn] = parse_freq_map(table);
        }
        c.duration_s = doc.value("duration_s", c.duration_s);
        c.max_duration_s = doc.value("max_duration_s", std::max(c.max_duration_s, c.duration_s));
        c.seed = doc.value("seed", c.seed);
        const auto service = doc.value("service_distribution", std::string("exponential"));
        if (service == "exponential")
            c.service = service_distribution::exponential;
        else if (service == "deterministic")
            c.service = service_distribution::deterministic;
        else
            throw config_error("unknown service_distribution '" + service + "'");
        c.autoscaler_interval_s = doc.value("autoscaler_interval_s", c.autoscaler_interval_s);
        c.rotation_period_s = doc.value("rotation_period_s", c.rotation_period_s);
        c.profile_run_s = doc.value("profile_run_s", c.profile_run_s);
        c.sample_interval_s = doc.value("sample_interval_s", c.sample_interval_s);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("invalid config: ") + e.what());
    }
    if (c.idle_power_w.empty())
        c.idle_power_w = linear_idle_power(c.freq_set, 6.0, 10.0);
    return c;
}

sim_config load_sim_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open config " + path.string());
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error("cannot parse config " + path.string() + ": " + e.what());
    }
    return parse_sim_config(doc, path.parent_path());
}

nlohmann::json to_json(const sim_config& c)
{
    nlohmann::json j;
    j["freq_set_mhz"] = c.freq_set;
    j["rho_max"] = c.rho_max;
    j["nodes"] = {{"count", c.node_count}, {"cores", c.cores_per_node}};
    j["idle_power_w"] = freq_map_json(c.idle_power_w);
    if (c.max_node_power_w)
        j["max_node_power_w"] = *c.max_node_power_w;
    j["profiles"] = c.profiles;
    j["workloads"] = nlohmann::json::array();
    for (const auto& w : c.workloads)
        j["workloads"].push_back(workload_json(w));
    j["workload_interarrival_rate"] = c.workload_interarrival_rate;
    auto per_function = nlohmann::json::object();
    for (const auto& [fn, table] : c.cold_start.per_function)
        per_function[fn] = freq_map_json(table);
    j["cold_start"] = {{"base_s", c.cold_start.base_s},
                       {"extra_at_min_freq_s", c.cold_start.extra_at_min_freq_s},
                       {"per_function", per_function}};
    j["duration_s"] = c.duration_s;
    j["max_duration_s"] = c.max_duration_s;
    j["seed"] = c.seed;
    j["service_distribution"] = c.service == service_distribution::deterministic ? "deterministic"
                                                                                  : "exponential";
    j["autoscaler_interval_s"] = c.autoscaler_interval_s;
    j["rotation_period_s"] = c.rotation_period_s;
    j["profile_run_s"] = c.profile_run_s;
    j["sample_interval_s"] = c.sample_interval_s;
    return j;
}

} // namespace ees
