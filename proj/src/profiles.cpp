#include "ees/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "ees/error.hpp"

namespace ees {

frequency_set make_frequency_set(int first_mhz, int last_mhz, int step_mhz)
{
    if (step_mhz <= 0 || first_mhz <= 0 || last_mhz < first_mhz)
        throw config_error("invalid frequency range");
    frequency_set out;
    for (int f = first_mhz; f <= last_mhz; f += step_mhz)
        out.push_back(f);
    return out;
}

frequency_set default_frequency_set()
{
    return make_frequency_set(2000, 3600, 200);
}

bool contains_frequency(std::span<const int> freq_set, int freq_mhz)
{
    return std::find(freq_set.begin(), freq_set.end(), freq_mhz) != freq_set.end();
}

namespace {

std::string describe(const frequency_point& p)
{
    return "at " + std::to_string(p.freq_mhz) + " MHz";
}

} // namespace

std::vector<std::string> validate_profile(const function_profile& profile,
                                          std::span<const int> freq_set)
{
    std::vector<std::string> errors;
    if (profile.function_id.empty())
        errors.emplace_back("empty function_id");
    if (!(profile.cpu_cores > 0.0))
        errors.emplace_back("cpu_cores must be positive");
    if (profile.memory_mb < 0)
        errors.emplace_back("memory_mb must not be negative");
    if (profile.curve.empty())
        errors.emplace_back("empty curve");

    for (std::size_t i = 0; i < profile.curve.size(); ++i) {
        const auto& p = profile.curve[i];
        if (p.freq_mhz <= 0)
            errors.push_back("non-positive frequency " + describe(p));
        else if (!contains_frequency(freq_set, p.freq_mhz))
            errors.push_back("frequency not in P: " + std::to_string(p.freq_mhz) + " MHz");
        if (!(p.avg_exec_time_s > 0.0))
            errors.push_back("non-positive avg_exec_time_s " + describe(p));
        if (!(p.throughput_rps > 0.0))
            errors.push_back("non-positive throughput_rps " + describe(p));
        if (!(p.per_replica_power_w > 0.0))
            errors.push_back("non-positive per_replica_power_w " + describe(p));
        if (!(p.cpu_utilization > 0.0 && p.cpu_utilization <= 1.0))
            errors.push_back("cpu_utilization outside (0, 1] " + describe(p));
        if (p.avg_exec_time_s > 0.0 && p.throughput_rps > 0.0
            && std::abs(p.throughput_rps * p.avg_exec_time_s - 1.0) > throughput_consistency_tolerance)
            errors.push_back("inconsistent throughput/exec time " + describe(p));

        if (i == 0)
            continue;
        const auto& prev = profile.curve[i - 1];
        if (p.freq_mhz <= prev.freq_mhz)
            errors.push_back("frequencies not strictly increasing " + describe(p));
        else if (p.avg_exec_time_s > prev.avg_exec_time_s)
            errors.push_back("non-monotonic exec time " + describe(p));
    }
    return errors;
}

const frequency_point* find_point(const function_profile& profile, int freq_mhz) noexcept
{
    auto it = std::find_if(profile.curve.begin(), profile.curve.end(),
                           [&](const frequency_point& p) { return p.freq_mhz == freq_mhz; });
    return it == profile.curve.end() ? nullptr : &*it;
}

const frequency_point& lookup(const function_profile& profile, int freq_mhz)
{
    if (const auto* p = find_point(profile, freq_mhz))
        return *p;
    throw unknown_frequency_error(freq_mhz);
}

const function_profile& match_closest(std::span<const function_profile> store,
                                      const observed_sample& sample)
{
    if (store.empty())
        throw empty_store_error();

    const function_profile* best = nullptr;
    double best_distance = 0.0;
    for (const auto& candidate : store) {
        const double distance = std::abs(lookup(candidate, sample.freq_mhz).cpu_utilization
                                         - sample.measured_cpu_utilization);
        if (best == nullptr || distance < best_distance
            || (distance == best_distance && candidate.function_id < best->function_id)) {
            best = &candidate;
            best_distance = distance;
        }
    }
    return *best;
}

function_profile predict_profile(const function_profile& known, const observed_sample& sample)
{
    const double ratio = sample.measured_throughput_rps
                         / lookup(known, sample.freq_mhz).throughput_rps;

    function_profile predicted = known;
    predicted.function_id = sample.function_id;
    for (auto& p : predicted.curve) {
        if (p.freq_mhz == sample.freq_mhz) {
            p.throughput_rps = sample.measured_throughput_rps;
        } else {
            p.throughput_rps *= ratio;
        }
        p.avg_exec_time_s /= ratio;
    }
    return predicted;
}

void to_json(nlohmann::json& j, const frequency_point& p)
{
    j = nlohmann::json{{"freq_mhz", p.freq_mhz},
                       {"avg_exec_time_s", p.avg_exec_time_s},
                       {"throughput_rps", p.throughput_rps},
                       {"per_replica_power_w", p.per_replica_power_w},
                       {"cpu_utilization", p.cpu_utilization}};
}

void from_json(const nlohmann::json& j, frequency_point& p)
{
    j.at("freq_mhz").get_to(p.freq_mhz);
    j.at("avg_exec_time_s").get_to(p.avg_exec_time_s);
    j.at("throughput_rps").get_to(p.throughput_rps);
    j.at("per_replica_power_w").get_to(p.per_replica_power_w);
    j.at("cpu_utilization").get_to(p.cpu_utilization);
}

void to_json(nlohmann::json& j, const function_profile& p)
{
    j = nlohmann::json{{"function_id", p.function_id},
                       {"cpu_cores", p.cpu_cores},
                       {"memory_mb", p.memory_mb},
                       {"curve", p.curve}};
}

void from_json(const nlohmann::json& j, function_profile& p)
{
    j.at("function_id").get_to(p.function_id);
    j.at("cpu_cores").get_to(p.cpu_cores);
    p.memory_mb = j.value("memory_mb", 0);
    j.at("curve").get_to(p.curve);
}

void to_json(nlohmann::json& j, const observed_sample& s)
{
    j = nlohmann::json{{"function_id", s.function_id},
                       {"freq_mhz", s.freq_mhz},
                       {"measured_throughput_rps", s.measured_throughput_rps},
                       {"measured_cpu_utilization", s.measured_cpu_utilization}};
}

void from_json(const nlohmann::json& j, observed_sample& s)
{
    j.at("function_id").get_to(s.function_id);
    j.at("freq_mhz").get_to(s.freq_mhz);
    j.at("measured_throughput_rps").get_to(s.measured_throughput_rps);
    j.at("measured_cpu_utilization").get_to(s.measured_cpu_utilization);
}

std::vector<function_profile> load_profile_store(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error("cannot open profile store " + path.string());
    try {
        const auto doc = nlohmann::json::parse(in);
        if (!doc.is_array())
            throw config_error("profile store " + path.string() + " is not a JSON array");
        return doc.get<std::vector<function_profile>>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error("cannot parse profile store " + path.string() + ": " + e.what());
    }
}

void save_profile_store(const std::filesystem::path& path,
                        std::span<const function_profile> store)
{
    std::ofstream out(path);
    if (!out)
        throw config_error("cannot write profile store " + path.string());
    out << nlohmann::json(std::vector<function_profile>(store.begin(), store.end())).dump(2) << '\n';
}

const function_profile* find_profile(std::span<const function_profile> store,
                                     const std::string& function_id) noexcept
{
    for (const auto& p : store)
        if (p.function_id == function_id)
            return &p;
    return nullptr;
}

} // namespace ees
