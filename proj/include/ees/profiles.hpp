#ifndef EES_PROFILES_HPP
#define EES_PROFILES_HPP

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace ees {

/// Discrete set of selectable CPU frequencies in MHz, sorted ascending.
using frequency_set = std::vector<int>;

/// 2000..3600 MHz in 200 MHz steps.
frequency_set default_frequency_set();

/// Builds {first, first+step, ..., last}.
frequency_set make_frequency_set(int first_mhz, int last_mhz, int step_mhz);

bool contains_frequency(std::span<const int> freq_set, int freq_mhz);

/// Performance and power of one replica of a function at a fixed frequency.
struct frequency_point
{
    int freq_mhz = 0;
    double avg_exec_time_s = 0.0;    ///< seconds per request with the replica fully dedicated
    double throughput_rps = 0.0;     ///< requests/second of a single replica
    double per_replica_power_w = 0.0;///< watts drawn by one busy replica
    double cpu_utilization = 0.0;    ///< fraction of the allocated cores kept busy, in (0, 1]

    friend bool operator==(const frequency_point&, const frequency_point&) = default;
};

struct function_profile
{
    std::string function_id;
    double cpu_cores = 1.0; ///< fractional cores requested per replica
    int memory_mb = 0;
    std::vector<frequency_point> curve; ///< strictly increasing in freq_mhz

    friend bool operator==(const function_profile&, const function_profile&) = default;
};

/// Monitoring data gathered from a profile run of a function with no history.
struct observed_sample
{
    std::string function_id;
    int freq_mhz = 0;
    double measured_throughput_rps = 0.0;
    double measured_cpu_utilization = 0.0;
};

/// Relative tolerance allowed between throughput_rps and 1/avg_exec_time_s.
inline constexpr double throughput_consistency_tolerance = 0.01;

/**
 * Checks every profile invariant and returns one message per violation.
 *
 * An empty result means the profile is well formed. Messages start with a
 * stable tag ("non-monotonic exec time", "frequency not in P", ...) followed
 * by the offending detail.
 */
std::vector<std::string> validate_profile(const function_profile& profile,
                                          std::span<const int> freq_set);

/// Exact point at freq_mhz; throws unknown_frequency_error when absent.
const frequency_point& lookup(const function_profile& profile, int freq_mhz);

/// Like lookup but returns nullptr instead of throwing.
const frequency_point* find_point(const function_profile& profile, int freq_mhz) noexcept;

/**
 * Stored profile whose CPU utilization at the sampled frequency is nearest
 * (absolute difference) to the measured one. Ties go to the smallest
 * function_id. Throws empty_store_error on an empty store.
 */
const function_profile& match_closest(std::span<const function_profile> store,
                                      const observed_sample& sample);

/**
 * Synthesizes a profile for an unseen function from a similar known one.
 *
 * Throughput at every frequency is the known throughput scaled by
 * r = measured / known(sample frequency); at the sampled frequency it equals
 * the measurement exactly. Power and utilization are copied from `known`.
 */
function_profile predict_profile(const function_profile& known, const observed_sample& sample);

// JSON interchange. Field names match the struct members.
void to_json(nlohmann::json& j, const frequency_point& p);
void from_json(const nlohmann::json& j, frequency_point& p);
void to_json(nlohmann::json& j, const function_profile& p);
void from_json(const nlohmann::json& j, function_profile& p);
void to_json(nlohmann::json& j, const observed_sample& s);
void from_json(const nlohmann::json& j, observed_sample& s);

/// Reads a JSON array of profiles. Throws config_error on I/O or parse failure.
std::vector<function_profile> load_profile_store(const std::filesystem::path& path);
void save_profile_store(const std::filesystem::path& path,
                        std::span<const function_profile> store);

/// Profile with the given id, or nullptr.
const function_profile* find_profile(std::span<const function_profile> store,
                                     const std::string& function_id) noexcept;

} // namespace ees

#endif // EES_PROFILES_HPP
