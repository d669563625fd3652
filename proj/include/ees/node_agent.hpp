#ifndef EES_NODE_AGENT_HPP
#define EES_NODE_AGENT_HPP

#include <map>
#include <mutex>
#include <set>
#include <string>
#include <string_view>

#include "ees/profiles.hpp"

namespace ees {

/// container id -> pinned core indices
using core_map = std::map<std::string, std::set<int>>;

struct agent_status
{
    int freq_mhz = 0;
    double power_w = 0.0;
    double temp_c = 0.0;
};

/// Reply codes of the control protocol.
inline constexpr int err_unknown_frequency = 400;
inline constexpr int err_bad_request = 400;
inline constexpr int err_unavailable = 503;

struct agent_reply
{
    enum class kind { confirm, status, pong, error };

    kind type = kind::confirm;
    int code = 0;
    std::string message;
    agent_status snapshot;

    bool ok() const noexcept { return type != kind::error; }

    /// Wire form without the trailing newline, e.g. "STATUS 2800 23.00 38.41".
    std::string to_line() const;
};

/// Base Celsius plus a span scaled by power / max power.
inline constexpr double base_temp_c = 35.0;
inline constexpr double temp_span_c = 10.0;

/**
 * Per-node processor management: frequency control, power/temperature
 * telemetry, exclusive core pinning and round-robin core rotation.
 *
 * All methods are serialized by an internal mutex, so one agent may be
 * driven from several connections at once.
 */
class node_agent
{
public:
    /// `idle_power_w` maps each frequency in `freq_set` to the node's idle draw.
    node_agent(std::string node_id, int total_cores, frequency_set freq_set,
               std::map<int, double> idle_power_w, double max_power_w);

    node_agent(const node_agent&) = delete;
    node_agent& operator=(const node_agent&) = delete;

    const std::string& node_id() const noexcept { return node_id_; }
    int total_cores() const noexcept { return total_cores_; }

    /// CONFIRM, or ERR 400 for a frequency outside P, ERR 503 when unavailable.
    agent_reply set_frequency(int freq_mhz);

    /// Assigns the lowest-numbered free cores. Throws insufficient_cores_error.
    std::set<int> pin(const std::string& container_id, int core_count);
    void unpin(const std::string& container_id);

    /// Shifts every pinned core by one, modulo the core count.
    core_map rotate();

    agent_status status() const;
    agent_reply status_reply() const;

    /// Power drawn on top of idle by running containers.
    void set_busy_power(double watts);

    /// Fault injection: an unavailable agent answers every request with ERR 503.
    void set_available(bool available);

    int freq_mhz() const;
    core_map cores() const;
    int free_core_count() const;

    /// Parses one request line and returns the reply line (no trailing newline).
    std::string handle_line(std::string_view line);

private:
    double power_locked() const;

    std::string node_id_;
    int total_cores_;
    frequency_set freq_set_;
    std::map<int, double> idle_power_w_;
    double max_power_w_;

    mutable std::mutex mutex_;
    int freq_mhz_;
    core_map cores_;
    double busy_power_w_ = 0.0;
    bool available_ = true;
};

/// Two fraction digits, as used on the wire.
std::string format_fixed2(double value);

} // namespace ees

#endif // EES_NODE_AGENT_HPP
