#include "ees/node_agent.hpp"

#include <charconv>
#include <cstdio>

#include "ees/error.hpp"

namespace ees {

std::string format_fixed2(double value)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    return buf;
}

std::string agent_reply::to_line() const
{
    switch (type) {
    case kind::confirm:
        return "CONFIRM";
    case kind::pong:
        return "PONG";
    case kind::status:
        return "STATUS " + std::to_string(snapshot.freq_mhz) + ' ' + format_fixed2(snapshot.power_w)
               + ' ' + format_fixed2(snapshot.temp_c);
    case kind::error:
        break;
    }
    return "ERR " + std::to_string(code) + ' ' + message;
}

namespace {

agent_reply error_reply(int code, std::string message)
{
    agent_reply r;
    r.type = agent_reply::kind::error;
    r.code = code;
    r.message = std::move(message);
    return r;
}

} // namespace

node_agent::node_agent(std::string node_id, int total_cores, frequency_set freq_set,
                       std::map<int, double> idle_power_w, double max_power_w)
    : node_id_(std::move(node_id)),
      total_cores_(total_cores),
      freq_set_(std::move(freq_set)),
      idle_power_w_(std::move(idle_power_w)),
      max_power_w_(max_power_w)
{
    if (total_cores_ <= 0 || freq_set_.empty() || !(max_power_w_ > 0.0))
        throw config_error("node agent needs cores, a frequency set and a positive max power");
    for (int f : freq_set_)
        if (!idle_power_w_.contains(f))
            throw config_error("no idle power for " + std::to_string(f) + " MHz");
    freq_mhz_ = freq_set_.front();
}

agent_reply node_agent::set_frequency(int freq_mhz)
{
    std::lock_guard lock(mutex_);
    if (!available_)
        return error_reply(err_unavailable, "agent-unavailable");
    if (!contains_frequency(freq_set_, freq_mhz))
        return error_reply(err_unknown_frequency, "unknown-frequency");
    freq_mhz_ = freq_mhz;
    return {};
}

std::set<int> node_agent::pin(const std::string& container_id, int core_count)
{
    std::lock_guard lock(mutex_);
    if (core_count < 1)
        throw error("pin: core_count must be at least 1");
    if (cores_.contains(container_id))
        throw error("pin: container '" + container_id + "' is already pinned");

    std::set<int> taken;
    for (const auto& [id, set] : cores_)
        taken.insert(set.begin(), set.end());

    std::set<int> chosen;
    for (int core = 0; core < total_cores_ && static_cast<int>(chosen.size()) < core_count; ++core)
        if (!taken.contains(core))
            chosen.insert(core);
    if (static_cast<int>(chosen.size()) < core_count)
        throw insufficient_cores_error(core_count, total_cores_ - static_cast<int>(taken.size()));
    cores_.emplace(container_id, chosen);
    return chosen;
}

void node_agent::unpin(const std::string& container_id)
{
    std::lock_guard lock(mutex_);
    cores_.erase(container_id);
}

core_map node_agent::rotate()
{
    std::lock_guard lock(mutex_);
    for (auto& [id, set] : cores_) {
        std::set<int> shifted;
        for (int core : set)
            shifted.insert((core + 1) % total_cores_);
        set = std::move(shifted);
    }
    return cores_;
}

double node_agent::power_locked() const
{
    return idle_power_w_.at(freq_mhz_) + busy_power_w_;
}

agent_status node_agent::status() const
{
    std::lock_guard lock(mutex_);
    const double power = power_locked();
    return {freq_mhz_, power, base_temp_c + temp_span_c * (power / max_power_w_)};
}

agent_reply node_agent::status_reply() const
{
    {
        std::lock_guard lock(mutex_);
        if (!available_)
            return error_reply(err_unavailable, "agent-unavailable");
    }
    agent_reply r;
    r.type = agent_reply::kind::status;
    r.snapshot = status();
    return r;
}

void node_agent::set_busy_power(double watts)
{
    std::lock_guard lock(mutex_);
    busy_power_w_ = watts;
}

void node_agent::set_available(bool available)
{
    std::lock_guard lock(mutex_);
    available_ = available;
}

int node_agent::freq_mhz() const
{
    std::lock_guard lock(mutex_);
    return freq_mhz_;
}

core_map node_agent::cores() const
{
    std::lock_guard lock(mutex_);
    return cores_;
}

int node_agent::free_core_count() const
{
    std::lock_guard lock(mutex_);
    int used = 0;
    for (const auto& [id, set] : cores_)
        used += static_cast<int>(set.size());
    return total_cores_ - used;
}

std::string node_agent::handle_line(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);

    if (line == "PING") {
        std::lock_guard lock(mutex_);
        if (!available_)
            return error_reply(err_unavailable, "agent-unavailable").to_line();
        agent_reply r;
        r.type = agent_reply::kind::pong;
        return r.to_line();
    }
    if (line == "STATUS")
        return status_reply().to_line();

    constexpr std::string_view setfreq = "SETFREQ ";
    if (line.starts_with(setfreq)) {
        const auto arg = line.substr(setfreq.size());
        int mhz = 0;
        const auto [end, ec] = std::from_chars(arg.data(), arg.data() + arg.size(), mhz);
        if (ec != std::errc{} || end != arg.data() + arg.size() || arg.empty())
            return error_reply(err_bad_request, "malformed-request").to_line();
        return set_frequency(mhz).to_line();
    }
    return error_reply(err_bad_request, "malformed-request").to_line();
}

} // namespace ees
