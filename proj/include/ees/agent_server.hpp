#ifndef EES_AGENT_SERVER_HPP
#define EES_AGENT_SERVER_HPP

#include <atomic>
#include <cstdint>
#include <list>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "ees/node_agent.hpp"

namespace ees {

/**
 * Serves one node_agent over TCP with the newline-delimited control protocol.
 *
 * Each accepted connection gets its own thread; requests on a connection are
 * answered in order. The destructor stops the listener and joins every
 * connection thread.
 */
class agent_server
{
public:
    /// Binds to `host`:`port`; port 0 picks an ephemeral port.
    agent_server(node_agent& agent, std::string host = "127.0.0.1", std::uint16_t port = 0);
    ~agent_server();

    agent_server(const agent_server&) = delete;
    agent_server& operator=(const agent_server&) = delete;

    std::uint16_t port() const noexcept { return port_; }

    /// Blocks the caller until stop() is invoked from another thread.
    void wait();
    void stop();

private:
    void accept_loop();
    void serve(int fd);

    node_agent& agent_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> stopping_{false};
    std::thread acceptor_;

    std::mutex connections_mutex_;
    std::list<int> open_fds_;
    std::list<std::thread> workers_;
};

/// Blocking client for the control protocol. One request in flight at a time.
class agent_client
{
public:
    agent_client(const std::string& host, std::uint16_t port);
    ~agent_client();

    agent_client(const agent_client&) = delete;
    agent_client& operator=(const agent_client&) = delete;

    /// Sends `line` plus '\n' and returns the reply line without its newline.
    std::string request(std::string_view line);

    /// True on CONFIRM.
    bool set_frequency(int freq_mhz);

private:
    int fd_ = -1;
    std::string buffer_;
};

} // namespace ees

#endif // EES_AGENT_SERVER_HPP
