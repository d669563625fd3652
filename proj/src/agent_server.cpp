#include "ees/agent_server.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "ees/error.hpp"

namespace ees {

namespace {

[[noreturn]] void throw_errno(const std::string& what)
{
    throw error(what + ": " + std::strerror(errno));
}

void set_nodelay(int fd)
{
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

bool send_all(int fd, std::string_view data)
{
    while (!data.empty()) {
        const auto n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR)
                continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

/// Reads until a full line is buffered. Returns false on EOF or error.
bool read_line(int fd, std::string& buffer, std::string& line)
{
    for (;;) {
        const auto pos = buffer.find('\n');
        if (pos != std::string::npos) {
            line.assign(buffer, 0, pos);
            buffer.erase(0, pos + 1);
            return true;
        }
        char chunk[4096];
        const auto n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR)
            continue;
        if (n <= 0)
            return false;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

} // namespace

agent_server::agent_server(node_agent& agent, std::string host, std::uint16_t port)
    : agent_(agent)
{
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0)
        throw_errno("socket");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);

    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw error("invalid listen address '" + host + "'");
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) < 0
        || ::listen(listen_fd_, 64) < 0) {
        const int saved = errno;
        ::close(listen_fd_);
        errno = saved;
        throw_errno("bind/listen on " + host + ":" + std::to_string(port));
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);

    acceptor_ = std::thread([this] { accept_loop(); });
}

agent_server::~agent_server()
{
    stop();
}

void agent_server::accept_loop()
{
    while (!stopping_) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR)
                continue;
            break;
        }
        set_nodelay(fd);
        std::lock_guard lock(connections_mutex_);
        if (stopping_) {
            ::close(fd);
            break;
        }
        open_fds_.push_back(fd);
        workers_.emplace_back([this, fd] { serve(fd); });
    }
}

void agent_server::serve(int fd)
{
    std::string buffer;
    std::string line;
    while (read_line(fd, buffer, line)) {
        std::string reply = agent_.handle_line(line);
        reply.push_back('\n');
        if (!send_all(fd, reply))
            break;
    }
    std::lock_guard lock(connections_mutex_);
    open_fds_.remove(fd);
    ::close(fd);
}

void agent_server::wait()
{
    if (acceptor_.joinable())
        acceptor_.join();
}

void agent_server::stop()
{
    if (stopping_.exchange(true))
        return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    if (acceptor_.joinable() && acceptor_.get_id() != std::this_thread::get_id())
        acceptor_.join();
    ::close(listen_fd_);

    std::list<std::thread> workers;
    {
        std::lock_guard lock(connections_mutex_);
        for (int fd : open_fds_)
            ::shutdown(fd, SHUT_RDWR);
        workers.swap(workers_);
    }
    for (auto& t : workers)
        t.join();
}

agent_client::agent_client(const std::string& host, std::uint16_t port)
{
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* found = nullptr;
    const auto service = std::to_string(port);
    if (::getaddrinfo(host.c_str(), service.c_str(), &hints, &found) != 0 || found == nullptr)
        throw error("cannot resolve " + host);

    fd_ = ::socket(found->ai_family, found->ai_socktype, found->ai_protocol);
    if (fd_ < 0) {
        ::freeaddrinfo(found);
        throw_errno("socket");
    }
    const int rc = ::connect(fd_, found->ai_addr, found->ai_addrlen);
    ::freeaddrinfo(found);
    if (rc < 0) {
        const int saved = errno;
        ::close(fd_);
        errno = saved;
        throw_errno("connect to " + host + ":" + service);
    }
    set_nodelay(fd_);
}

agent_client::~agent_client()
{
    if (fd_ >= 0)
        ::close(fd_);
}

std::string agent_client::request(std::string_view line)
{
    std::string out(line);
    out.push_back('\n');
    if (!send_all(fd_, out))
        throw_errno("send");
    std::string reply;
    if (!read_line(fd_, buffer_, reply))
        throw error("connection closed by agent");
    return reply;
}

bool agent_client::set_frequency(int freq_mhz)
{
    return request("SETFREQ " + std::to_string(freq_mhz)) == "CONFIRM";
}

} // namespace ees
