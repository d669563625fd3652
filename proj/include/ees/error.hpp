#ifndef EES_ERROR_HPP
#define EES_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ees {

/// Base class for every error raised by the library.
class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// A frequency is not part of a profile curve or of the configured set.
class unknown_frequency_error : public error
{
public:
    explicit unknown_frequency_error(int freq_mhz)
        : error("unknown frequency " + std::to_string(freq_mhz) + " MHz"), freq_mhz_(freq_mhz)
    {
    }

    int freq_mhz() const noexcept { return freq_mhz_; }

private:
    int freq_mhz_;
};

class empty_store_error : public error
{
public:
    empty_store_error() : error("profile store is empty") {}
};

class unknown_job_error : public error
{
public:
    explicit unknown_job_error(const std::string& job_id)
        : error("unknown job '" + job_id + "'")
    {
    }
};

class insufficient_cores_error : public error
{
public:
    insufficient_cores_error(int requested, int available)
        : error("insufficient cores: requested " + std::to_string(requested) + ", free "
                + std::to_string(available))
    {
    }
};

/// Malformed or semantically invalid input document (profile store, config, job).
class config_error : public error
{
public:
    using error::error;
};

/// A workload references a function with no known profile.
class unknown_profile_error : public config_error
{
public:
    explicit unknown_profile_error(const std::string& function_id)
        : config_error("unknown profile '" + function_id + "'"), function_id_(function_id)
    {
    }

    const std::string& function_id() const noexcept { return function_id_; }

private:
    std::string function_id_;
};

} // namespace ees

#endif // EES_ERROR_HPP
