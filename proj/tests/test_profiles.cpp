#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "ees/error.hpp"
#include "ees/profiles.hpp"
#include "oracles.hpp"

using namespace ees;

namespace {

function_profile make_profile(std::string id, std::vector<std::pair<int, double>> exec, double util = 0.5)
{
    function_profile p;
    p.function_id = std::move(id);
    p.cpu_cores = 1.0;
    p.memory_mb = 128;
    double watts = 5.0;
    for (auto [f, t] : exec) {
        p.curve.push_back({f, t, 1.0 / t, watts, util});
        watts += 1.0;
    }
    return p;
}

function_profile full_profile(std::string id, double util = 0.5)
{
    std::vector<std::pair<int, double>> exec;
    double t = 0.5;
    for (int f : default_frequency_set()) {
        exec.emplace_back(f, t);
        t *= 0.9;
    }
    return make_profile(std::move(id), exec, util);
}

bool has_error(const std::vector<std::string>& errors, std::string_view tag)
{
    for (const auto& e : errors)
        if (e.find(tag) != std::string::npos)
            return true;
    return false;
}

} // namespace

TEST_CASE("default frequency set spans 2.0 to 3.6 GHz in 200 MHz steps")
{
    const auto p = default_frequency_set();
    REQUIRE(p.size() == 9);
    CHECK(p.front() == 2000);
    CHECK(p.back() == 3600);
    CHECK(make_frequency_set(2200, 4200, 200).size() == 11);
    CHECK(contains_frequency(p, 2800));
    CHECK_FALSE(contains_frequency(p, 2500));
}

TEST_CASE("validate_profile")
{
    const auto P = default_frequency_set();

    SUBCASE("well formed profile passes")
    {
        CHECK(validate_profile(full_profile("ok"), P).empty());
    }
    SUBCASE("slower at a higher clock is rejected")
    {
        const auto p = make_profile("slow", {{2000, 0.2}, {3600, 0.3}});
        CHECK(has_error(validate_profile(p, P), "non-monotonic exec time"));
    }
    SUBCASE("frequency outside P is rejected")
    {
        const auto p = make_profile("odd", {{2400, 0.3}, {2500, 0.2}});
        CHECK(has_error(validate_profile(p, P), "frequency not in P"));
    }
    SUBCASE("throughput must agree with exec time within 1%")
    {
        auto p = full_profile("tp");
        p.curve[3].throughput_rps *= 1.005;
        CHECK(validate_profile(p, P).empty());
        p.curve[3].throughput_rps *= 1.02;
        CHECK(has_error(validate_profile(p, P), "inconsistent throughput"));
    }
    SUBCASE("duplicate frequencies and bad utilization")
    {
        auto p = make_profile("dup", {{2000, 0.3}, {2000, 0.2}});
        p.curve[0].cpu_utilization = 1.5;
        const auto errors = validate_profile(p, P);
        CHECK(has_error(errors, "strictly increasing"));
        CHECK(has_error(errors, "cpu_utilization"));
    }
}

TEST_CASE("lookup is exact")
{
    const auto p = full_profile("x");
    CHECK(lookup(p, 2800).freq_mhz == 2800);
    CHECK_THROWS_AS(lookup(p, 2500), unknown_frequency_error);
    const auto single = make_profile("one", {{3600, 0.1}});
    CHECK(lookup(single, 3600).avg_exec_time_s == 0.1);
    CHECK(find_point(single, 2000) == nullptr);
}

TEST_CASE("match_closest picks the nearest utilization")
{
    observed_sample s{"new", 3000, 10.0, 0.92};
    std::vector<function_profile> store{full_profile("hi", 0.95), full_profile("mid", 0.60),
                                        full_profile("lo", 0.30)};
    CHECK(match_closest(store, s).function_id == "hi");

    std::vector<function_profile> tie{full_profile("b", 0.70), full_profile("a", 0.50)};
    s.measured_cpu_utilization = 0.60;
    CHECK(match_closest(tie, s).function_id == "a");

    CHECK_THROWS_AS(match_closest(std::vector<function_profile>{}, s), empty_store_error);
}

TEST_CASE("match_closest agrees with a linear scan")
{
    std::mt19937_64 rng(7);
    const auto P = default_frequency_set();
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<function_profile> store;
        const int n = 1 + trial % 6;
        for (int i = 0; i < n; ++i)
            store.push_back(oracle::random_profile(rng, P, "f" + std::to_string(i)));
        observed_sample s{"new", P[trial % P.size()], 1.0,
                          std::uniform_real_distribution<double>(0.01, 1.0)(rng)};
        double best = 1e9;
        for (const auto& p : store)
            best = std::min(best, std::abs(lookup(p, s.freq_mhz).cpu_utilization - s.measured_cpu_utilization));
        const auto& got = match_closest(store, s);
        CHECK(std::abs(lookup(got, s.freq_mhz).cpu_utilization - s.measured_cpu_utilization) == best);
    }
}

TEST_CASE("predict_profile scales throughput by r")
{
    auto known = make_profile("sha", {{2000, 0.02}, {3000, 0.01}, {3600, 0.008}}, 0.9);

    SUBCASE("half the measured throughput halves every point")
    {
        const observed_sample s{"sha-half", 3000, 50.0, 0.9};
        const auto p = predict_profile(known, s);
        CHECK(p.function_id == "sha-half");
        CHECK(lookup(p, 3000).throughput_rps == 50.0);
        CHECK(lookup(p, 2000).throughput_rps == doctest::Approx(25.0).epsilon(1e-12));
        CHECK(lookup(p, 3600).throughput_rps == doctest::Approx(62.5).epsilon(1e-12));
        CHECK(lookup(p, 2000).per_replica_power_w == lookup(known, 2000).per_replica_power_w);
        CHECK(lookup(p, 2000).cpu_utilization == 0.9);
        CHECK(validate_profile(p, default_frequency_set()).empty());
    }
    SUBCASE("r = 1 reproduces the known curve")
    {
        const observed_sample s{"same", 3000, 100.0, 0.9};
        const auto p = predict_profile(known, s);
        for (std::size_t i = 0; i < p.curve.size(); ++i)
            CHECK(p.curve[i].throughput_rps == doctest::Approx(known.curve[i].throughput_rps).epsilon(1e-12));
    }
    SUBCASE("missing sample frequency")
    {
        CHECK_THROWS_AS(predict_profile(known, {"x", 2400, 1.0, 0.5}), unknown_frequency_error);
    }
}

TEST_CASE("predict_profile matches a pointwise multiplication oracle")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> tp(0.1, 500.0);
    for (int trial = 0; trial < 500; ++trial) {
        const auto freqs = oracle::random_freqs(rng);
        const auto known = oracle::random_profile(rng, freqs, "known");
        const observed_sample s{"unknown", freqs[static_cast<std::size_t>(trial) % freqs.size()], tp(rng), 0.5};
        const auto predicted = predict_profile(known, s);
        const auto expected = oracle::predicted_throughput(known, s);

        CHECK(lookup(predicted, s.freq_mhz).throughput_rps == s.measured_throughput_rps);
        for (const auto& pt : predicted.curve)
            CHECK(pt.throughput_rps == doctest::Approx(expected.at(pt.freq_mhz)).epsilon(1e-9));
        CHECK(validate_profile(predicted, default_frequency_set()).empty());

        const observed_sample doubled{s.function_id, s.freq_mhz, 2.0 * s.measured_throughput_rps, 0.5};
        const auto twice = predict_profile(known, doubled);
        for (std::size_t i = 0; i < twice.curve.size(); ++i)
            CHECK(twice.curve[i].throughput_rps
                  == doctest::Approx(2.0 * predicted.curve[i].throughput_rps).epsilon(1e-12));
    }
}

TEST_CASE("profile store round-trips through JSON")
{
    const std::vector<function_profile> store{full_profile("a", 0.4), full_profile("b", 0.8)};
    const auto path = std::filesystem::temp_directory_path() / "ees_profiles_roundtrip.json";
    save_profile_store(path, store);
    CHECK(load_profile_store(path) == store);
    std::filesystem::remove(path);

    CHECK_THROWS_AS(load_profile_store("/nonexistent/profiles.json"), config_error);
    CHECK(find_profile(store, "b") == &store[1]);
    CHECK(find_profile(store, "zzz") == nullptr);
}
