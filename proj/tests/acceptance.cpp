// Prints one PASS/FAIL line per acceptance criterion; exits non-zero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ees/agent_server.hpp"
#include "ees/cli.hpp"
#include "ees/simulator.hpp"
#include "oracles.hpp"
#include "scheduler_fuzz.hpp"

using namespace ees;

namespace {

const std::filesystem::path scenarios = EES_SCENARIO_DIR;

struct verdict
{
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

std::string fmt(const char* format, auto... args)
{
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

verdict queuing_oracles()
{
    verdict v;
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> lambda(0.001, 1000.0);
    std::uniform_real_distribution<double> exec(0.0005, 5.0);
    for (int i = 0; i < 1000; ++i) {
        const double l = lambda(rng), e = exec(rng);
        v.require(min_replicas(l, e, 0.8) == oracle::min_replicas(l, e, 0.8),
                  fmt("min_replicas differs at lambda=%g exec=%g", l, e));
    }
    for (int i = 0; i < 1000; ++i) {
        const auto freqs = oracle::random_freqs(rng);
        const auto p = oracle::random_profile(rng, freqs, "f", i % 2 == 0);
        const double l = lambda(rng) / 5.0;
        const auto got = select_config(p, l, 0.8);
        const auto want = oracle::select_config(p, l, 0.8);
        v.require(got.freq_mhz == want.freq_mhz && got.replicas == want.replicas,
                  fmt("select_config differs on case %d", i));
    }
    const double t = seconds_since(start);
    v.require(t < 5.0, fmt("took %.2f s", t));
    if (v.pass)
        v.detail = fmt("2000 oracle cases in %.2f s", t);
    return v;
}

verdict spot_values()
{
    verdict v;
    v.require(service_rate(4, 0.5) == 8.0, "service_rate(4, 0.5) != 8");
    v.require(utilization(4, 8) == 0.5, "utilization(4, 8) != 0.5");
    if (v.pass)
        v.detail = "service_rate(4,0.5)=8 utilization(4,8)=0.5";
    return v;
}

verdict prediction_fidelity()
{
    verdict v;
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> tp(0.05, 800.0);
    int points = 0;
    for (int i = 0; i < 1000; ++i) {
        const auto freqs = oracle::random_freqs(rng);
        const auto known = oracle::random_profile(rng, freqs, "known");
        const observed_sample s{"new", freqs[static_cast<std::size_t>(i) % freqs.size()], tp(rng), 0.5};
        const auto predicted = predict_profile(known, s);
        const auto expected = oracle::predicted_throughput(known, s);
        v.require(lookup(predicted, s.freq_mhz).throughput_rps == s.measured_throughput_rps,
                  fmt("sample point not reproduced on case %d", i));
        for (const auto& pt : predicted.curve) {
            const double want = expected.at(pt.freq_mhz);
            v.require(std::abs(pt.throughput_rps - want) <= 1e-9 * std::abs(want),
                      fmt("case %d at %d MHz: %.17g vs %.17g", i, pt.freq_mhz, pt.throughput_rps, want));
            ++points;
        }
    }
    if (v.pass)
        v.detail = fmt("%d points within 1e-9 relative", points);
    return v;
}

verdict occupancy()
{
    verdict v;
    std::string summary;
    for (double rho : {0.3, 0.5, 0.7}) {
        const auto start = std::chrono::steady_clock::now();
        sim_config c;
        c.node_count = 1;
        c.cores_per_node = 4;
        c.idle_power_w = linear_idle_power(c.freq_set, 5.0, 8.0);
        function_profile p;
        p.function_id = "mmc";
        for (int f : c.freq_set)
            p.curve.push_back({f, 0.1, 10.0, 10.0, 0.9});
        c.profiles = {p};
        const int servers = 2;
        workload_spec w;
        w.workload_id = "load";
        w.function_id = "mmc";
        w.rate_rps = rho * servers / 0.1;
        w.traffic_duration_s = std::ceil(120000.0 / w.rate_rps);
        w.pinned_freq_mhz = c.freq_set.front();
        w.pinned_replicas = servers;
        w.submit_at_s = 0.0;
        c.workloads = {w};
        c.cold_start.base_s = 0.0;
        c.cold_start.extra_at_min_freq_s = 0.0;
        c.duration_s = 0.0;
        c.max_duration_s = w.traffic_duration_s * 2;
        c.seed = 303;

        const auto r = run(c, strategy::ees);
        const auto& wr = r.workloads.at(0);
        const double t = seconds_since(start);
        v.require(wr.completed >= 100000, fmt("rho=%.1f: only %llu requests", rho,
                                               static_cast<unsigned long long>(wr.completed)));
        v.require(std::abs(wr.mean_busy_fraction - rho) <= 0.05 * rho,
                  fmt("rho=%.1f: busy fraction %.4f", rho, wr.mean_busy_fraction));
        v.require(t < 30.0, fmt("rho=%.1f took %.1f s", rho, t));
        summary += fmt("rho=%.1f busy=%.4f n=%llu; ", rho, wr.mean_busy_fraction,
                       static_cast<unsigned long long>(wr.completed));
    }
    if (v.pass)
        v.detail = summary.substr(0, summary.size() - 2);
    return v;
}

verdict scheduler_invariants()
{
    verdict v;
    const auto start = std::chrono::steady_clock::now();
    const auto out = fuzz::run(10000, 404);
    const double t = seconds_since(start);
    v.require(out.failures.empty(), out.failures.empty() ? "" : out.failures.front());
    v.require(out.unscheduled > 0, "no sequence exercised an unschedulable job");
    v.require(t < 60.0, fmt("took %.1f s", t));
    if (v.pass)
        v.detail = fmt("%d sequences, %d operations, %d unscheduled, %.2f s", out.sequences, out.operations,
                       out.unscheduled, t);
    return v;
}

verdict motivation()
{
    verdict v;
    auto fast = load_sim_config(scenarios / "motivation.json");
    auto slow = fast;
    slow.workloads.at(0).pinned_freq_mhz = 3600;
    const auto a = run(fast, strategy::ees);
    const auto b = run(slow, strategy::ees);
    const double ta = a.workloads.at(0).duration_s.value_or(0.0);
    const double tb = b.workloads.at(0).duration_s.value_or(0.0);
    const double time_up = 100.0 * (tb - ta) / ta;
    const double energy_down = 100.0 * (a.total_energy_j - b.total_energy_j) / a.total_energy_j;
    v.require(std::abs(time_up - 10.0) <= 2.0, fmt("exec time +%.2f%%", time_up));
    v.require(std::abs(energy_down - 22.5) <= 3.0, fmt("energy -%.2f%%", energy_down));
    if (v.pass)
        v.detail = fmt("4.0->3.6 GHz: exec time +%.2f%%, energy -%.2f%%", time_up, energy_down);
    return v;
}

struct scenario_run
{
    comparison cmp;
    double seconds = 0.0;
};

const scenario_run& table4_run()
{
    static const scenario_run result = [] {
        const auto start = std::chrono::steady_clock::now();
        const auto config = load_sim_config(scenarios / "table4.json");
        const std::vector<strategy> all{strategy::ees, strategy::bp, strategy::bps, strategy::bp_cpu};
        scenario_run r{compare(config, all), 0.0};
        r.seconds = seconds_since(start);
        return r;
    }();
    return result;
}

verdict end_to_end()
{
    verdict v;
    const auto& run = table4_run();
    const auto& rows = run.cmp.rows;
    const auto& ees = rows.at(0);
    std::string summary = fmt("EES %.0f J", ees.total_energy_j);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto name = std::string(to_string(rows[i].policy));
        v.require(ees.total_energy_j < rows[i].total_energy_j, "EES does not beat " + name);
        v.require(ees.slo_violations <= rows[i].slo_violations, "EES misses more SLOs than " + name);
        summary += fmt(", %s %.0f J", name.c_str(), rows[i].total_energy_j);
    }
    const double savings = ees.savings_vs_bp_pct.value_or(0.0);
    v.require(savings >= 10.0, fmt("savings vs BP %.2f%%", savings));
    v.require(run.seconds < 120.0, fmt("took %.1f s", run.seconds));
    if (v.pass)
        v.detail = summary + fmt("; savings vs BP %.2f%%; SLO violations EES %llu", savings,
                                 static_cast<unsigned long long>(ees.slo_violations));
    return v;
}

verdict consolidation()
{
    verdict v;
    const auto& report = table4_run().cmp.reports.at(0);
    v.require(report.policy == strategy::ees, "first report is not EES");
    v.require(report.min_idle_nodes_all_active.has_value(), "no steady-state window observed");
    const int idle = report.min_idle_nodes_all_active.value_or(0);
    v.require(idle >= 1, fmt("%d idle nodes", idle));
    if (v.pass)
        v.detail = fmt("%d of %zu nodes idle at steady state", idle, report.nodes.size());
    return v;
}

verdict protocol()
{
    verdict v;
    std::map<int, double> idle;
    for (int f : default_frequency_set())
        idle[f] = 8.0;
    node_agent agent("n1", 4, default_frequency_set(), idle, 30.0);
    agent_server server(agent);
    agent_client client("127.0.0.1", server.port());

    v.require(client.request("SETFREQ 2800") == "CONFIRM", "valid SETFREQ not confirmed");
    v.require(client.request("SETFREQ 2700") == "ERR 400 unknown-frequency", "invalid SETFREQ reply");
    v.require(client.request("SETFREQ x") == "ERR 400 malformed-request", "malformed SETFREQ reply");
    v.require(agent.freq_mhz() == 2800, "frequency changed by a rejected request");

    const auto& P = default_frequency_set();
    const int n = 3000;
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < n; ++i)
        v.require(client.set_frequency(P[static_cast<std::size_t>(i) % P.size()]), "round trip not confirmed");
    const double rate = n / seconds_since(start);
    v.require(rate >= 500.0, fmt("%.0f round trips/s", rate));
    if (v.pass)
        v.detail = fmt("%.0f SETFREQ round trips/s", rate);
    return v;
}

std::map<std::string, std::string> compare_outputs(const std::filesystem::path& dir)
{
    std::filesystem::remove_all(dir);
    const std::string config = (scenarios / "table4.json").string();
    const std::string out = dir.string();
    const char* argv[] = {"ees", "compare", "--config", config.c_str(), "--out", out.c_str(), "--format", "json,csv"};
    std::ostringstream text, err;
    if (run_cli(static_cast<int>(std::size(argv)), argv, text, err) != exit_ok)
        throw std::runtime_error("compare failed: " + err.str());
    std::map<std::string, std::string> files{{"<stdout>", text.str()}};
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream body;
        body << in.rdbuf();
        files[entry.path().filename().string()] = body.str();
    }
    return files;
}

verdict determinism()
{
    verdict v;
    const auto tmp = std::filesystem::temp_directory_path();
    const auto first = compare_outputs(tmp / "ees_acceptance_a");
    const auto second = compare_outputs(tmp / "ees_acceptance_b");
    v.require(first.size() > 2, "compare wrote no reports");
    v.require(first == second, "reports differ between runs");
    std::size_t bytes = 0;
    for (const auto& [name, body] : first)
        bytes += body.size();
    if (v.pass)
        v.detail = fmt("%zu files, %zu bytes identical across two runs", first.size(), bytes);
    return v;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<verdict()>>> criteria{
        {"queuing math matches brute-force oracles", queuing_oracles},
        {"service rate and utilization spot values", spot_values},
        {"throughput prediction matches pointwise scaling", prediction_fidelity},
        {"M/M/c busy fraction tracks rho", occupancy},
        {"scheduler invariants under random interleavings", scheduler_invariants},
        {"4.0 -> 3.6 GHz time/energy trade-off", motivation},
        {"EES beats every baseline end to end", end_to_end},
        {"EES leaves a node idle at steady state", consolidation},
        {"control protocol conformance and throughput", protocol},
        {"compare is byte-for-byte deterministic", determinism},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        std::printf("AC%zu %s: %s (%s)\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
        failed += v.pass ? 0 : 1;
    }
    std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
    return failed == 0 ? 0 : 1;
}
