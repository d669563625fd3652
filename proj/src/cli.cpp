#include "ees/cli.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ees/error.hpp"
#include "ees/profiles.hpp"
#include "ees/scaling.hpp"
#include "ees/sim_config.hpp"
#include "ees/simulator.hpp"

namespace ees {

namespace {

using config_edit = std::function<void(sim_config&)>;

nlohmann::json read_json(const std::string& path, const char* what)
{
    std::ifstream in(path);
    if (!in)
        throw config_error(std::string("cannot open ") + what + " " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("cannot parse ") + what + " " + path + ": " + e.what());
    }
}

/// "first:last:step", e.g. "2000:3600:200".
frequency_set parse_freq_spec(const std::string& spec)
{
    int first = 0, last = 0, step = 0;
    char a = 0, b = 0;
    std::istringstream in(spec);
    if (!(in >> first >> a >> last >> b >> step) || a != ':' || b != ':' || !in.eof())
        throw config_error("frequency set must look like first:last:step, got '" + spec + "'");
    return make_frequency_set(first, last, step);
}

std::string lower(std::string_view s)
{
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

struct sim_options
{
    std::string config_path;
    std::string out_dir = "out";
    std::vector<std::string> formats{"json", "csv"};
    bool fail_on_slo = false;
    std::vector<config_edit> edits;
};

template <typename T>
void add_override(CLI::App* cmd, sim_options& opts, const std::string& flag, const std::string& help,
                  std::function<void(sim_config&, const T&)> apply)
{
    cmd->add_option_function<T>(
        flag, [&opts, apply](const T& v) { opts.edits.push_back([apply, v](sim_config& c) { apply(c, v); }); },
        help);
}

void add_sim_flags(CLI::App* cmd, sim_options& opts)
{
    cmd->add_option("--config", opts.config_path, "Simulation config (JSON)")->required();
    cmd->add_option("--out", opts.out_dir, "Directory for report files")->capture_default_str();
    cmd->add_option("--format", opts.formats, "Report formats: json, csv")
        ->delimiter(',')
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
    cmd->add_flag("--fail-on-slo", opts.fail_on_slo, "Exit 1 when any SLO is violated");

    add_override<std::uint64_t>(cmd, opts, "--seed", "Random seed",
                                [](sim_config& c, const std::uint64_t& v) { c.seed = v; });
    add_override<double>(cmd, opts, "--rho-max", "Utilization ceiling",
                         [](sim_config& c, const double& v) { c.rho_max = v; });
    add_override<int>(cmd, opts, "--nodes", "Worker node count",
                      [](sim_config& c, const int& v) { c.node_count = v; });
    add_override<int>(cmd, opts, "--cores", "Cores per node",
                      [](sim_config& c, const int& v) { c.cores_per_node = v; });
    add_override<std::string>(cmd, opts, "--freq-set", "Frequency set first:last:step (MHz)",
                              [](sim_config& c, const std::string& v) {
                                  const auto old = c.idle_power_w;
                                  c.freq_set = parse_freq_spec(v);
                                  const bool covered = std::all_of(c.freq_set.begin(), c.freq_set.end(),
                                                                   [&](int f) { return old.contains(f); });
                                  if (!covered && !old.empty())
                                      c.idle_power_w = linear_idle_power(c.freq_set, old.begin()->second,
                                                                         old.rbegin()->second);
                              });
    add_override<double>(cmd, opts, "--duration", "Minimum simulated seconds",
                         [](sim_config& c, const double& v) { c.duration_s = v; });
    add_override<double>(cmd, opts, "--max-duration", "Hard stop in simulated seconds",
                         [](sim_config& c, const double& v) { c.max_duration_s = v; });
    add_override<double>(cmd, opts, "--interarrival-rate", "Workload submission rate (1/s)",
                         [](sim_config& c, const double& v) { c.workload_interarrival_rate = v; });
    add_override<double>(cmd, opts, "--autoscaler-interval", "Baseline autoscaler period (s)",
                         [](sim_config& c, const double& v) { c.autoscaler_interval_s = v; });
    add_override<double>(cmd, opts, "--rotation-period", "Core rotation period (s)",
                         [](sim_config& c, const double& v) { c.rotation_period_s = v; });
    add_override<double>(cmd, opts, "--profile-run", "Profile run length (s)",
                         [](sim_config& c, const double& v) { c.profile_run_s = v; });
    add_override<double>(cmd, opts, "--sample-interval", "Power time series bin width (s)",
                         [](sim_config& c, const double& v) { c.sample_interval_s = v; });
    add_override<double>(cmd, opts, "--cold-start", "Cold start delay at max frequency (s)",
                         [](sim_config& c, const double& v) { c.cold_start.base_s = v; });
    add_override<double>(cmd, opts, "--cold-start-extra", "Extra cold start at min frequency (s)",
                         [](sim_config& c, const double& v) { c.cold_start.extra_at_min_freq_s = v; });
    cmd->add_flag_callback(
        "--deterministic-service",
        [&opts] { opts.edits.push_back([](sim_config& c) { c.service = service_distribution::deterministic; }); },
        "Fixed service times instead of exponential");
}

sim_config load_with_overrides(const sim_options& opts)
{
    auto config = load_sim_config(opts.config_path);
    for (const auto& edit : opts.edits)
        edit(config);
    validate_config(config);
    return config;
}

bool wants(const sim_options& opts, std::string_view format)
{
    return std::find(opts.formats.begin(), opts.formats.end(), format) != opts.formats.end();
}

int cmd_validate(const std::string& store_path, const std::string& freq_spec, std::ostream& out)
{
    const auto store = load_profile_store(store_path);
    const auto freq_set = freq_spec.empty() ? default_frequency_set() : parse_freq_spec(freq_spec);

    std::vector<std::string> findings;
    std::set<std::string> seen;
    for (const auto& p : store) {
        if (!seen.insert(p.function_id).second)
            findings.push_back(p.function_id + ": duplicate function_id");
        for (const auto& problem : validate_profile(p, freq_set))
            findings.push_back(p.function_id + ": " + problem);
    }
    for (const auto& f : findings)
        out << f << '\n';
    out << store.size() << " profiles, " << findings.size() << " violations\n";
    return findings.empty() ? exit_ok : exit_failed;
}

struct plan_options_cli
{
    std::string job_path;
    std::string store_path;
    std::string sample_path;
    std::string freq_spec;
    std::uint64_t seed = 42;
    double rho_max = default_rho_max;
};

int cmd_plan(const plan_options_cli& opts, std::ostream& out)
{
    job_request job;
    try {
        job = read_json(opts.job_path, "job").get<job_request>();
    } catch (const nlohmann::json::exception& e) {
        throw config_error("invalid job " + opts.job_path + ": " + e.what());
    }
    check_job(job);
    const auto store = opts.store_path.empty() ? std::vector<function_profile>{}
                                               : load_profile_store(opts.store_path);
    std::optional<observed_sample> sample;
    if (!opts.sample_path.empty()) {
        try {
            sample = read_json(opts.sample_path, "sample").get<observed_sample>();
        } catch (const nlohmann::json::exception& e) {
            throw config_error("invalid sample " + opts.sample_path + ": " + e.what());
        }
    }

    planning_options options;
    options.rho_max = opts.rho_max;
    options.seed = opts.seed;
    if (!opts.freq_spec.empty())
        options.freq_set = parse_freq_spec(opts.freq_spec);

    const auto result = plan_job(job, store, sample, options);
    nlohmann::json j = std::visit([](const auto& r) { return nlohmann::json(r); }, result);
    j["job_id"] = job.job_id;
    j["function_id"] = job.function_id;
    out << j.dump(2) << '\n';
    return exit_ok;
}

int cmd_simulate(const sim_options& opts, const std::string& strategy_name, std::ostream& out)
{
    const auto policy = parse_strategy(strategy_name);
    const auto config = load_with_overrides(opts);
    const strategy one[] = {policy};
    const auto cmp = compare(config, one, false);
    const auto& report = cmp.reports.front();
    write_report_files(report, opts.out_dir, lower(to_string(policy)), wants(opts, "json"), wants(opts, "csv"));
    out << format_comparison(cmp);
    return opts.fail_on_slo && report.total_slo_violations() > 0 ? exit_failed : exit_ok;
}

int cmd_compare(const sim_options& opts, const std::vector<std::string>& names, std::ostream& out)
{
    std::vector<strategy> policies;
    for (const auto& n : names)
        policies.push_back(parse_strategy(n));
    if (policies.size() < 2)
        throw config_error("compare needs at least two strategies");
    const auto config = load_with_overrides(opts);
    const auto cmp = compare(config, policies);

    for (const auto& r : cmp.reports)
        write_report_files(r, opts.out_dir, lower(to_string(r.policy)), wants(opts, "json"), wants(opts, "csv"));
    if (wants(opts, "json")) {
        std::ofstream summary(std::filesystem::path(opts.out_dir) / "comparison.json");
        if (!summary)
            throw config_error("cannot write comparison to " + opts.out_dir);
        summary << to_json(cmp).dump(2) << '\n';
    }
    out << format_comparison(cmp);

    bool violated = false;
    for (const auto& row : cmp.rows)
        violated = violated || row.slo_violations > 0;
    return opts.fail_on_slo && violated ? exit_failed : exit_ok;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Energy-efficient scheduling of serverless functions: planning and simulation", "ees"};
    app.require_subcommand(1);

    auto* validate = app.add_subcommand("validate", "Check every profile in a profile store");
    std::string store_path;
    std::string validate_freqs;
    validate->add_option("profiles", store_path, "Profile store (JSON array)")->required();
    validate->add_option("--freq-set", validate_freqs, "Frequency set first:last:step (MHz)");

    auto* plan = app.add_subcommand("plan", "Choose frequency and replica count for one job");
    plan_options_cli plan_opts;
    plan->add_option("--job", plan_opts.job_path, "Job request (JSON)")->required();
    plan->add_option("--profiles", plan_opts.store_path, "Profile store (JSON array)");
    plan->add_option("--sample", plan_opts.sample_path, "Observed sample from a profile run (JSON)");
    plan->add_option("--seed", plan_opts.seed, "Seed for the profile-run frequency")->capture_default_str();
    plan->add_option("--rho-max", plan_opts.rho_max, "Utilization ceiling")->capture_default_str();
    plan->add_option("--freq-set", plan_opts.freq_spec, "Frequency set first:last:step (MHz)");

    auto* simulate = app.add_subcommand("simulate", "Run one strategy and write its report");
    sim_options sim_opts;
    std::string strategy_name = "EES";
    add_sim_flags(simulate, sim_opts);
    simulate->add_option("--strategy", strategy_name, "EES, BP, BPS or BP_CPU")->capture_default_str();

    auto* comp = app.add_subcommand("compare", "Run several strategies on the same config");
    sim_options cmp_opts;
    std::vector<std::string> strategies{"EES", "BP", "BPS", "BP_CPU"};
    add_sim_flags(comp, cmp_opts);
    comp->add_option("--strategy,--strategies", strategies, "Strategies to compare")
        ->delimiter(',')
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_input;
    }

    try {
        if (*validate)
            return cmd_validate(store_path, validate_freqs, out);
        if (*plan)
            return cmd_plan(plan_opts, out);
        if (*simulate)
            return cmd_simulate(sim_opts, strategy_name, out);
        return cmd_compare(cmp_opts, strategies, out);
    } catch (const unknown_profile_error& e) {
        err << "error: no profile for function_id '" << e.function_id() << "'\n";
        return exit_input;
    } catch (const config_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return exit_input;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failed;
    }
}

} // namespace ees
