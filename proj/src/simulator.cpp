#include "ees/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <limits>
#include <memory>
#include <queue>
#include <random>

#include "ees/error.hpp"
#include "ees/node_agent.hpp"
#include "ees/scaling.hpp"

namespace ees {

double node_power(int freq_mhz, std::span<const busy_replica> busy,
                  const std::map<int, double>& idle_power_w)
{
    const auto idle = idle_power_w.find(freq_mhz);
    if (idle == idle_power_w.end())
        throw unknown_frequency_error(freq_mhz);
    double watts = idle->second;
    for (const auto& b : busy)
        watts += lookup(*b.profile, freq_mhz).per_replica_power_w * b.busy_fraction;
    return watts;
}

namespace {

std::uint64_t splitmix(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

class rng_stream
{
public:
    rng_stream() = default;
    rng_stream(std::uint64_t seed, std::uint64_t stream, std::uint64_t index)
        : engine_(splitmix(seed ^ splitmix(stream * 0x100000001B3ULL + index)))
    {
    }

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }
    std::uint64_t next() { return engine_(); }

private:
    std::mt19937_64 engine_;
};

enum stream_id : std::uint64_t { submission_stream = 1, arrival_stream, service_stream, profile_stream };

enum class event_kind
{
    completion,
    replica_ready,
    submit,
    arrival,
    profile_end,
    autoscale,
    rotation,
};

struct event
{
    double t = 0.0;
    event_kind kind = event_kind::completion;
    std::uint64_t seq = 0;
    std::size_t target = 0;
    std::uint64_t version = 0;
};

struct later
{
    bool operator()(const event& a, const event& b) const
    {
        if (a.t != b.t)
            return a.t > b.t;
        if (a.kind != b.kind)
            return a.kind > b.kind;
        return a.seq > b.seq;
    }
};

struct request
{
    double arrival_t = 0.0;
    double work = 1.0; ///< service time in units of the mean exec time
};

struct replica
{
    std::size_t workload = 0;
    std::string job_id;
    std::size_t node = 0;
    std::string container;
    bool started = false;
    bool draining = false;
    bool gone = false;

    std::deque<request> queue; ///< front is in service when busy
    bool busy = false;
    double remaining_work = 0.0;
    double exec_s = 0.0;
    double last_update = 0.0;
    std::uint64_t version = 0;

    std::uint64_t completed = 0;
    double busy_time = 0.0;
    double ready_time = 0.0;
};

enum class phase { pending, profiling, running, done };

struct workload_state
{
    const workload_spec* spec = nullptr;
    const function_profile* truth = nullptr;
    function_profile believed;
    rng_stream arrival_rng;
    rng_stream service_rng;
    std::uint64_t profile_seed = 0;

    phase ph = phase::pending;
    double traffic_end = 0.0;
    std::uint64_t batch_total = 0;
    bool arrivals_done = false;
    double target_load = 1.0;

    std::vector<std::size_t> replicas; ///< live replica ids
    std::uint64_t in_flight = 0;
    std::uint64_t window_arrivals = 0;
    std::vector<double> responses;
    double busy_time = 0.0;
    double ready_time = 0.0;
    double cold_start_sum = 0.0;
    std::uint64_t cold_starts = 0;

    workload_report report;
};

class simulation
{
public:
    simulation(const sim_config& config, strategy policy)
        : cfg_(config),
          policy_(policy),
          cl_(make_cluster(config.node_count, config.cores_per_node, config.freq_set, policy)),
          known_(config.known_profiles())
    {
        validate_config(cfg_);
        const double max_power = cfg_.effective_max_node_power();
        const int rest = resting_frequency(cl_);
        for (const auto& n : cl_.nodes) {
            agents_.push_back(std::make_unique<node_agent>(n.node_id, n.total_cores, cfg_.freq_set,
                                                           cfg_.idle_power_w, max_power));
            agents_.back()->set_frequency(rest);
            node_report nr;
            nr.node_id = n.node_id;
            nr.freq_trace.emplace_back(0.0, rest);
            nodes_.push_back(std::move(nr));
            node_replicas_.emplace_back();
        }
        watts_.assign(cl_.nodes.size(), 0.0);
        for (std::size_t i = 0; i < cl_.nodes.size(); ++i)
            refresh_power(i);

        rng_stream submit_rng(cfg_.seed, submission_stream, 0);
        double t = 0.0;
        workloads_.reserve(cfg_.workloads.size());
        for (std::size_t w = 0; w < cfg_.workloads.size(); ++w) {
            const auto& spec = cfg_.workloads[w];
            const auto* truth = find_profile(cfg_.profiles, spec.function_id);
            if (!truth)
                throw unknown_profile_error(spec.function_id);
            workload_state ws;
            ws.spec = &spec;
            ws.truth = truth;
            ws.believed = *truth;
            ws.arrival_rng = rng_stream(cfg_.seed, arrival_stream, w);
            ws.service_rng = rng_stream(cfg_.seed, service_stream, w);
            ws.profile_seed = rng_stream(cfg_.seed, profile_stream, w).next();
            ws.report.workload_id = spec.workload_id;
            ws.report.function_id = spec.function_id;
            ws.target_load = spec.target_load_rps.value_or(
                cfg_.rho_max * lookup(*truth, cfg_.freq_set.back()).throughput_rps);
            workloads_.push_back(std::move(ws));

            if (spec.submit_at_s) {
                push(*spec.submit_at_s, event_kind::submit, w);
            } else {
                if (w > 0)
                    t += submit_rng.exponential(cfg_.workload_interarrival_rate);
                push(t, event_kind::submit, w);
            }
        }
        if (exclusive_cores(policy_) && cfg_.rotation_period_s > 0.0)
            push(cfg_.rotation_period_s, event_kind::rotation, 0);
        if (policy_ != strategy::ees && cfg_.autoscaler_interval_s > 0.0)
            push(cfg_.autoscaler_interval_s, event_kind::autoscale, 0);
    }

    sim_report run()
    {
        const std::size_t total = workloads_.size();
        bool capped = false;
        track_idle();
        while (!events_.empty()) {
            const event e = events_.top();
            if (done_ == total && e.t > cfg_.duration_s)
                break;
            if (e.t > cfg_.max_duration_s) {
                capped = true;
                break;
            }
            events_.pop();
            advance(e.t);
            dispatch_event(e);
            track_idle();
        }
        const double end = std::max(now_, capped ? cfg_.max_duration_s : cfg_.duration_s);
        advance(end);
        return finish(end);
    }

private:
    void push(double t, event_kind kind, std::size_t target, std::uint64_t version = 0)
    {
        events_.push(event{t, kind, seq_++, target, version});
    }

    // ---- time and energy ----

    void advance(double t)
    {
        if (t <= now_)
            return;
        const double dt = t - now_;
        for (std::size_t i = 0; i < nodes_.size(); ++i) {
            nodes_[i].energy_j += watts_[i] * dt;
            if (!cl_.nodes[i].empty())
                nodes_[i].hosted_time_s += dt;
        }
        double cluster_w = 0.0;
        for (double w : watts_)
            cluster_w += w;
        double cursor = now_;
        const double width = cfg_.sample_interval_s;
        while (cursor < t) {
            auto k = static_cast<std::size_t>(cursor / width);
            if (static_cast<double>(k + 1) * width <= cursor)
                ++k;
            const double bin_end = std::min(t, static_cast<double>(k + 1) * width);
            if (bins_.size() <= k)
                bins_.resize(k + 1, 0.0);
            bins_[k] += cluster_w * (bin_end - cursor);
            cursor = bin_end;
        }
        for (auto id : live_) {
            auto& r = replicas_[id];
            if (r.started)
                r.ready_time += dt;
            if (r.busy)
                r.busy_time += dt;
        }
        now_ = t;
    }

    void refresh_power(std::size_t node)
    {
        std::vector<busy_replica> busy;
        for (auto id : node_replicas_[node]) {
            const auto& r = replicas_[id];
            if (r.busy)
                busy.push_back({workloads_[r.workload].truth, 1.0});
        }
        const int freq = cl_.nodes[node].current_freq_mhz;
        watts_[node] = node_power(freq, busy, cfg_.idle_power_w);
        agents_[node]->set_busy_power(watts_[node] - cfg_.idle_power_w.at(freq));
    }

    std::size_t node_index(const std::string& node_id) const
    {
        const auto it = std::lower_bound(cl_.nodes.begin(), cl_.nodes.end(), node_id,
                                         [](const node_view& n, const std::string& id) { return n.node_id < id; });
        return static_cast<std::size_t>(it - cl_.nodes.begin());
    }

    /// Brings the agent and in-service requests in line with the cluster's frequency for a node.
    void retune(const freq_update& u, const std::string& job_id)
    {
        const std::size_t i = node_index(u.node_id);
        const auto reply = agents_[i]->set_frequency(u.freq_mhz);
        if (!reply.ok())
            throw error("node agent rejected frequency: " + reply.to_line());
        for (auto id : node_replicas_[i]) {
            auto& r = replicas_[id];
            if (!r.busy)
                continue;
            const double done_work = (now_ - r.last_update) / r.exec_s;
            r.remaining_work = std::max(0.0, r.remaining_work - done_work);
            r.exec_s = lookup(*workloads_[r.workload].truth, u.freq_mhz).avg_exec_time_s;
            r.last_update = now_;
            ++r.version;
            push(now_ + r.remaining_work * r.exec_s, event_kind::completion, id, r.version);
        }
        nodes_[i].freq_trace.emplace_back(now_, u.freq_mhz);
        log("freq", u.node_id, job_id, u.freq_mhz, 0);
        refresh_power(i);
    }

    void log(std::string kind, const std::string& node, const std::string& job, int freq, int replicas)
    {
        events_log_.push_back(placement_event{now_, std::move(kind), node, job, freq, replicas});
    }

    // ---- replicas ----

    int active_replicas(const workload_state& w) const
    {
        int n = 0;
        for (auto id : w.replicas)
            if (!replicas_[id].draining)
                ++n;
        return n;
    }

    void trace_replicas(workload_state& w)
    {
        const int n = active_replicas(w);
        auto& trace = w.report.replica_trace;
        if (!trace.empty() && trace.back().first == now_)
            trace.back().second = n;
        else
            trace.emplace_back(now_, n);
        w.report.peak_replicas = std::max(w.report.peak_replicas, n);
    }

    void create_replica(std::size_t w, const std::string& job_id, std::size_t node)
    {
        auto& ws = workloads_[w];
        const std::size_t id = replicas_.size();
        replica r;
        r.workload = w;
        r.job_id = job_id;
        r.node = node;
        r.container = job_id + "/r" + std::to_string(id);
        if (exclusive_cores(policy_))
            agents_[node]->pin(r.container, cores_needed(*ws.truth));
        replicas_.push_back(std::move(r));
        live_.push_back(id);
        node_replicas_[node].push_back(id);
        ws.replicas.push_back(id);

        const double cold = cfg_.cold_start.delay(ws.spec->function_id,
                                                  cl_.nodes[node].current_freq_mhz, cfg_.freq_set);
        ws.cold_start_sum += cold;
        ++ws.cold_starts;
        push(now_ + cold, event_kind::replica_ready, id);
    }

    void place(std::size_t w, const std::string& job_id, const placement_plan& plan,
               const function_profile& profile, int desired_freq)
    {
        apply_plan(cl_, plan, job_id, profile, desired_freq);
        for (const auto& u : plan.freq_updates)
            retune(u, job_id);
        for (const auto& a : plan.assignments) {
            const std::size_t node = node_index(a.node_id);
            for (int k = 0; k < a.replicas; ++k)
                create_replica(w, job_id, node);
            log("place", a.node_id, job_id, cl_.nodes[node].current_freq_mhz, a.replicas);
        }
        trace_replicas(workloads_[w]);
    }

    void retire(std::size_t id)
    {
        auto& r = replicas_[id];
        if (r.gone)
            return;
        r.gone = true;
        auto& ws = workloads_[r.workload];
        ws.busy_time += r.busy_time;
        ws.ready_time += r.ready_time;
        std::erase(live_, id);
        std::erase(node_replicas_[r.node], id);
        std::erase(ws.replicas, id);
        if (exclusive_cores(policy_))
            agents_[r.node]->unpin(r.container);

        const std::string node_id = cl_.nodes[r.node].node_id;
        const auto update = remove_replicas(cl_, node_id, r.job_id, 1);
        log("remove", node_id, r.job_id, cl_.nodes[r.node].current_freq_mhz, 1);
        if (update)
            retune(*update, r.job_id);
        refresh_power(r.node);
        trace_replicas(ws);
    }

    void drain(std::size_t id)
    {
        auto& r = replicas_[id];
        r.draining = true;
        if (r.queue.empty())
            retire(id);
        else
            trace_replicas(workloads_[r.workload]);
    }

    void start_service(std::size_t id)
    {
        auto& r = replicas_[id];
        if (!r.started || r.busy || r.queue.empty())
            return;
        r.busy = true;
        r.remaining_work = r.queue.front().work;
        r.exec_s = lookup(*workloads_[r.workload].truth, cl_.nodes[r.node].current_freq_mhz).avg_exec_time_s;
        r.last_update = now_;
        ++r.version;
        push(now_ + r.remaining_work * r.exec_s, event_kind::completion, id, r.version);
        refresh_power(r.node);
    }

    // ---- requests ----

    void reject(workload_state& w)
    {
        ++w.report.rejected;
        ++w.report.slo_violations;
    }

    void dispatch(std::size_t w, request req)
    {
        auto& ws = workloads_[w];
        std::size_t best = std::numeric_limits<std::size_t>::max();
        for (auto id : ws.replicas) {
            const auto& r = replicas_[id];
            if (r.draining)
                continue;
            if (best == std::numeric_limits<std::size_t>::max() ||
                r.queue.size() < replicas_[best].queue.size() ||
                (r.queue.size() == replicas_[best].queue.size() && id < best))
                best = id;
        }
        if (best == std::numeric_limits<std::size_t>::max()) {
            reject(ws);
            return;
        }
        replicas_[best].queue.push_back(req);
        ++ws.in_flight;
        start_service(best);
    }

    request draw_request(workload_state& w)
    {
        request req;
        req.arrival_t = now_;
        req.work = cfg_.service == service_distribution::deterministic ? 1.0 : w.service_rng.exponential(1.0);
        ++w.report.generated;
        ++w.window_arrivals;
        return req;
    }

    double request_rate(const workload_state& w) const
    {
        job_request job = to_job(w);
        return arrival_rate(job);
    }

    void schedule_next_arrival(std::size_t w)
    {
        auto& ws = workloads_[w];
        const double next = now_ + ws.arrival_rng.exponential(request_rate(ws));
        if (ws.spec->kind == job_kind::stream) {
            if (next >= ws.traffic_end) {
                ws.arrivals_done = true;
                return;
            }
        } else if (ws.report.generated >= ws.batch_total) {
            ws.arrivals_done = true;
            return;
        }
        push(next, event_kind::arrival, w);
    }

    void on_arrival(std::size_t w)
    {
        auto& ws = workloads_[w];
        dispatch(w, draw_request(ws));
        schedule_next_arrival(w);
        check_done(w);
    }

    void on_completion(std::size_t id, std::uint64_t version)
    {
        auto& r = replicas_[id];
        if (r.gone || !r.busy || r.version != version)
            return;
        const request req = r.queue.front();
        r.queue.pop_front();
        r.busy = false;
        ++r.completed;

        auto& ws = workloads_[r.workload];
        --ws.in_flight;
        ++ws.report.completed;
        const double response = now_ - req.arrival_t;
        ws.responses.push_back(response);
        if (ws.spec->slo_max_response_s && response > *ws.spec->slo_max_response_s)
            ++ws.report.slo_violations;
        else if (ws.spec->kind == job_kind::batch &&
                 now_ > ws.report.submitted_at_s + ws.spec->deadline_s)
            ++ws.report.slo_violations;

        if (r.queue.empty())
            refresh_power(r.node);
        else
            start_service(id);
        if (r.draining && r.queue.empty())
            retire(id);
        check_done(r.workload);
    }

    void on_ready(std::size_t id)
    {
        auto& r = replicas_[id];
        if (r.gone || r.started)
            return;
        r.started = true;
        start_service(id);
    }

    void check_done(std::size_t w)
    {
        auto& ws = workloads_[w];
        if (ws.ph == phase::done || ws.ph == phase::pending || !ws.arrivals_done || ws.in_flight > 0)
            return;
        ws.ph = phase::done;
        ws.report.completed_at_s = now_;
        ws.report.duration_s = now_ - ws.report.submitted_at_s;
        const auto ids = ws.replicas;
        for (auto id : ids)
            retire(id);
        ++done_;
    }

    // ---- deployment ----

    job_request to_job(const workload_state& w) const
    {
        job_request job;
        job.job_id = w.spec->workload_id;
        job.function_id = w.spec->function_id;
        job.kind = w.spec->kind;
        job.batch_size = w.spec->batch_size;
        job.deadline_s = w.spec->deadline_s;
        job.min_throughput_rps = w.spec->rate_rps;
        return job;
    }

    planning_options plan_options(const workload_state& w) const
    {
        return planning_options{cfg_.rho_max, cfg_.freq_set, w.profile_seed};
    }

    /// Applies pinned frequency/replicas over what the scaling component chose.
    scaling_decision pinned(const workload_state& w, scaling_decision d) const
    {
        const auto& spec = *w.spec;
        if (spec.pinned_freq_mhz) {
            d.freq_mhz = *spec.pinned_freq_mhz;
            d.replicas = spec.pinned_replicas.value_or(
                min_replicas(d.lambda_rps, lookup(w.believed, d.freq_mhz).avg_exec_time_s, cfg_.rho_max));
        } else if (spec.pinned_replicas) {
            d.replicas = *spec.pinned_replicas;
        }
        const auto& point = lookup(w.believed, d.freq_mhz);
        d.predicted_rho = utilization(d.lambda_rps, service_rate(d.replicas, point.avg_exec_time_s));
        d.predicted_power_w = point.per_replica_power_w * d.replicas;
        return d;
    }

    bool deploy_ees(std::size_t w, const std::string& job_id, const scaling_decision& d,
                    const function_profile& profile)
    {
        auto& ws = workloads_[w];
        const auto plan = schedule_ees(cl_, job_id, d, profile);
        if (plan.unscheduled) {
            log("unscheduled", "", job_id, d.freq_mhz, d.replicas);
            return false;
        }
        place(w, job_id, plan, profile, d.freq_mhz);
        ws.report.freq_mhz = d.freq_mhz;
        return true;
    }

    void record_decision(workload_state& ws, const scaling_decision& d)
    {
        ws.report.freq_mhz = d.freq_mhz;
        ws.report.planned_replicas = d.replicas;
        ws.report.predicted_rho = d.predicted_rho;
    }

    void submit_ees(std::size_t w)
    {
        auto& ws = workloads_[w];
        const job_request job = to_job(ws);
        const bool has_pin = ws.spec->pinned_freq_mhz || ws.spec->pinned_replicas;

        plan_result result = has_pin
            ? plan_result{select_config(ws.believed, arrival_rate(job), cfg_.rho_max)}
            : plan_job(job, known_, std::nullopt, plan_options(ws));

        if (const auto* run = std::get_if<profile_run_directive>(&result)) {
            ws.report.profile_run = true;
            scaling_decision d;
            d.freq_mhz = run->freq_mhz;
            d.replicas = run->replicas;
            d.lambda_rps = arrival_rate(job);
            if (!deploy_ees(w, profile_job(ws), d, *ws.truth)) {
                ws.report.unscheduled = true;
                ws.ph = phase::running;
                return;
            }
            ws.report.planned_replicas = d.replicas;
            ws.ph = phase::profiling;
            push(now_ + cfg_.profile_run_s, event_kind::profile_end, w);
            return;
        }

        auto d = std::get<scaling_decision>(result);
        if (has_pin)
            d = pinned(ws, d);
        record_decision(ws, d);
        ws.ph = phase::running;
        if (!deploy_ees(w, job.job_id, d, ws.believed))
            ws.report.unscheduled = true;
    }

    static std::string profile_job(const workload_state& w) { return w.spec->workload_id + "#profile"; }

    void on_profile_end(std::size_t w)
    {
        auto& ws = workloads_[w];
        if (ws.ph != phase::profiling)
            return;
        ws.ph = phase::running;

        std::vector<std::size_t> probes = ws.replicas;
        std::uint64_t completed = 0;
        double busy = 0.0;
        for (auto id : probes) {
            completed += replicas_[id].completed;
            busy += replicas_[id].busy_time;
        }
        const int freq = ws.report.freq_mhz;
        const auto& true_point = lookup(*ws.truth, freq);
        observed_sample sample{ws.spec->function_id, freq,
                               completed > 0 && busy > 0.0 ? completed / busy : true_point.throughput_rps,
                               true_point.cpu_utilization};

        const job_request job = to_job(ws);
        scaling_decision d;
        try {
            const auto result = plan_job(job, known_, sample, plan_options(ws));
            d = std::get<scaling_decision>(result);
            const auto& closest = match_closest(known_, sample);
            ws.believed = predict_profile(closest, sample);
        } catch (const empty_store_error&) {
            return; // nothing to predict from: the probe keeps serving
        }
        if (ws.spec->pinned_freq_mhz || ws.spec->pinned_replicas)
            d = pinned(ws, d);
        record_decision(ws, d);
        if (!deploy_ees(w, job.job_id, d, ws.believed)) {
            ws.report.unscheduled = true;
            return;
        }
        for (auto id : probes)
            if (!replicas_[id].gone)
                drain(id);
        check_done(w);
    }

    /// Places up to `count` baseline replicas, shrinking the request until it fits.
    int deploy_baseline(std::size_t w, int count)
    {
        auto& ws = workloads_[w];
        for (int n = count; n > 0; --n) {
            const auto plan = schedule_baseline(cl_, ws.spec->workload_id, n, *ws.truth, policy_);
            if (plan.unscheduled)
                continue;
            place(w, ws.spec->workload_id, plan, *ws.truth, resting_frequency(cl_));
            return n;
        }
        log("unscheduled", "", ws.spec->workload_id, 0, count);
        return 0;
    }

    void on_submit(std::size_t w)
    {
        auto& ws = workloads_[w];
        ws.report.submitted_at_s = now_;
        ++submitted_;
        if (ws.spec->kind == job_kind::stream)
            ws.traffic_end = now_ + ws.spec->traffic_duration_s;
        else
            ws.batch_total = static_cast<std::uint64_t>(std::llround(ws.spec->batch_size));
        trace_replicas(ws);

        if (policy_ == strategy::ees) {
            submit_ees(w);
        } else {
            ws.ph = phase::running;
            ws.report.freq_mhz = resting_frequency(cl_);
            ws.report.planned_replicas = deploy_baseline(w, 1);
            ws.report.unscheduled = ws.report.planned_replicas == 0;
        }

        ws.window_arrivals = 0;
        if (ws.spec->kind == job_kind::batch && ws.spec->arrivals == arrival_pattern::burst) {
            for (std::uint64_t k = 0; k < ws.batch_total; ++k)
                dispatch(w, draw_request(ws));
            ws.arrivals_done = true;
            check_done(w);
        } else if (ws.spec->kind == job_kind::stream && ws.spec->traffic_duration_s <= 0.0) {
            ws.arrivals_done = true;
            check_done(w);
        } else if (ws.spec->kind == job_kind::batch && ws.batch_total == 0) {
            ws.arrivals_done = true;
            check_done(w);
        } else {
            schedule_next_arrival(w);
        }
    }

    void on_autoscale()
    {
        for (std::size_t w = 0; w < workloads_.size(); ++w) {
            auto& ws = workloads_[w];
            if (ws.ph != phase::running)
                continue;
            int ready = 0;
            std::vector<std::size_t> active;
            for (auto id : ws.replicas) {
                const auto& r = replicas_[id];
                if (r.draining)
                    continue;
                active.push_back(id);
                if (r.started)
                    ++ready;
            }
            const double window_rate = ws.window_arrivals / cfg_.autoscaler_interval_s;
            ws.window_arrivals = 0;
            if (ready == 0)
                continue;
            const int desired = autoscale_rps(ready, window_rate / ready, ws.target_load);
            const int current = static_cast<int>(active.size());
            if (desired > current) {
                if (deploy_baseline(w, desired - current) > 0)
                    log("scale", "", ws.spec->workload_id, 0, desired);
            } else if (desired < current) {
                std::sort(active.rbegin(), active.rend());
                for (int k = 0; k < current - desired; ++k)
                    drain(active[static_cast<std::size_t>(k)]);
                log("scale", "", ws.spec->workload_id, 0, desired);
            }
        }
        push(now_ + cfg_.autoscaler_interval_s, event_kind::autoscale, 0);
    }

    void on_rotation()
    {
        for (auto& a : agents_)
            a->rotate();
        push(now_ + cfg_.rotation_period_s, event_kind::rotation, 0);
    }

    void dispatch_event(const event& e)
    {
        switch (e.kind) {
        case event_kind::completion: on_completion(e.target, e.version); break;
        case event_kind::replica_ready: on_ready(e.target); break;
        case event_kind::submit: on_submit(e.target); break;
        case event_kind::arrival: on_arrival(e.target); break;
        case event_kind::profile_end: on_profile_end(e.target); break;
        case event_kind::autoscale: on_autoscale(); break;
        case event_kind::rotation: on_rotation(); break;
        }
    }

    void track_idle()
    {
        if (workloads_.empty() || submitted_ < workloads_.size() || done_ > 0)
            return;
        for (const auto& w : workloads_)
            if (w.ph == phase::profiling)
                return;
        for (auto id : live_)
            if (replicas_[id].job_id != workloads_[replicas_[id].workload].spec->workload_id)
                return;
        int idle = 0;
        for (const auto& n : cl_.nodes)
            if (n.empty())
                ++idle;
        min_idle_ = min_idle_ ? std::min(*min_idle_, idle) : idle;
    }

    sim_report finish(double end)
    {
        sim_report rep;
        rep.policy = policy_;
        rep.seed = cfg_.seed;
        rep.horizon_s = end;
        rep.sample_interval_s = cfg_.sample_interval_s;
        rep.min_idle_nodes_all_active = min_idle_;

        const double width = cfg_.sample_interval_s;
        for (std::size_t k = 0; k < bins_.size(); ++k) {
            const double start = static_cast<double>(k) * width;
            const double span = std::min(end, start + width) - start;
            if (span <= 0.0)
                break;
            rep.power_timeseries.emplace_back(start, bins_[k] / span);
        }
        for (const auto& n : nodes_)
            rep.total_energy_j += n.energy_j;
        rep.nodes = nodes_;

        for (auto id : live_) {
            auto& ws = workloads_[replicas_[id].workload];
            ws.busy_time += replicas_[id].busy_time;
            ws.ready_time += replicas_[id].ready_time;
        }
        for (auto& ws : workloads_) {
            auto& r = ws.report;
            r.in_flight = ws.in_flight;
            r.response = summarize(ws.responses);
            r.mean_busy_fraction = ws.ready_time > 0.0 ? ws.busy_time / ws.ready_time : 0.0;
            r.mean_cold_start_s = ws.cold_starts ? ws.cold_start_sum / ws.cold_starts : 0.0;
            const double active = r.duration_s.value_or(end - r.submitted_at_s);
            r.achieved_throughput_rps = active > 0.0 ? r.completed / active : 0.0;
            if (ws.ph == phase::pending)
                rep.notes.push_back("workload " + r.workload_id + " was never submitted");
            else if (!r.completed_at_s)
                rep.notes.push_back("workload " + r.workload_id + " unfinished at horizon");
            if (r.unscheduled)
                rep.notes.push_back("workload " + r.workload_id + " could not be fully scheduled");
            rep.workloads.push_back(std::move(r));
        }

        switch (policy_) {
        case strategy::bp:
        case strategy::bp_cpu:
            rep.notes.push_back("baseline placement is a round-robin spread standing in for the "
                                "orchestrator's default scheduler");
            break;
        case strategy::bps:
            rep.notes.push_back("BPS pins every node at min(P), an ideal stand-in for a power-save governor");
            break;
        case strategy::ees:
            break;
        }
        rep.events = std::move(events_log_);
        return rep;
    }

    const sim_config& cfg_;
    strategy policy_;
    cluster cl_;
    std::vector<function_profile> known_;
    std::vector<std::unique_ptr<node_agent>> agents_;
    std::vector<node_report> nodes_;
    std::vector<std::vector<std::size_t>> node_replicas_;
    std::vector<double> watts_;
    std::vector<double> bins_;

    std::priority_queue<event, std::vector<event>, later> events_;
    std::uint64_t seq_ = 0;
    double now_ = 0.0;

    std::vector<replica> replicas_;
    std::vector<std::size_t> live_;
    std::vector<workload_state> workloads_;
    std::size_t submitted_ = 0;
    std::size_t done_ = 0;
    std::optional<int> min_idle_;
    std::vector<placement_event> events_log_;
};

} // namespace

sim_report run(const sim_config& config, strategy policy)
{
    return simulation(config, policy).run();
}

comparison compare(const sim_config& config, std::span<const strategy> strategies, bool parallel)
{
    comparison cmp;
    if (parallel && strategies.size() > 1) {
        std::vector<std::future<sim_report>> jobs;
        for (auto s : strategies)
            jobs.push_back(std::async(std::launch::async, [&config, s] { return run(config, s); }));
        for (auto& j : jobs)
            cmp.reports.push_back(j.get());
    } else {
        for (auto s : strategies)
            cmp.reports.push_back(run(config, s));
    }

    std::optional<double> bp_energy;
    for (const auto& r : cmp.reports)
        if (r.policy == strategy::bp)
            bp_energy = r.total_energy_j;

    for (const auto& r : cmp.reports) {
        comparison_row row;
        row.policy = r.policy;
        row.total_energy_j = r.total_energy_j;
        if (bp_energy && *bp_energy > 0.0)
            row.savings_vs_bp_pct = (*bp_energy - r.total_energy_j) / *bp_energy * 100.0;
        row.slo_violations = r.total_slo_violations();
        for (const auto& w : r.workloads)
            row.durations_s.emplace_back(w.workload_id, w.duration_s);
        cmp.rows.push_back(std::move(row));
    }
    return cmp;
}

} // namespace ees
