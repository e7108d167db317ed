#include "swarmnet/harness.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <memory>
#include <system_error>

#include "swarmnet/errors.hpp"

namespace swarmnet {

using nlohmann::ordered_json;

std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return ec == std::errc() ? std::string(buf, ptr) : "nan";
}

ordered_json summary_to_json(const TrialSummary& s) {
    ordered_json j;
    j["trial"] = s.trial_index;
    j["flock_speed"] = s.flock_speed;
    j["flock_speed_step_median"] = s.flock_speed_steps.median;
    j["flock_speed_step_min"] = s.flock_speed_steps.min;
    j["flock_speed_step_max"] = s.flock_speed_steps.max;
    j["flock_speed_step_std"] = s.flock_speed_steps.stddev;
    if (s.residual_log_sse.has_value())
        j["residual_log_sse"] = *s.residual_log_sse;
    else
        j["residual_log_sse"] = nullptr;
    j["residual_swapped_axes"] = s.residual_swapped_axes;
    if (s.convergence_steps.has_value())
        j["convergence_steps"] = *s.convergence_steps;
    else
        j["convergence_steps"] = nullptr;
    j["has_network_phase"] = s.has_network_phase;
    if (s.has_network_phase) {
        if (s.network_formation_steps.has_value())
            j["network_formation_steps"] = *s.network_formation_steps;
        else
            j["network_formation_steps"] = nullptr;
    }
    j["mean_link_pdr"] = s.mean_link_pdr;
    j["delivery_attempts"] = s.delivery_attempts;
    j["delivery_successes"] = s.delivery_successes;
    j["collision_drops"] = s.collision_drops;
    j["collision_drops_post_formation"] = s.collision_drops_post_formation;
    j["singularity_hit"] = s.singularity_hit;
    return j;
}

namespace {

ordered_json stats_to_json(const SummaryStats& s) {
    ordered_json j;
    j["median"] = s.median;
    j["min"] = s.min;
    j["max"] = s.max;
    j["stddev"] = s.stddev;
    return j;
}

}  // namespace

ordered_json aggregate_batch(const ExperimentConfig& cfg,
                             const std::vector<TrialSummary>& trials) {
    std::vector<double> speeds, residuals, convergence, formation, pdr;
    int formation_failures = 0;
    int convergence_failures = 0;
    for (const TrialSummary& t : trials) {
        speeds.push_back(t.flock_speed);
        if (t.residual_log_sse.has_value()) residuals.push_back(*t.residual_log_sse);
        pdr.push_back(t.mean_link_pdr);
        // A failed trial counts at the horizon/timeout so medians stay defined.
        if (t.convergence_steps.has_value()) {
            convergence.push_back(static_cast<double>(*t.convergence_steps));
        } else {
            convergence.push_back(static_cast<double>(cfg.run.horizon_steps));
            ++convergence_failures;
        }
        if (t.has_network_phase) {
            if (t.network_formation_steps.has_value()) {
                formation.push_back(static_cast<double>(*t.network_formation_steps));
            } else {
                formation.push_back(static_cast<double>(cfg.mac.join_timeout_slots));
                ++formation_failures;
            }
        }
    }

    ordered_json j;
    j["trials"] = trials.size();
    j["flock_speed"] = stats_to_json(summarize(speeds));
    if (!residuals.empty()) j["residual_log_sse"] = stats_to_json(summarize(residuals));
    j["convergence_steps"] = stats_to_json(summarize(convergence));
    j["convergence_failures"] = convergence_failures;
    if (!formation.empty()) {
        j["network_formation_steps"] = stats_to_json(summarize(formation));
        j["network_formation_failures"] = formation_failures;
    }
    j["mean_link_pdr"] = stats_to_json(summarize(pdr));
    return j;
}

BatchResult run_batch(const ExperimentConfig& cfg) {
    validate_config(cfg);
    BatchResult result;
    result.trials.reserve(static_cast<std::size_t>(cfg.run.trials));
    for (int t = 0; t < cfg.run.trials; ++t) {
        result.trials.push_back(run_trial(cfg, t).summary);
    }
    result.batch_record = aggregate_batch(cfg, result.trials);
    return result;
}

namespace {

std::string trial_file_name(int trial, const char* suffix) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "trial_%03d.%s", trial, suffix);
    return buf;
}

class CsvTraceWriter {
public:
    explicit CsvTraceWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open trace file for writing: " + path.string());
        out_ << "step,agent,x,y,vx,vy\n";
    }
    void row(std::int64_t step, const std::vector<AgentState>& agents) {
        for (const AgentState& a : agents) {
            out_ << step << ',' << a.id << ',' << format_double(a.position.x) << ','
                 << format_double(a.position.y) << ',' << format_double(a.velocity.x) << ','
                 << format_double(a.velocity.y) << '\n';
        }
    }

private:
    std::ofstream out_;
};

class CsvDeliveryWriter {
public:
    explicit CsvDeliveryWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw ConfigError("cannot open delivery log for writing: " + path.string());
        out_ << "asn,src,dst,success,rssi_dbm,channel\n";
    }
    void row(const Delivery& d) {
        out_ << d.asn << ',' << d.src << ',' << d.dst << ',' << (d.success ? 1 : 0) << ','
             << format_double(d.rssi_dbm) << ',' << d.channel << '\n';
    }

private:
    std::ofstream out_;
};

}  // namespace

BatchResult run_batch_to_dir(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    validate_config(cfg);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError("cannot create output directory " + out_dir.string() + ": " +
                              ec.message());

    {
        std::ofstream cfg_out(out_dir / "config.json", std::ios::binary);
        if (!cfg_out) throw ConfigError("cannot write config echo in " + out_dir.string());
        cfg_out << config_to_flat_json(cfg).dump(2) << '\n';
    }

    std::ofstream summary_out(out_dir / "summary.jsonl", std::ios::binary);
    if (!summary_out) throw ConfigError("cannot write summary.jsonl in " + out_dir.string());

    BatchResult result;
    result.trials.reserve(static_cast<std::size_t>(cfg.run.trials));
    for (int t = 0; t < cfg.run.trials; ++t) {
        std::unique_ptr<CsvTraceWriter> trace_writer;
        std::unique_ptr<CsvDeliveryWriter> delivery_writer;
        TrialObservers observers;
        observers.trace_stride = cfg.run.trace_stride;
        if (cfg.run.trace_stride > 0) {
            trace_writer =
                std::make_unique<CsvTraceWriter>(out_dir / trial_file_name(t, "trace.csv"));
            observers.on_trace_row = [&](std::int64_t step, const std::vector<AgentState>& a) {
                trace_writer->row(step, a);
            };
        }
        if (cfg.run.log_deliveries) {
            delivery_writer =
                std::make_unique<CsvDeliveryWriter>(out_dir / trial_file_name(t, "deliveries.csv"));
            observers.on_delivery = [&](const Delivery& d) { delivery_writer->row(d); };
        }
        TrialResult trial = run_trial(cfg, t, &observers);
        summary_out << summary_to_json(trial.summary).dump() << '\n';
        result.trials.push_back(std::move(trial.summary));
    }

    result.batch_record = aggregate_batch(cfg, result.trials);
    std::ofstream batch_out(out_dir / "batch.json", std::ios::binary);
    if (!batch_out) throw ConfigError("cannot write batch.json in " + out_dir.string());
    batch_out << result.batch_record.dump(2) << '\n';
    return result;
}

}  // namespace swarmnet
