#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmnet/sim.hpp"

namespace swarmnet {

struct BatchResult {
    std::vector<TrialSummary> trials;
    nlohmann::ordered_json batch_record;
};

nlohmann::ordered_json summary_to_json(const TrialSummary& s);
nlohmann::ordered_json aggregate_batch(const ExperimentConfig& cfg,
                                       const std::vector<TrialSummary>& trials);

// Runs run.trials sequential trials with independent per-trial streams.
// No file output.
BatchResult run_batch(const ExperimentConfig& cfg);

// Same, writing config.json, summary.jsonl, batch.json and per-trial
// trace/delivery CSVs into out_dir. Output bytes are a pure function of
// (config, master_seed); no timestamps are ever written.
BatchResult run_batch_to_dir(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

// Deterministic shortest-round-trip float formatting used by every writer.
std::string format_double(double v);

}  // namespace swarmnet
