#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "receval/corpus.hpp"
#include "receval/llm_bridge.hpp"
#include "receval/matching.hpp"
#include "receval/metrics.hpp"
#include "receval/recommenders.hpp"

namespace receval {

inline constexpr const char* kToolVersion = "0.1.0";

/// Everything needed to re-execute a run bit-identically (given replay
/// transcripts). Serializes to JSON.
struct RunManifest {
    std::string dataset_id;
    std::string interactions_path;
    std::string format = "generic-tsv";
    std::string attributes_path;                  // optional
    std::map<std::string, std::string> checksums; // file -> sha256, recorded at prep

    std::size_t kcore_k = 10;
    double split_ratio = 0.2;
    std::uint64_t seed = 42;

    std::string scenario = "full";  // full | cold-start
    int cold_start_max = 10;
    bool cold_start_truncate = false;  // alternative semantics: truncate profiles

    std::vector<ModelConfig> models;

    std::string prompt_kind = "role-playing";
    int llm_list_length = 50;
    std::size_t llm_history_budget = 0;
    std::string llm_model_name;
    std::string llm_mode = "replay";
    std::string transcript_dir;

    double match_threshold = 0.90;
    int cutoff = 10;
    double head_fraction = 0.2;
    std::string tool_version = kToolVersion;

    std::string to_json() const;
    static RunManifest from_json(const std::string& text);
    static RunManifest load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;
};

/// Retains exactly the users whose train profile size is <= max_interactions;
/// the test side is restricted to the same users. Throws DataError when no
/// user qualifies.
SplitPair cold_start_filter(const SplitPair& split, int max_interactions = 10);

/// Alternative cold-start semantics: keep every user but truncate train
/// profiles to max_interactions (seeded selection).
SplitPair cold_start_truncate(const SplitPair& split, int max_interactions, std::uint64_t seed);

struct ExternalStats {
    int raw_items = 0;
    int external_items = 0;
    int duplicate_raw_strings = 0;
    int malformed_responses = 0;
    std::map<int, int> first_external_rank_hist;  // rank -> users
};

struct ModelReport {
    std::string model;
    std::string config_hash;
    std::map<std::string, double> aggregates;       // metric -> aggregate
    std::map<std::string, MetricVector> vectors;    // per-user metrics
    std::size_t n_users = 0;
    std::size_t excluded_users = 0;
    std::optional<ExternalStats> external;          // llm models only
};

struct EvaluationReport {
    std::vector<ModelReport> models;  // manifest order; emit sorts by nDCG
    // model_a -> model_b -> metric -> two-sided p
    std::map<std::string, std::map<std::string, std::map<std::string, double>>> significance;
    int cutoff = 10;
};

/// Metric display order of the report tables.
const std::vector<std::string>& metric_order();
/// Metrics with per-user vectors (the significance-testable subset).
const std::vector<std::string>& per_user_metrics();

struct PreparedData {
    SplitPair split;
    DatasetStats stats;                 // of the k-cored log
    std::optional<ItemCatalog> catalog;
    std::map<std::string, std::string> checksums;
};

/// prep stage: parse, k-core, split, optional cold-start restriction.
PreparedData prepare(const RunManifest& manifest);

/// Fits one baseline and produces Top-N lists for every test user (sorted).
std::map<std::string, RankedList> baseline_lists(const ModelConfig& config,
                                                 const SparseInteractionMatrix& train,
                                                 const std::vector<std::string>& users, int n,
                                                 const ItemCatalog* catalog);

struct LlmRunResult {
    std::map<std::string, RankedList> lists;
    ExternalStats stats;
    std::vector<std::pair<std::string, ResolvedList>> audits;  // user -> resolution audit
};

/// render -> complete -> parse -> resolve for every test user.
LlmRunResult llm_lists(const RunManifest& manifest, const SparseInteractionMatrix& train,
                       const std::vector<std::string>& users, const ItemCatalog& catalog,
                       Transport transport = {});

/// Scores one model's lists with the full metric suite.
ModelReport evaluate_lists(const std::string& model_name, const std::string& config_hash,
                           const std::map<std::string, RankedList>& lists,
                           const RelevanceJudgments& judgments, const PopularityProfile& pop,
                           const std::vector<std::string>& catalog_items, int cutoff);

/// Full pipeline: prep -> recommend -> (llm) -> metrics -> significance.
EvaluationReport run_scenario(const RunManifest& manifest, Transport transport = {});

/// Deterministic CSV + markdown emission; models ranked by ascending nDCG,
/// metrics in the table column order, values at 4 decimals, significant
/// cells (p < 0.05) marked with '*'.
void emit_report(const EvaluationReport& report, const std::string& format,
                 const std::filesystem::path& out_dir);

/// Machine-readable form consumed by the `report` subcommand.
std::string report_to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const std::string& text);

// --- stage artifacts ---

void write_ranked_lists(const std::map<std::string, RankedList>& lists,
                        const std::string& model_name, const std::string& config_hash,
                        const std::filesystem::path& path);
std::map<std::string, RankedList> read_ranked_lists(const std::filesystem::path& path,
                                                    std::string* model_name = nullptr,
                                                    std::string* config_hash = nullptr);

void write_resolution_audit(const std::vector<std::pair<std::string, ResolvedList>>& audits,
                            const std::filesystem::path& path);

RelevanceJudgments judgments_from_log(const InteractionLog& test);

}  // namespace receval
