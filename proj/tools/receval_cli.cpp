// Batch evaluation CLI: prep -> recommend/llm -> eval -> report, or `all` for
// the whole pipeline from a manifest. Exit codes: 0 success, 1 usage error,
// 2 data error, 3 endpoint error.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "receval/harness.hpp"

namespace fs = std::filesystem;
using namespace receval;

namespace {

struct GlobalFlags {
    std::string manifest_path;
    std::uint64_t seed = 42;
    int cutoff = 10;
    double threshold = 0.90;
    int cold_start_max = 10;
    bool seed_set = false, cutoff_set = false, threshold_set = false, cold_start_set = false;
};

RunManifest base_manifest(const GlobalFlags& g) {
    RunManifest m;
    if (!g.manifest_path.empty()) m = RunManifest::load(g.manifest_path);
    if (g.seed_set) m.seed = g.seed;
    if (g.cutoff_set) m.cutoff = g.cutoff;
    if (g.threshold_set) m.match_threshold = g.threshold;
    if (g.cold_start_set) m.cold_start_max = g.cold_start_max;
    return m;
}

SplitPair load_split(const fs::path& dir) {
    SplitPair split;
    split.train = read_interactions_tsv(dir / "train.tsv");
    split.test = read_interactions_tsv(dir / "test.tsv");
    return split;
}

std::optional<ItemCatalog> load_catalog_for(const RunManifest& manifest,
                                            const std::string& override_path) {
    std::string path = override_path.empty() ? manifest.attributes_path : override_path;
    if (path.empty()) return std::nullopt;
    return parse_attributes(path);
}

ModelConfig config_for_kind(const RunManifest& manifest, const std::string& kind) {
    for (const auto& m : manifest.models)
        if (m.kind == kind) return m;
    ModelConfig c;
    c.kind = kind;
    c.seed = manifest.seed;
    return c;
}

int cmd_prep(const GlobalFlags& g, const std::string& data, const std::string& format,
             const std::string& attributes, const std::string& out, std::size_t k, double ratio,
             const std::string& dataset_id, const std::string& scenario, bool truncate) {
    RunManifest manifest = base_manifest(g);
    if (!data.empty()) manifest.interactions_path = data;
    if (!format.empty()) manifest.format = format;
    if (!attributes.empty()) manifest.attributes_path = attributes;
    if (!dataset_id.empty()) manifest.dataset_id = dataset_id;
    if (!scenario.empty()) manifest.scenario = scenario;
    manifest.cold_start_truncate = truncate;
    manifest.kcore_k = k;
    manifest.split_ratio = ratio;

    PreparedData prepared = prepare(manifest);
    manifest.checksums = prepared.checksums;

    fs::create_directories(out);
    write_interactions(prepared.split.train, fs::path(out) / "train.tsv");
    write_interactions(prepared.split.test, fs::path(out) / "test.tsv");
    manifest.save(fs::path(out) / "manifest.json");

    nlohmann::json stats;
    stats["n_users"] = prepared.stats.n_users;
    stats["n_items"] = prepared.stats.n_items;
    stats["n_interactions"] = prepared.stats.n_interactions;
    stats["sparsity"] = prepared.stats.sparsity;
    std::ofstream(fs::path(out) / "stats.json") << stats.dump(2) << "\n";

    std::cout << "users=" << prepared.stats.n_users << " items=" << prepared.stats.n_items
              << " interactions=" << prepared.stats.n_interactions
              << " sparsity=" << format_fixed(prepared.stats.sparsity * 100.0, 2) << "%\n";
    return 0;
}

int cmd_recommend(const GlobalFlags& g, const std::string& split_dir, const std::string& models,
                  const std::string& out, bool tune, const std::string& catalog_path) {
    RunManifest manifest = RunManifest::load(fs::path(split_dir) / "manifest.json");
    if (g.cutoff_set) manifest.cutoff = g.cutoff;
    if (g.seed_set) manifest.seed = g.seed;
    SplitPair split = load_split(split_dir);
    SparseInteractionMatrix train = SparseInteractionMatrix::from_log(split.train);
    auto judgments = judgments_from_log(split.test);
    std::vector<std::string> users;
    for (const auto& [user, rel] : judgments) users.push_back(user);

    auto catalog = load_catalog_for(manifest, catalog_path);
    fs::create_directories(out);

    std::stringstream kinds(models);
    std::string kind;
    while (std::getline(kinds, kind, ',')) {
        if (kind.empty()) continue;
        ModelConfig config = config_for_kind(manifest, kind);
        if (tune) {
            auto grid = default_grid(kind, manifest.seed);
            config = tune_hyperparameters(kind, split.train, grid, manifest.seed, manifest.cutoff,
                                          catalog ? &*catalog : nullptr);
        }
        auto lists = baseline_lists(config, train, users, manifest.cutoff,
                                    catalog ? &*catalog : nullptr);
        fs::path file = fs::path(out) / (kind + ".tsv");
        write_ranked_lists(lists, config.display_name(), config.config_hash(), file);
        std::cout << kind << " -> " << file.string() << " (" << lists.size() << " users)\n";
    }
    return 0;
}

int cmd_llm(const GlobalFlags& g, const std::string& split_dir, const std::string& mode,
            const std::string& cache_dir, const std::string& prompt, int list_length,
            const std::string& model_name, const std::string& out,
            const std::string& catalog_path) {
    RunManifest manifest = RunManifest::load(fs::path(split_dir) / "manifest.json");
    if (g.cutoff_set) manifest.cutoff = g.cutoff;
    if (g.threshold_set) manifest.match_threshold = g.threshold;
    manifest.llm_mode = mode;
    manifest.transcript_dir = cache_dir;
    if (!prompt.empty()) manifest.prompt_kind = prompt;
    if (list_length > 0) manifest.llm_list_length = list_length;
    if (!model_name.empty()) manifest.llm_model_name = model_name;
    if (manifest.llm_model_name.empty())
        manifest.llm_model_name = EndpointConfig::from_environment().model;
    if (manifest.llm_model_name.empty())
        throw UsageError("no LLM model name (use --model-name or set LLM_MODEL)");

    SplitPair split = load_split(split_dir);
    SparseInteractionMatrix train = SparseInteractionMatrix::from_log(split.train);
    auto judgments = judgments_from_log(split.test);
    std::vector<std::string> users;
    for (const auto& [user, rel] : judgments) users.push_back(user);

    auto catalog = load_catalog_for(manifest, catalog_path);
    if (!catalog) throw UsageError("llm requires an item catalog (--catalog or manifest)");

    LlmRunResult result = llm_lists(manifest, train, users, *catalog);

    fs::create_directories(out);
    fs::path file = fs::path(out) / ("llm-" + manifest.llm_model_name + ".tsv");
    ModelConfig llm_cfg;
    llm_cfg.kind = "llm";
    llm_cfg.seed = manifest.seed;
    write_ranked_lists(result.lists, manifest.llm_model_name, llm_cfg.config_hash(), file);
    write_resolution_audit(result.audits, fs::path(out) / "resolution_audit.tsv");

    nlohmann::json stats;
    stats["raw_items"] = result.stats.raw_items;
    stats["external_items"] = result.stats.external_items;
    stats["duplicate_raw_strings"] = result.stats.duplicate_raw_strings;
    stats["malformed_responses"] = result.stats.malformed_responses;
    nlohmann::json hist = nlohmann::json::object();
    for (const auto& [rank, n] : result.stats.first_external_rank_hist)
        hist[std::to_string(rank)] = n;
    stats["first_external_rank_hist"] = hist;
    std::ofstream(fs::path(out) / ("llm-" + manifest.llm_model_name + ".stats.json"))
        << stats.dump(2) << "\n";

    std::cout << "llm lists -> " << file.string() << " (externals: "
              << result.stats.external_items << ")\n";
    return 0;
}

int cmd_eval(const GlobalFlags& g, const std::string& split_dir, const std::string& lists_dir,
             const std::string& out) {
    RunManifest manifest = RunManifest::load(fs::path(split_dir) / "manifest.json");
    if (g.cutoff_set) manifest.cutoff = g.cutoff;
    SplitPair split = load_split(split_dir);
    SparseInteractionMatrix train = SparseInteractionMatrix::from_log(split.train);
    auto judgments = judgments_from_log(split.test);
    PopularityProfile pop = PopularityProfile::from_matrix(train, manifest.head_fraction);
    auto catalog_items = train.item_ids();

    EvaluationReport report;
    report.cutoff = manifest.cutoff;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(lists_dir))
        if (entry.path().extension() == ".tsv" &&
            entry.path().filename().string().rfind("resolution_", 0) != 0)
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no ranked-list files under " + lists_dir);

    for (const auto& file : files) {
        std::string model_name = file.stem().string(), config_hash;
        auto lists = read_ranked_lists(file, &model_name, &config_hash);
        ModelReport mr = evaluate_lists(model_name, config_hash, lists, judgments, pop,
                                        catalog_items, manifest.cutoff);
        fs::path stats_file = file.parent_path() / (file.stem().string() + ".stats.json");
        if (fs::exists(stats_file)) {
            std::ifstream in(stats_file);
            nlohmann::json je = nlohmann::json::parse(in);
            ExternalStats e;
            e.raw_items = je.value("raw_items", 0);
            e.external_items = je.value("external_items", 0);
            e.duplicate_raw_strings = je.value("duplicate_raw_strings", 0);
            e.malformed_responses = je.value("malformed_responses", 0);
            if (je.contains("first_external_rank_hist"))
                for (const auto& [rank, n] : je.at("first_external_rank_hist").items())
                    e.first_external_rank_hist[std::stoi(rank)] = n.get<int>();
            mr.external = e;
        }
        report.models.push_back(std::move(mr));
    }

    for (size_t a = 0; a < report.models.size(); ++a)
        for (size_t b = a + 1; b < report.models.size(); ++b) {
            const auto& ma = report.models[a];
            const auto& mb = report.models[b];
            for (const auto& metric : per_user_metrics()) {
                const auto& va = ma.vectors.at(metric);
                const auto& vb = mb.vectors.at(metric);
                if (va.values.size() < 2 || va.values.size() != vb.values.size()) continue;
                bool same = true;
                for (const auto& [user, v] : va.values)
                    if (!vb.values.count(user)) { same = false; break; }
                if (!same) continue;
                report.significance[ma.model][mb.model][metric] = paired_t_test(va, vb).p;
            }
        }

    fs::create_directories(out);
    std::ofstream(fs::path(out) / "report.json") << report_to_json(report);
    emit_report(report, "csv", out);
    std::cout << "eval -> " << (fs::path(out) / "report.json").string() << " ("
              << report.models.size() << " models)\n";
    return 0;
}

int cmd_report(const std::string& eval_dir, const std::string& format, const std::string& out) {
    std::ifstream in(fs::path(eval_dir) / "report.json");
    if (!in) throw DataError("missing report.json under " + eval_dir);
    std::ostringstream buf;
    buf << in.rdbuf();
    EvaluationReport report = report_from_json(buf.str());
    emit_report(report, format, out);
    std::cout << "report (" << format << ") -> " << out << "\n";
    return 0;
}

int cmd_all(const GlobalFlags& g, const std::string& out) {
    if (g.manifest_path.empty()) throw UsageError("`all` requires --manifest");
    RunManifest manifest = base_manifest(g);
    EvaluationReport report = run_scenario(manifest);
    fs::create_directories(out);
    std::ofstream(fs::path(out) / "report.json") << report_to_json(report);
    emit_report(report, "csv", out);
    emit_report(report, "markdown", out);
    manifest.save(fs::path(out) / "manifest.json");
    std::cout << "pipeline complete -> " << out << " (" << report.models.size() << " models)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"batch recommender evaluation toolkit"};
    app.require_subcommand(1);

    GlobalFlags g;
    app.add_option("--manifest", g.manifest_path, "run manifest (json)");
    app.add_option("--seed", g.seed)->each([&](const std::string&) { g.seed_set = true; });
    app.add_option("--cutoff", g.cutoff)->each([&](const std::string&) { g.cutoff_set = true; });
    app.add_option("--threshold", g.threshold)->each([&](const std::string&) {
        g.threshold_set = true;
    });
    app.add_option("--cold-start-max", g.cold_start_max)->each([&](const std::string&) {
        g.cold_start_set = true;
    });

    // prep
    auto* prep = app.add_subcommand("prep", "ingest, k-core, split, stats");
    std::string data, format = "generic-tsv", attributes, out = "run", dataset_id, scenario;
    std::size_t k = 10;
    double ratio = 0.2;
    bool truncate = false;
    prep->add_option("--data", data, "raw interaction file");
    prep->add_option("--format", format, "movielens-100k|lastfm-hetrec|facebook-books|generic-tsv");
    prep->add_option("--attributes", attributes, "attribute triples (item, kind, value)");
    prep->add_option("--out", out, "output split directory");
    prep->add_option("--k", k, "k-core threshold");
    prep->add_option("--ratio", ratio, "holdout ratio");
    prep->add_option("--dataset-id", dataset_id);
    prep->add_option("--scenario", scenario, "full|cold-start");
    prep->add_flag("--cold-start-truncate", truncate,
                   "truncate profiles instead of filtering users");

    // recommend
    auto* rec = app.add_subcommand("recommend", "fit baselines and write Top-N lists");
    std::string split_dir = "run", models = "mostpop,random", lists_out = "run/lists",
                catalog_path;
    bool tune = false;
    rec->add_option("--split", split_dir, "split directory from prep");
    rec->add_option("--models", models, "comma-separated model kinds");
    rec->add_option("--out", lists_out, "lists output directory");
    rec->add_option("--catalog", catalog_path, "attribute file for content models");
    rec->add_flag("--tune", tune, "grid-tune hyperparameters on a validation holdout");

    // llm
    auto* llm = app.add_subcommand("llm", "render, complete, parse and resolve LLM lists");
    std::string llm_split = "run", mode = "replay", cache = "transcripts", prompt, model_name,
                llm_out = "run/lists", llm_catalog;
    int list_length = 0;
    llm->add_option("--split", llm_split);
    llm->add_option("--mode", mode, "live|record|replay");
    llm->add_option("--cache", cache, "transcript cache directory");
    llm->add_option("--prompt", prompt, "zero-shot|few-shot|chain-of-thought|role-playing");
    llm->add_option("--list-length", list_length, "requested recommendation count");
    llm->add_option("--model-name", model_name);
    llm->add_option("--out", llm_out);
    llm->add_option("--catalog", llm_catalog);

    // eval
    auto* eval = app.add_subcommand("eval", "metric suite plus significance tests");
    std::string eval_split = "run", eval_lists = "run/lists", eval_out = "run/eval";
    eval->add_option("--split", eval_split);
    eval->add_option("--lists", eval_lists);
    eval->add_option("--out", eval_out);

    // report
    auto* rep = app.add_subcommand("report", "emit csv or markdown tables");
    std::string rep_eval = "run/eval", rep_format = "markdown", rep_out = "run/report";
    rep->add_option("--eval", rep_eval);
    rep->add_option("--format", rep_format, "csv|markdown");
    rep->add_option("--out", rep_out);

    // all
    auto* all = app.add_subcommand("all", "full pipeline from a manifest");
    std::string all_out = "run/out";
    all->add_option("--out", all_out);

    try {
        app.parse(argc, argv);
        if (prep->parsed())
            return cmd_prep(g, data, format, attributes, out, k, ratio, dataset_id, scenario,
                            truncate);
        if (rec->parsed()) return cmd_recommend(g, split_dir, models, lists_out, tune, catalog_path);
        if (llm->parsed())
            return cmd_llm(g, llm_split, mode, cache, prompt, list_length, model_name, llm_out,
                           llm_catalog);
        if (eval->parsed()) return cmd_eval(g, eval_split, eval_lists, eval_out);
        if (rep->parsed()) return cmd_report(rep_eval, rep_format, rep_out);
        if (all->parsed()) return cmd_all(g, all_out);
        throw UsageError("no subcommand");
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const EndpointError& e) {
        std::cerr << "endpoint error: " << e.what() << "\n";
        return 3;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
