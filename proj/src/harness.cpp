#include "receval/harness.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

namespace receval {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Manifest
// ---------------------------------------------------------------------------

namespace {

json config_to_json(const ModelConfig& c) {
    json j;
    j["kind"] = c.kind;
    j["neighborhood_k"] = c.neighborhood_k;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    j["lambda"] = c.lambda;
    j["latent_dim"] = c.latent_dim;
    j["learning_rate"] = c.learning_rate;
    j["epochs"] = c.epochs;
    j["negatives"] = c.negatives;
    j["seed"] = c.seed;
    return j;
}

ModelConfig config_from_json(const json& j) {
    ModelConfig c;
    c.kind = j.at("kind").get<std::string>();
    c.neighborhood_k = j.value("neighborhood_k", c.neighborhood_k);
    c.alpha = j.value("alpha", c.alpha);
    c.beta = j.value("beta", c.beta);
    c.lambda = j.value("lambda", c.lambda);
    c.latent_dim = j.value("latent_dim", c.latent_dim);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.epochs = j.value("epochs", c.epochs);
    c.negatives = j.value("negatives", c.negatives);
    c.seed = j.value("seed", c.seed);
    return c;
}

}  // namespace

std::string RunManifest::to_json() const {
    json j;
    j["dataset_id"] = dataset_id;
    j["interactions_path"] = interactions_path;
    j["format"] = format;
    j["attributes_path"] = attributes_path;
    j["checksums"] = checksums;
    j["kcore_k"] = kcore_k;
    j["split_ratio"] = split_ratio;
    j["seed"] = seed;
    j["scenario"] = scenario;
    j["cold_start_max"] = cold_start_max;
    j["cold_start_truncate"] = cold_start_truncate;
    j["models"] = json::array();
    for (const auto& m : models) j["models"].push_back(config_to_json(m));
    j["prompt_kind"] = prompt_kind;
    j["llm_list_length"] = llm_list_length;
    j["llm_history_budget"] = llm_history_budget;
    j["llm_model_name"] = llm_model_name;
    j["llm_mode"] = llm_mode;
    j["transcript_dir"] = transcript_dir;
    j["match_threshold"] = match_threshold;
    j["cutoff"] = cutoff;
    j["head_fraction"] = head_fraction;
    j["tool_version"] = tool_version;
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed manifest: ") + e.what());
    }
    RunManifest m;
    m.dataset_id = j.value("dataset_id", "");
    m.interactions_path = j.value("interactions_path", "");
    m.format = j.value("format", m.format);
    m.attributes_path = j.value("attributes_path", "");
    if (j.contains("checksums"))
        m.checksums = j.at("checksums").get<std::map<std::string, std::string>>();
    m.kcore_k = j.value("kcore_k", m.kcore_k);
    m.split_ratio = j.value("split_ratio", m.split_ratio);
    m.seed = j.value("seed", m.seed);
    m.scenario = j.value("scenario", m.scenario);
    m.cold_start_max = j.value("cold_start_max", m.cold_start_max);
    m.cold_start_truncate = j.value("cold_start_truncate", m.cold_start_truncate);
    if (j.contains("models"))
        for (const auto& e : j.at("models")) m.models.push_back(config_from_json(e));
    m.prompt_kind = j.value("prompt_kind", m.prompt_kind);
    m.llm_list_length = j.value("llm_list_length", m.llm_list_length);
    m.llm_history_budget = j.value("llm_history_budget", m.llm_history_budget);
    m.llm_model_name = j.value("llm_model_name", "");
    m.llm_mode = j.value("llm_mode", m.llm_mode);
    m.transcript_dir = j.value("transcript_dir", "");
    m.match_threshold = j.value("match_threshold", m.match_threshold);
    m.cutoff = j.value("cutoff", m.cutoff);
    m.head_fraction = j.value("head_fraction", m.head_fraction);
    m.tool_version = j.value("tool_version", m.tool_version);
    return m;
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read manifest: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void RunManifest::save(const std::filesystem::path& path) const {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write manifest: " + path.string());
    out << to_json();
}

// ---------------------------------------------------------------------------
// Cold start
// ---------------------------------------------------------------------------

SplitPair cold_start_filter(const SplitPair& split, int max_interactions) {
    auto train_profiles = split.train.profiles();
    std::set<std::string> keep;
    for (const auto& [user, items] : train_profiles)
        if (static_cast<int>(items.size()) <= max_interactions) keep.insert(user);
    if (keep.empty())
        throw DataError("cold-start filter: zero qualifying users (max " +
                        std::to_string(max_interactions) + ")");

    auto restrict = [&](const InteractionLog& log) {
        std::vector<Interaction> kept;
        for (const auto& r : log.records())
            if (keep.count(r.user)) kept.push_back(r);
        return InteractionLog::from_records(kept);
    };
    SplitPair out;
    out.train = restrict(split.train);
    out.test = restrict(split.test);
    out.seed = split.seed;
    out.ratio = split.ratio;
    return out;
}

SplitPair cold_start_truncate(const SplitPair& split, int max_interactions, std::uint64_t seed) {
    if (max_interactions < 1) throw UsageError("cold-start truncation needs max >= 1");
    std::vector<Interaction> kept;
    for (const auto& [user, items] : split.train.profiles()) {
        std::vector<std::string> shuffled = items;
        std::mt19937_64 rng(mix_seed(seed, fnv1a("truncate:" + user)));
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        if (static_cast<int>(shuffled.size()) > max_interactions)
            shuffled.resize(static_cast<size_t>(max_interactions));
        std::set<std::string> chosen(shuffled.begin(), shuffled.end());
        for (const auto& r : split.train.records())
            if (r.user == user && chosen.count(r.item)) kept.push_back(r);
    }
    SplitPair out;
    out.train = InteractionLog::from_records(kept);
    out.test = split.test;
    out.seed = split.seed;
    out.ratio = split.ratio;
    return out;
}

// ---------------------------------------------------------------------------
// Pipeline stages
// ---------------------------------------------------------------------------

const std::vector<std::string>& metric_order() {
    static const std::vector<std::string> order = {"nDCG", "Recall", "Precision", "Gini",
                                                   "ItemCV", "EPC",   "EFD",       "APLT",
                                                   "ARP"};
    return order;
}

const std::vector<std::string>& per_user_metrics() {
    static const std::vector<std::string> order = {"nDCG", "Recall", "Precision", "EPC",
                                                   "EFD",  "APLT",   "ARP"};
    return order;
}

RelevanceJudgments judgments_from_log(const InteractionLog& test) {
    RelevanceJudgments out;
    for (const auto& r : test.records()) out[r.user].insert(r.item);
    return out;
}

PreparedData prepare(const RunManifest& manifest) {
    PreparedData data;
    std::filesystem::path ipath = manifest.interactions_path;
    InteractionLog raw = parse_interactions(ipath, dataset_format_from_string(manifest.format));
    data.checksums[ipath.filename().string()] = sha256_file(ipath);

    InteractionLog cored = apply_kcore(raw, manifest.kcore_k);
    if (cored.empty())
        throw DataError("k-core filtering with k=" + std::to_string(manifest.kcore_k) +
                        " removed every interaction");
    data.stats = dataset_stats(cored);
    data.split = split_holdout(cored, manifest.split_ratio, manifest.seed);

    if (manifest.scenario == "cold-start") {
        data.split = manifest.cold_start_truncate
                         ? cold_start_truncate(data.split, manifest.cold_start_max, manifest.seed)
                         : cold_start_filter(data.split, manifest.cold_start_max);
    } else if (manifest.scenario != "full") {
        throw UsageError("unknown scenario '" + manifest.scenario + "'");
    }

    if (!manifest.attributes_path.empty()) {
        std::filesystem::path apath = manifest.attributes_path;
        data.catalog = parse_attributes(apath);
        data.checksums[apath.filename().string()] = sha256_file(apath);
    }
    return data;
}

std::map<std::string, RankedList> baseline_lists(const ModelConfig& config,
                                                 const SparseInteractionMatrix& train,
                                                 const std::vector<std::string>& users, int n,
                                                 const ItemCatalog* catalog) {
    auto model = make_recommender(config, catalog);
    model->fit(train);
    std::map<std::string, RankedList> lists;
    for (const auto& user : users) {
        if (train.user_ordinal(user) < 0) continue;
        lists[user] = recommend_top_n(*model, train, user, n);
    }
    return lists;
}

LlmRunResult llm_lists(const RunManifest& manifest, const SparseInteractionMatrix& train,
                       const std::vector<std::string>& users, const ItemCatalog& catalog,
                       Transport transport) {
    if (manifest.transcript_dir.empty())
        throw UsageError("llm run requires a transcript directory");

    PromptTemplate tmpl;
    tmpl.kind = prompt_kind_from_string(manifest.prompt_kind);
    tmpl.list_length = manifest.llm_list_length;
    tmpl.history_char_budget = manifest.llm_history_budget;

    EndpointConfig endpoint = EndpointConfig::from_environment();
    ChatMode mode = chat_mode_from_string(manifest.llm_mode);
    ChatClient client(endpoint, TranscriptCache(manifest.transcript_dir), std::move(transport));

    std::map<std::string, long> popularity;
    for (int i = 0; i < train.n_items(); ++i)
        popularity[train.item_id(i)] = static_cast<long>(train.users_of(i).size());
    CatalogMatcher matcher(catalog, popularity);

    LlmRunResult result;
    for (const auto& user : users) {
        int u = train.user_ordinal(user);
        if (u < 0) continue;

        std::vector<std::string> history;
        for (int i : train.items_of(u)) {
            auto entry = catalog.entries.find(train.item_id(i));
            history.push_back(entry != catalog.entries.end() ? entry->second.name
                                                             : train.item_id(i));
        }
        RenderedPrompt prompt = render_prompt(tmpl, history);

        ChatRequest request;
        request.model = manifest.llm_model_name;
        request.temperature = 0.0;
        request.prompt = prompt.text;
        std::string response = client.complete(request, mode);

        RawRecommendationList raw = parse_recommendation_lines(response);
        raw.user_id = user;
        raw.transcript_key = replay_key(request);
        result.stats.raw_items += static_cast<int>(raw.items.size());
        result.stats.duplicate_raw_strings += raw.duplicate_count;
        if (raw.malformed) ++result.stats.malformed_responses;

        ResolvedList resolved = matcher.resolve_list(user, raw.items, manifest.match_threshold);
        result.stats.external_items += resolved.external_count;
        if (resolved.first_external_rank > 0)
            ++result.stats.first_external_rank_hist[resolved.first_external_rank];

        // ranked list: drop already-seen items, cut at the metric cutoff,
        // scores decay with resolved rank
        RankedList list;
        list.user_id = user;
        list.cutoff_origin = manifest.cutoff;
        int emitted = 0;
        for (size_t idx = 0; idx < resolved.item_ids.size(); ++idx) {
            if (emitted >= manifest.cutoff) break;
            const std::string& item = resolved.item_ids[idx];
            int ord = train.item_ordinal(item);
            if (ord >= 0 && train.has(u, ord)) continue;  // all-unrated-items protocol
            list.items.push_back({item, 1.0 / static_cast<double>(idx + 1)});
            ++emitted;
        }
        result.lists[user] = std::move(list);
        result.audits.emplace_back(user, std::move(resolved));
    }
    return result;
}

ModelReport evaluate_lists(const std::string& model_name, const std::string& config_hash,
                           const std::map<std::string, RankedList>& lists,
                           const RelevanceJudgments& judgments, const PopularityProfile& pop,
                           const std::vector<std::string>& catalog_items, int cutoff) {
    ModelReport report;
    report.model = model_name;
    report.config_hash = config_hash;
    for (const auto& name : per_user_metrics()) {
        report.vectors[name].metric = name;
        report.vectors[name].model = model_name;
    }

    std::vector<RankedList> evaluated;
    for (const auto& [user, list] : lists) {
        auto rel = judgments.find(user);
        if (rel == judgments.end() || rel->second.empty()) {
            ++report.excluded_users;
            continue;
        }
        evaluated.push_back(list);
        report.vectors["nDCG"].values[user] = ndcg_at_k(list, rel->second, cutoff);
        auto [precision, recall] = precision_recall_at_k(list, rel->second, cutoff);
        report.vectors["Precision"].values[user] = precision;
        report.vectors["Recall"].values[user] = recall;
        report.vectors["EPC"].values[user] = epc_at_k(list, rel->second, pop, cutoff);
        report.vectors["EFD"].values[user] = efd_at_k(list, rel->second, pop, cutoff);
        report.vectors["APLT"].values[user] = aplt_at_k(list, pop, cutoff);
        report.vectors["ARP"].values[user] = arp_at_k(list, pop, cutoff);
    }
    report.n_users = evaluated.size();
    for (const auto& name : per_user_metrics())
        report.aggregates[name] = report.vectors[name].mean();
    report.aggregates["ItemCV"] = static_cast<double>(item_coverage(evaluated, cutoff));
    report.aggregates["Gini"] =
        evaluated.empty() ? 0.0 : gini_evenness(evaluated, catalog_items, cutoff);
    return report;
}

EvaluationReport run_scenario(const RunManifest& manifest, Transport transport) {
    PreparedData data = prepare(manifest);
    SparseInteractionMatrix train = SparseInteractionMatrix::from_log(data.split.train);
    RelevanceJudgments judgments = judgments_from_log(data.split.test);

    std::vector<std::string> users;
    for (const auto& [user, rel] : judgments) users.push_back(user);

    PopularityProfile pop = PopularityProfile::from_matrix(train, manifest.head_fraction);
    std::vector<std::string> catalog_items = train.item_ids();

    EvaluationReport report;
    report.cutoff = manifest.cutoff;
    const ItemCatalog* catalog = data.catalog ? &*data.catalog : nullptr;

    for (const auto& config : manifest.models) {
        if (config.kind == "llm") {
            if (!catalog)
                throw UsageError("llm model requires an attribute/name catalog for prompts");
            LlmRunResult llm = llm_lists(manifest, train, users, *catalog, transport);
            std::string name = manifest.llm_model_name.empty() ? "LLM" : manifest.llm_model_name;
            ModelReport mr = evaluate_lists(name, config.config_hash(), llm.lists, judgments, pop,
                                            catalog_items, manifest.cutoff);
            mr.external = llm.stats;
            report.models.push_back(std::move(mr));
        } else {
            auto lists =
                baseline_lists(config, train, users, manifest.cutoff, catalog);
            report.models.push_back(evaluate_lists(config.display_name(), config.config_hash(),
                                                   lists, judgments, pop, catalog_items,
                                                   manifest.cutoff));
        }
    }

    for (size_t a = 0; a < report.models.size(); ++a) {
        for (size_t b = a + 1; b < report.models.size(); ++b) {
            const auto& ma = report.models[a];
            const auto& mb = report.models[b];
            for (const auto& metric : per_user_metrics()) {
                const auto& va = ma.vectors.at(metric);
                const auto& vb = mb.vectors.at(metric);
                if (va.values.size() < 2 || va.values.size() != vb.values.size()) continue;
                bool same_users = true;
                for (const auto& [user, v] : va.values)
                    if (!vb.values.count(user)) { same_users = false; break; }
                if (!same_users) continue;
                double p = paired_t_test(va, vb).p;
                report.significance[ma.model][mb.model][metric] = p;
            }
        }
    }
    return report;
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {

std::string format_metric(const std::string& metric, double value) {
    if (metric == "ItemCV") {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.0f", value);
        return buf;
    }
    return format_fixed(value, 4);
}

std::vector<const ModelReport*> ndcg_sorted(const EvaluationReport& report) {
    std::vector<const ModelReport*> order;
    for (const auto& m : report.models) order.push_back(&m);
    std::stable_sort(order.begin(), order.end(), [](const ModelReport* a, const ModelReport* b) {
        double na = a->aggregates.count("nDCG") ? a->aggregates.at("nDCG") : 0.0;
        double nb = b->aggregates.count("nDCG") ? b->aggregates.at("nDCG") : 0.0;
        return na < nb;
    });
    return order;
}

}  // namespace

void emit_report(const EvaluationReport& report, const std::string& format,
                 const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    auto order = ndcg_sorted(report);

    if (format == "csv") {
        std::ofstream metrics(out_dir / "metrics.csv", std::ios::trunc);
        metrics << "model,metric,aggregate,n_users\n";
        for (const ModelReport* m : order)
            for (const auto& metric : metric_order())
                metrics << m->model << ',' << metric << ','
                        << format_metric(metric, m->aggregates.at(metric)) << ',' << m->n_users
                        << '\n';

        std::ofstream per_user(out_dir / "per_user.csv", std::ios::trunc);
        per_user << "model,metric,user,value\n";
        for (const ModelReport* m : order)
            for (const auto& metric : per_user_metrics()) {
                const auto& vec = m->vectors.at(metric);
                for (const auto& [user, value] : vec.values)
                    per_user << m->model << ',' << metric << ',' << user << ','
                             << format_double(value) << '\n';
            }

        std::ofstream sig(out_dir / "significance.csv", std::ios::trunc);
        sig << "model_a,model_b,metric,p_value,significant\n";
        for (const auto& [a, row] : report.significance)
            for (const auto& [b, cells] : row)
                for (const auto& [metric, p] : cells)
                    sig << a << ',' << b << ',' << metric << ',' << format_fixed(p, 6) << ','
                        << (p < 0.05 ? "*" : "") << '\n';
        return;
    }
    if (format != "markdown") throw UsageError("unknown report format '" + format + "'");

    std::ofstream md(out_dir / "report.md", std::ios::trunc);
    md << "# Evaluation report (cutoff " << report.cutoff << ")\n\n";
    md << "Accuracy: nDCG, Recall, Precision — Diversity: Gini, ItemCV — Novelty: EPC, EFD — "
          "Popularity Bias: APLT, ARP\n\n";
    md << "| Model |";
    for (const auto& metric : metric_order()) md << ' ' << metric << " |";
    md << "\n|---|";
    for (size_t i = 0; i < metric_order().size(); ++i) md << "---|";
    md << '\n';
    for (const ModelReport* m : order) {
        md << "| " << m->model << " |";
        for (const auto& metric : metric_order())
            md << ' ' << format_metric(metric, m->aggregates.at(metric)) << " |";
        md << '\n';
    }
    md << '\n';

    if (!report.significance.empty()) {
        md << "## Paired t-tests (p-values; * marks p < 0.05)\n\n";
        md << "| Model A | Model B | Metric | p |\n|---|---|---|---|\n";
        for (const auto& [a, row] : report.significance)
            for (const auto& [b, cells] : row)
                for (const auto& [metric, p] : cells)
                    md << "| " << a << " | " << b << " | " << metric << " | "
                       << format_fixed(p, 4) << (p < 0.05 ? "*" : "") << " |\n";
        md << '\n';
    }

    bool any_external = false;
    for (const auto& m : report.models) any_external |= m.external.has_value();
    if (any_external) {
        md << "## External items\n\n";
        md << "| Model | Raw items | External | Duplicates | Malformed | First-external ranks "
              "|\n|---|---|---|---|---|---|\n";
        for (const ModelReport* m : order) {
            if (!m->external) continue;
            const auto& e = *m->external;
            std::ostringstream ranks;
            for (const auto& [rank, n] : e.first_external_rank_hist)
                ranks << rank << "x" << n << ' ';
            md << "| " << m->model << " | " << e.raw_items << " | " << e.external_items << " | "
               << e.duplicate_raw_strings << " | " << e.malformed_responses << " | "
               << (ranks.str().empty() ? "-" : trim(ranks.str())) << " |\n";
        }
    }
}

std::string report_to_json(const EvaluationReport& report) {
    json j;
    j["cutoff"] = report.cutoff;
    j["models"] = json::array();
    for (const auto& m : report.models) {
        json jm;
        jm["model"] = m.model;
        jm["config_hash"] = m.config_hash;
        jm["n_users"] = m.n_users;
        jm["excluded_users"] = m.excluded_users;
        jm["aggregates"] = m.aggregates;
        json vectors;
        for (const auto& [metric, vec] : m.vectors) vectors[metric] = vec.values;
        jm["vectors"] = vectors;
        if (m.external) {
            json e;
            e["raw_items"] = m.external->raw_items;
            e["external_items"] = m.external->external_items;
            e["duplicate_raw_strings"] = m.external->duplicate_raw_strings;
            e["malformed_responses"] = m.external->malformed_responses;
            json hist = json::object();
            for (const auto& [rank, n] : m.external->first_external_rank_hist)
                hist[std::to_string(rank)] = n;
            e["first_external_rank_hist"] = hist;
            jm["external"] = e;
        }
        j["models"].push_back(std::move(jm));
    }
    j["significance"] = report.significance;
    return j.dump(2) + "\n";
}

EvaluationReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed report json: ") + e.what());
    }
    EvaluationReport report;
    report.cutoff = j.value("cutoff", 10);
    for (const auto& jm : j.at("models")) {
        ModelReport m;
        m.model = jm.at("model").get<std::string>();
        m.config_hash = jm.value("config_hash", "");
        m.n_users = jm.value("n_users", 0u);
        m.excluded_users = jm.value("excluded_users", 0u);
        m.aggregates = jm.at("aggregates").get<std::map<std::string, double>>();
        if (jm.contains("vectors"))
            for (const auto& [metric, values] : jm.at("vectors").items()) {
                MetricVector vec;
                vec.metric = metric;
                vec.model = m.model;
                vec.values = values.get<std::map<std::string, double>>();
                m.vectors[metric] = std::move(vec);
            }
        if (jm.contains("external")) {
            ExternalStats e;
            const auto& je = jm.at("external");
            e.raw_items = je.value("raw_items", 0);
            e.external_items = je.value("external_items", 0);
            e.duplicate_raw_strings = je.value("duplicate_raw_strings", 0);
            e.malformed_responses = je.value("malformed_responses", 0);
            if (je.contains("first_external_rank_hist"))
                for (const auto& [rank, n] : je.at("first_external_rank_hist").items())
                    e.first_external_rank_hist[std::stoi(rank)] = n.get<int>();
            m.external = e;
        }
        report.models.push_back(std::move(m));
    }
    if (j.contains("significance"))
        report.significance =
            j.at("significance")
                .get<std::map<std::string,
                              std::map<std::string, std::map<std::string, double>>>>();
    return report;
}

// ---------------------------------------------------------------------------
// Stage artifacts
// ---------------------------------------------------------------------------

void write_ranked_lists(const std::map<std::string, RankedList>& lists,
                        const std::string& model_name, const std::string& config_hash,
                        const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write lists: " + path.string());
    out << "# model=" << model_name << " config=" << config_hash << '\n';
    for (const auto& [user, list] : lists) {
        int rank = 0;
        for (const auto& item : list.items)
            out << user << '\t' << ++rank << '\t' << item.item_id << '\t'
                << format_double(item.score) << '\n';
    }
}

std::map<std::string, RankedList> read_ranked_lists(const std::filesystem::path& path,
                                                    std::string* model_name,
                                                    std::string* config_hash) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read lists: " + path.string());
    std::map<std::string, RankedList> lists;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            auto model_pos = line.find("model=");
            auto config_pos = line.find(" config=");
            if (model_name && model_pos != std::string::npos && config_pos != std::string::npos)
                *model_name = line.substr(model_pos + 6, config_pos - model_pos - 6);
            if (config_hash && config_pos != std::string::npos)
                *config_hash = line.substr(config_pos + 8);
            continue;
        }
        auto fields = split_tabs(line);
        if (fields.size() != 4)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 4 fields (user rank item score)");
        RankedList& list = lists[fields[0]];
        list.user_id = fields[0];
        list.items.push_back({fields[2], std::strtod(fields[3].c_str(), nullptr)});
        list.cutoff_origin = std::max(list.cutoff_origin, std::stoi(fields[1]));
    }
    return lists;
}

void write_resolution_audit(const std::vector<std::pair<std::string, ResolvedList>>& audits,
                            const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write audit: " + path.string());
    out << "user_id\traw_rank\traw_string\toutcome\titem_id\tsimilarity\n";
    for (const auto& [user, resolved] : audits) {
        for (const auto& m : resolved.audit) {
            out << user << '\t' << m.rank << '\t' << m.raw << '\t'
                << (m.matched ? "matched" : "external") << '\t'
                << (m.matched ? m.item_id : std::string("-")) << '\t'
                << (m.matched ? format_double(m.similarity) : std::string("-")) << '\n';
        }
    }
}

}  // namespace receval
