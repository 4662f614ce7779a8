#include "receval/recommenders.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "receval/metrics.hpp"

namespace receval {

void ModelConfig::validate() const {
    if (neighborhood_k < 1) throw UsageError(kind + ": neighborhood size must be >= 1");
    if (alpha < 0.0) throw UsageError(kind + ": alpha must be >= 0");
    if (beta < 0.0) throw UsageError(kind + ": beta must be >= 0");
    if (lambda <= 0.0) throw UsageError(kind + ": lambda must be > 0");
    if (latent_dim < 1) throw UsageError(kind + ": latent dim must be >= 1");
    if (learning_rate <= 0.0) throw UsageError(kind + ": learning rate must be > 0");
    if (epochs < 1) throw UsageError(kind + ": epochs must be >= 1");
    if (negatives < 0) throw UsageError(kind + ": negatives must be >= 0");
}

std::string ModelConfig::display_name() const {
    if (kind == "random") return "Random";
    if (kind == "mostpop") return "MostPop";
    if (kind == "itemknn") return "ItemKNN";
    if (kind == "userknn") return "UserKNN";
    if (kind == "attr-itemknn") return "AttributeItemKNN";
    if (kind == "attr-userknn") return "AttributeUserKNN";
    if (kind == "vsm") return "VSM";
    if (kind == "rp3beta") return "RP3beta";
    if (kind == "ease") return "EASE-R";
    if (kind == "mf2020") return "MF2020";
    return kind;
}

std::string ModelConfig::config_hash() const {
    std::ostringstream canon;
    canon << kind << '|' << neighborhood_k << '|' << format_double(alpha) << '|'
          << format_double(beta) << '|' << format_double(lambda) << '|' << latent_dim << '|'
          << format_double(learning_rate) << '|' << epochs << '|' << negatives << '|' << seed;
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a(canon.str())));
    return buf;
}

// ---------------------------------------------------------------------------
// Top-N selection
// ---------------------------------------------------------------------------

RankedList recommend_top_n(const Recommender& model, const SparseInteractionMatrix& train,
                           const std::string& user_id, int n) {
    if (!model.fitted()) throw DataError("model '" + model.name() + "' is not fitted");
    int u = train.user_ordinal(user_id);
    if (u < 0) throw DataError("unknown user '" + user_id + "'");
    if (n < 1) throw UsageError("top-n cutoff must be >= 1");

    std::vector<double> scores = model.score_user(u);
    auto seen = train.items_of(u);

    std::vector<int> candidates;
    candidates.reserve(static_cast<size_t>(train.n_items()));
    for (int i = 0; i < train.n_items(); ++i)
        if (!std::binary_search(seen.begin(), seen.end(), i)) candidates.push_back(i);

    // item ordinals follow ascending item id, so ordinal order is the tie rule
    std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
        return scores[static_cast<size_t>(a)] > scores[static_cast<size_t>(b)];
    });
    if (static_cast<int>(candidates.size()) > n) candidates.resize(static_cast<size_t>(n));

    RankedList out;
    out.user_id = user_id;
    out.cutoff_origin = n;
    out.items.reserve(candidates.size());
    for (int i : candidates) out.items.push_back({train.item_id(i), scores[static_cast<size_t>(i)]});
    return out;
}

// ---------------------------------------------------------------------------
// Non-personalized baselines
// ---------------------------------------------------------------------------

namespace {

class MostPopRecommender final : public Recommender {
public:
    std::string name() const override { return "MostPop"; }
    void fit(const SparseInteractionMatrix& train) override {
        counts_.assign(static_cast<size_t>(train.n_items()), 0.0);
        for (int i = 0; i < train.n_items(); ++i)
            counts_[static_cast<size_t>(i)] = static_cast<double>(train.users_of(i).size());
        fitted_ = true;
    }
    std::vector<double> score_user(int) const override { return counts_; }

private:
    std::vector<double> counts_;
};

class RandomRecommender final : public Recommender {
public:
    explicit RandomRecommender(std::uint64_t seed) : seed_(seed) {}
    std::string name() const override { return "Random"; }
    void fit(const SparseInteractionMatrix& train) override {
        user_ids_ = train.user_ids();
        n_items_ = train.n_items();
        fitted_ = true;
    }
    std::vector<double> score_user(int u) const override {
        // fresh per-user stream: deterministic for (seed, user) regardless of
        // evaluation order
        std::mt19937_64 rng(mix_seed(seed_, fnv1a(user_ids_[static_cast<size_t>(u)])));
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::vector<double> scores(static_cast<size_t>(n_items_));
        for (auto& s : scores) s = unit(rng);
        return scores;
    }

private:
    std::uint64_t seed_;
    std::vector<std::string> user_ids_;
    int n_items_ = 0;
};

}  // namespace

RankedList most_popular_ranking(const SparseInteractionMatrix& train, const std::string& user_id,
                                int n) {
    MostPopRecommender model;
    model.fit(train);
    return recommend_top_n(model, train, user_id, n);
}

RankedList random_ranking(const SparseInteractionMatrix& train, const std::string& user_id, int n,
                          std::uint64_t seed) {
    RandomRecommender model(seed);
    model.fit(train);
    return recommend_top_n(model, train, user_id, n);
}

// ---------------------------------------------------------------------------
// Cosine similarities
// ---------------------------------------------------------------------------

double cosine_binary(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.empty() || b.empty()) return 0.0;
    size_t ia = 0, ib = 0, shared = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] == b[ib]) { ++shared; ++ia; ++ib; }
        else if (a[ia] < b[ib]) ++ia;
        else ++ib;
    }
    return static_cast<double>(shared) /
           (std::sqrt(static_cast<double>(a.size())) * std::sqrt(static_cast<double>(b.size())));
}

std::vector<std::pair<int, double>> knn_similarity(const std::vector<std::vector<int>>& vectors,
                                                   int target, int k) {
    if (target < 0 || target >= static_cast<int>(vectors.size()))
        throw DataError("knn_similarity: target ordinal out of range");
    if (k < 1) throw UsageError("knn_similarity: k must be >= 1");

    std::vector<std::pair<int, double>> sims;
    sims.reserve(vectors.size());
    for (int j = 0; j < static_cast<int>(vectors.size()); ++j) {
        if (j == target) continue;
        sims.emplace_back(j, cosine_binary(vectors[static_cast<size_t>(target)],
                                           vectors[static_cast<size_t>(j)]));
    }
    std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    if (static_cast<int>(sims.size()) > k) sims.resize(static_cast<size_t>(k));
    return sims;
}

namespace {

// Top-k neighbor selection shared by the collaborative KNN models. Produces
// co-occurrence cosines for every row of `of` against itself.
std::vector<std::vector<std::pair<int, double>>> topk_binary_neighbors(
    const std::vector<std::vector<int>>& rows, const std::vector<std::vector<int>>& inverted,
    int k) {
    const int n = static_cast<int>(rows.size());
    std::vector<std::vector<std::pair<int, double>>> topk(static_cast<size_t>(n));
    std::vector<int> co(static_cast<size_t>(n), 0);
    std::vector<int> touched;
    for (int i = 0; i < n; ++i) {
        touched.clear();
        for (int x : rows[static_cast<size_t>(i)]) {
            for (int j : inverted[static_cast<size_t>(x)]) {
                if (co[static_cast<size_t>(j)] == 0) touched.push_back(j);
                ++co[static_cast<size_t>(j)];
            }
        }
        std::vector<std::pair<int, double>> sims;
        sims.reserve(touched.size());
        double norm_i = std::sqrt(static_cast<double>(rows[static_cast<size_t>(i)].size()));
        for (int j : touched) {
            if (j != i && norm_i > 0.0) {
                double norm_j = std::sqrt(static_cast<double>(rows[static_cast<size_t>(j)].size()));
                sims.emplace_back(j, static_cast<double>(co[static_cast<size_t>(j)]) /
                                         (norm_i * norm_j));
            }
            co[static_cast<size_t>(j)] = 0;
        }
        std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (static_cast<int>(sims.size()) > k) sims.resize(static_cast<size_t>(k));
        topk[static_cast<size_t>(i)] = std::move(sims);
    }
    return topk;
}

std::vector<std::vector<int>> copy_rows(const SparseInteractionMatrix& m, bool items) {
    std::vector<std::vector<int>> rows;
    if (items) {
        rows.resize(static_cast<size_t>(m.n_items()));
        for (int i = 0; i < m.n_items(); ++i)
            rows[static_cast<size_t>(i)].assign(m.users_of(i).begin(), m.users_of(i).end());
    } else {
        rows.resize(static_cast<size_t>(m.n_users()));
        for (int u = 0; u < m.n_users(); ++u)
            rows[static_cast<size_t>(u)].assign(m.items_of(u).begin(), m.items_of(u).end());
    }
    return rows;
}

class ItemKnnRecommender final : public Recommender {
public:
    explicit ItemKnnRecommender(int k) : k_(k) {}
    std::string name() const override { return "ItemKNN"; }

    void fit(const SparseInteractionMatrix& train) override {
        auto item_rows = copy_rows(train, true);
        auto user_rows = copy_rows(train, false);
        auto topk = topk_binary_neighbors(item_rows, user_rows, k_);
        // reverse index: contributions of profile item j to target scores
        reverse_.assign(item_rows.size(), {});
        for (int i = 0; i < static_cast<int>(topk.size()); ++i)
            for (const auto& [j, sim] : topk[static_cast<size_t>(i)])
                if (sim > 0.0) reverse_[static_cast<size_t>(j)].emplace_back(i, sim);
        profiles_ = std::move(user_rows);
        n_items_ = static_cast<int>(item_rows.size());
        fitted_ = true;
    }

    std::vector<double> score_user(int u) const override {
        std::vector<double> scores(static_cast<size_t>(n_items_), 0.0);
        for (int j : profiles_[static_cast<size_t>(u)])
            for (const auto& [i, sim] : reverse_[static_cast<size_t>(j)])
                scores[static_cast<size_t>(i)] += sim;
        return scores;
    }

private:
    int k_;
    int n_items_ = 0;
    std::vector<std::vector<std::pair<int, double>>> reverse_;
    std::vector<std::vector<int>> profiles_;
};

class UserKnnRecommender final : public Recommender {
public:
    explicit UserKnnRecommender(int k) : k_(k) {}
    std::string name() const override { return "UserKNN"; }

    void fit(const SparseInteractionMatrix& train) override {
        auto user_rows = copy_rows(train, false);
        auto item_rows = copy_rows(train, true);
        topk_ = topk_binary_neighbors(user_rows, item_rows, k_);
        profiles_ = std::move(user_rows);
        n_items_ = train.n_items();
        fitted_ = true;
    }

    std::vector<double> score_user(int u) const override {
        std::vector<double> scores(static_cast<size_t>(n_items_), 0.0);
        for (const auto& [v, sim] : topk_[static_cast<size_t>(u)])
            for (int i : profiles_[static_cast<size_t>(v)])
                scores[static_cast<size_t>(i)] += sim;
        return scores;
    }

private:
    int k_;
    int n_items_ = 0;
    std::vector<std::vector<std::pair<int, double>>> topk_;
    std::vector<std::vector<int>> profiles_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Content features
// ---------------------------------------------------------------------------

TfIdfModel tfidf_vectors(const ItemCatalog& catalog, const std::vector<std::string>& items) {
    TfIdfModel model;
    const double n = static_cast<double>(items.size());

    std::map<std::string, int> df;  // "kind:value" -> document frequency
    for (const auto& item : items) {
        auto it = catalog.entries.find(item);
        if (it == catalog.entries.end())
            throw DataError("tfidf: item '" + item + "' missing from catalog");
        for (const auto& [kind, values] : it->second.attributes)
            for (const auto& v : values) ++df[kind + ":" + v];
    }
    std::map<std::string, int> attr_ord;
    for (const auto& [attr, count] : df) {
        attr_ord[attr] = static_cast<int>(model.attribute_names.size());
        model.attribute_names.push_back(attr);
    }

    for (const auto& item : items) {
        const auto& entry = catalog.entries.at(item);
        std::vector<std::pair<int, double>> vec;
        for (const auto& [kind, values] : entry.attributes)
            for (const auto& v : values) {
                const std::string attr = kind + ":" + v;
                double idf = std::log(n / static_cast<double>(df.at(attr)));
                vec.emplace_back(attr_ord.at(attr), idf);
            }
        std::sort(vec.begin(), vec.end());
        if (vec.empty()) model.zero_vector_items.push_back(item);
        model.vectors[item] = std::move(vec);
    }
    return model;
}

double cosine_sparse(const std::vector<std::pair<int, double>>& a,
                     const std::vector<std::pair<int, double>>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [idx, w] : a) na += w * w;
    for (const auto& [idx, w] : b) nb += w * w;
    if (na == 0.0 || nb == 0.0) return 0.0;
    size_t ia = 0, ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia].first == b[ib].first) { dot += a[ia].second * b[ib].second; ++ia; ++ib; }
        else if (a[ia].first < b[ib].first) ++ia;
        else ++ib;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

namespace {

using SparseVec = std::vector<std::pair<int, double>>;

SparseVec add_sparse(const SparseVec& a, const SparseVec& b) {
    SparseVec out;
    out.reserve(a.size() + b.size());
    size_t ia = 0, ib = 0;
    while (ia < a.size() || ib < b.size()) {
        if (ib == b.size() || (ia < a.size() && a[ia].first < b[ib].first))
            out.push_back(a[ia++]);
        else if (ia == a.size() || b[ib].first < a[ia].first)
            out.push_back(b[ib++]);
        else {
            out.emplace_back(a[ia].first, a[ia].second + b[ib].second);
            ++ia; ++ib;
        }
    }
    return out;
}

// Sparse vectors per train item, indexed by item ordinal.
std::vector<SparseVec> item_feature_vectors(const SparseInteractionMatrix& train,
                                            const ItemCatalog& catalog) {
    TfIdfModel tfidf = tfidf_vectors(catalog, train.item_ids());
    std::vector<SparseVec> vecs(static_cast<size_t>(train.n_items()));
    for (int i = 0; i < train.n_items(); ++i)
        vecs[static_cast<size_t>(i)] = tfidf.vectors.at(train.item_id(i));
    return vecs;
}

std::vector<SparseVec> user_profile_vectors(const SparseInteractionMatrix& train,
                                            const std::vector<SparseVec>& item_vecs) {
    std::vector<SparseVec> out(static_cast<size_t>(train.n_users()));
    for (int u = 0; u < train.n_users(); ++u) {
        SparseVec acc;
        for (int i : train.items_of(u)) acc = add_sparse(acc, item_vecs[static_cast<size_t>(i)]);
        out[static_cast<size_t>(u)] = std::move(acc);
    }
    return out;
}

// Top-k cosine neighbors among weighted sparse vectors, via an inverted index.
std::vector<std::vector<std::pair<int, double>>> topk_sparse_neighbors(
    const std::vector<SparseVec>& vecs, int k) {
    const int n = static_cast<int>(vecs.size());
    int max_attr = -1;
    for (const auto& v : vecs)
        for (const auto& [a, w] : v) max_attr = std::max(max_attr, a);
    std::vector<std::vector<std::pair<int, double>>> inverted(static_cast<size_t>(max_attr + 1));
    for (int i = 0; i < n; ++i)
        for (const auto& [a, w] : vecs[static_cast<size_t>(i)])
            inverted[static_cast<size_t>(a)].emplace_back(i, w);

    std::vector<double> norms(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (const auto& [a, w] : vecs[static_cast<size_t>(i)]) s += w * w;
        norms[static_cast<size_t>(i)] = std::sqrt(s);
    }

    std::vector<std::vector<std::pair<int, double>>> topk(static_cast<size_t>(n));
    std::vector<double> dot(static_cast<size_t>(n), 0.0);
    std::vector<int> touched;
    for (int i = 0; i < n; ++i) {
        touched.clear();
        for (const auto& [a, w] : vecs[static_cast<size_t>(i)]) {
            for (const auto& [j, wj] : inverted[static_cast<size_t>(a)]) {
                if (dot[static_cast<size_t>(j)] == 0.0) touched.push_back(j);
                dot[static_cast<size_t>(j)] += w * wj;
            }
        }
        std::vector<std::pair<int, double>> sims;
        sims.reserve(touched.size());
        for (int j : touched) {
            double d = dot[static_cast<size_t>(j)];
            dot[static_cast<size_t>(j)] = 0.0;
            if (j == i || d == 0.0) continue;
            double denom = norms[static_cast<size_t>(i)] * norms[static_cast<size_t>(j)];
            if (denom > 0.0) sims.emplace_back(j, d / denom);
        }
        std::sort(sims.begin(), sims.end(), [](const auto& a, const auto& b) {
            if (a.second != b.second) return a.second > b.second;
            return a.first < b.first;
        });
        if (static_cast<int>(sims.size()) > k) sims.resize(static_cast<size_t>(k));
        topk[static_cast<size_t>(i)] = std::move(sims);
    }
    return topk;
}

class AttributeItemKnnRecommender final : public Recommender {
public:
    AttributeItemKnnRecommender(int k, const ItemCatalog& catalog) : k_(k), catalog_(&catalog) {}
    std::string name() const override { return "AttributeItemKNN"; }

    void fit(const SparseInteractionMatrix& train) override {
        auto item_vecs = item_feature_vectors(train, *catalog_);
        auto topk = topk_sparse_neighbors(item_vecs, k_);
        reverse_.assign(item_vecs.size(), {});
        for (int i = 0; i < static_cast<int>(topk.size()); ++i)
            for (const auto& [j, sim] : topk[static_cast<size_t>(i)])
                if (sim > 0.0) reverse_[static_cast<size_t>(j)].emplace_back(i, sim);
        profiles_ = copy_rows(train, false);
        n_items_ = train.n_items();
        fitted_ = true;
    }

    std::vector<double> score_user(int u) const override {
        std::vector<double> scores(static_cast<size_t>(n_items_), 0.0);
        for (int j : profiles_[static_cast<size_t>(u)])
            for (const auto& [i, sim] : reverse_[static_cast<size_t>(j)])
                scores[static_cast<size_t>(i)] += sim;
        return scores;
    }

private:
    int k_;
    const ItemCatalog* catalog_;
    int n_items_ = 0;
    std::vector<std::vector<std::pair<int, double>>> reverse_;
    std::vector<std::vector<int>> profiles_;
};

class AttributeUserKnnRecommender final : public Recommender {
public:
    AttributeUserKnnRecommender(int k, const ItemCatalog& catalog) : k_(k), catalog_(&catalog) {}
    std::string name() const override { return "AttributeUserKNN"; }

    void fit(const SparseInteractionMatrix& train) override {
        auto item_vecs = item_feature_vectors(train, *catalog_);
        auto user_vecs = user_profile_vectors(train, item_vecs);
        topk_ = topk_sparse_neighbors(user_vecs, k_);
        profiles_ = copy_rows(train, false);
        n_items_ = train.n_items();
        fitted_ = true;
    }

    std::vector<double> score_user(int u) const override {
        std::vector<double> scores(static_cast<size_t>(n_items_), 0.0);
        for (const auto& [v, sim] : topk_[static_cast<size_t>(u)])
            for (int i : profiles_[static_cast<size_t>(v)])
                scores[static_cast<size_t>(i)] += sim;
        return scores;
    }

private:
    int k_;
    const ItemCatalog* catalog_;
    int n_items_ = 0;
    std::vector<std::vector<std::pair<int, double>>> topk_;
    std::vector<std::vector<int>> profiles_;
};

class VsmRecommender final : public Recommender {
public:
    explicit VsmRecommender(const ItemCatalog& catalog) : catalog_(&catalog) {}
    std::string name() const override { return "VSM"; }

    void fit(const SparseInteractionMatrix& train) override {
        item_vecs_ = item_feature_vectors(train, *catalog_);
        profile_vecs_ = user_profile_vectors(train, item_vecs_);
        fitted_ = true;
    }

    std::vector<double> score_user(int u) const override {
        const auto& profile = profile_vecs_[static_cast<size_t>(u)];
        std::vector<double> scores(item_vecs_.size(), 0.0);
        for (size_t i = 0; i < item_vecs_.size(); ++i)
            scores[i] = cosine_sparse(profile, item_vecs_[i]);
        return scores;
    }

private:
    const ItemCatalog* catalog_;
    std::vector<SparseVec> item_vecs_;
    std::vector<SparseVec> profile_vecs_;
};

}  // namespace

// ---------------------------------------------------------------------------
// RP3beta
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> fit_rp3beta_weights(const SparseInteractionMatrix& train,
                                                     double alpha, double beta) {
    const int n_items = train.n_items();
    std::vector<std::vector<double>> walk(static_cast<size_t>(n_items),
                                          std::vector<double>(static_cast<size_t>(n_items), 0.0));

    // W[i][j] = sum_u P(u|i)^alpha * P(j|u)^alpha over u in users(i)
    for (int i = 0; i < n_items; ++i) {
        auto users = train.users_of(i);
        if (users.empty()) continue;
        double p_iu = std::pow(1.0 / static_cast<double>(users.size()), alpha);
        auto& row = walk[static_cast<size_t>(i)];
        for (int u : users) {
            auto items = train.items_of(u);
            double w = p_iu * std::pow(1.0 / static_cast<double>(items.size()), alpha);
            for (int j : items) row[static_cast<size_t>(j)] += w;
        }
    }
    if (beta > 0.0) {
        std::vector<double> penalty(static_cast<size_t>(n_items), 1.0);
        for (int j = 0; j < n_items; ++j) {
            double popj = static_cast<double>(train.users_of(j).size());
            penalty[static_cast<size_t>(j)] = popj > 0.0 ? std::pow(popj, beta) : 1.0;
        }
        for (auto& row : walk)
            for (int j = 0; j < n_items; ++j) row[static_cast<size_t>(j)] /= penalty[static_cast<size_t>(j)];
    }
    return walk;
}

// ---------------------------------------------------------------------------
// EASE
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> fit_ease_weights(const SparseInteractionMatrix& train,
                                                  double lambda) {
    if (lambda <= 0.0) throw UsageError("ease: lambda must be > 0");
    const int n = train.n_items();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
    for (int u = 0; u < train.n_users(); ++u) {
        auto items = train.items_of(u);
        for (size_t a = 0; a < items.size(); ++a)
            for (size_t b = 0; b < items.size(); ++b) gram(items[a], items[b]) += 1.0;
    }
    gram.diagonal().array() += lambda;
    Eigen::MatrixXd p = gram.llt().solve(Eigen::MatrixXd::Identity(n, n));
    std::vector<std::vector<double>> weights(static_cast<size_t>(n),
                                             std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int j = 0; j < n; ++j) {
        double pj = p(j, j);
        for (int i = 0; i < n; ++i)
            weights[static_cast<size_t>(i)][static_cast<size_t>(j)] = i == j ? 0.0 : -p(i, j) / pj;
    }
    return weights;
}

namespace {

class Rp3BetaRecommender final : public Recommender {
public:
    Rp3BetaRecommender(double alpha, double beta) : alpha_(alpha), beta_(beta) {}
    std::string name() const override { return "RP3beta"; }

    void fit(const SparseInteractionMatrix& train) override {
        walk_ = fit_rp3beta_weights(train, alpha_, beta_);
        profiles_ = copy_rows(train, false);
        n_items_ = train.n_items();
        fitted_ = true;
    }

    std::vector<double> score_user(int u) const override {
        std::vector<double> scores(static_cast<size_t>(n_items_), 0.0);
        for (int i : profiles_[static_cast<size_t>(u)]) {
            const auto& row = walk_[static_cast<size_t>(i)];
            for (int j = 0; j < n_items_; ++j) scores[static_cast<size_t>(j)] += row[static_cast<size_t>(j)];
        }
        return scores;
    }

private:
    double alpha_, beta_;
    int n_items_ = 0;
    std::vector<std::vector<double>> walk_;
    std::vector<std::vector<int>> profiles_;
};

class EaseRecommender final : public Recommender {
public:
    explicit EaseRecommender(double lambda) : lambda_(lambda) {}
    std::string name() const override { return "EASE-R"; }

    void fit(const SparseInteractionMatrix& train) override {
        weights_ = fit_ease_weights(train, lambda_);
        profiles_ = copy_rows(train, false);
        n_items_ = train.n_items();
        fitted_ = true;
    }

    std::vector<double> score_user(int u) const override {
        std::vector<double> scores(static_cast<size_t>(n_items_), 0.0);
        for (int j : profiles_[static_cast<size_t>(u)]) {
            const auto& row = weights_[static_cast<size_t>(j)];
            for (int i = 0; i < n_items_; ++i) scores[static_cast<size_t>(i)] += row[static_cast<size_t>(i)];
        }
        return scores;
    }

private:
    double lambda_;
    int n_items_ = 0;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<int>> profiles_;
};

// ---------------------------------------------------------------------------
// MF2020: biased logistic matrix factorization with sampled negatives
// ---------------------------------------------------------------------------

class MfRecommender final : public Recommender {
public:
    explicit MfRecommender(const ModelConfig& cfg) : cfg_(cfg) {}
    std::string name() const override { return "MF2020"; }

    void fit(const SparseInteractionMatrix& train) override {
        const int n_users = train.n_users();
        const int n_items = train.n_items();
        const int d = cfg_.latent_dim;
        std::mt19937_64 rng(cfg_.seed);
        std::normal_distribution<double> init(0.0, 0.1);

        user_f_.assign(static_cast<size_t>(n_users) * d, 0.0);
        item_f_.assign(static_cast<size_t>(n_items) * d, 0.0);
        user_b_.assign(static_cast<size_t>(n_users), 0.0);
        item_b_.assign(static_cast<size_t>(n_items), 0.0);
        global_b_ = 0.0;
        for (auto& v : user_f_) v = init(rng);
        for (auto& v : item_f_) v = init(rng);

        std::uniform_int_distribution<int> item_dist(0, n_items - 1);
        const double lr = cfg_.learning_rate;
        for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
            double loss = 0.0;
            for (int u = 0; u < n_users; ++u) {
                auto seen = train.items_of(u);
                for (int i : seen) {
                    loss += sgd_step(u, i, 1.0, lr, d);
                    int drawn = 0;
                    for (int attempt = 0; attempt < 100 * cfg_.negatives && drawn < cfg_.negatives;
                         ++attempt) {
                        int j = item_dist(rng);
                        if (std::binary_search(seen.begin(), seen.end(), j)) continue;
                        loss += sgd_step(u, j, 0.0, lr, d);
                        ++drawn;
                    }
                }
            }
            if (!std::isfinite(loss))
                throw DataError("mf2020: training diverged (non-finite loss at epoch " +
                                std::to_string(epoch) + ")");
        }
        n_items_ = n_items;
        dim_ = d;
        fitted_ = true;
    }

    std::vector<double> score_user(int u) const override {
        std::vector<double> scores(static_cast<size_t>(n_items_));
        const double* pu = &user_f_[static_cast<size_t>(u) * dim_];
        for (int i = 0; i < n_items_; ++i) {
            const double* qi = &item_f_[static_cast<size_t>(i) * dim_];
            double dot = 0.0;
            for (int f = 0; f < dim_; ++f) dot += pu[f] * qi[f];
            scores[static_cast<size_t>(i)] =
                global_b_ + user_b_[static_cast<size_t>(u)] + item_b_[static_cast<size_t>(i)] + dot;
        }
        return scores;
    }

    double raw_score(int u, int i) const {
        const double* pu = &user_f_[static_cast<size_t>(u) * dim_];
        const double* qi = &item_f_[static_cast<size_t>(i) * dim_];
        double dot = 0.0;
        for (int f = 0; f < dim_; ++f) dot += pu[f] * qi[f];
        return global_b_ + user_b_[static_cast<size_t>(u)] + item_b_[static_cast<size_t>(i)] + dot;
    }

private:
    double sgd_step(int u, int i, double label, double lr, int d) {
        double* pu = &user_f_[static_cast<size_t>(u) * d];
        double* qi = &item_f_[static_cast<size_t>(i) * d];
        double x = global_b_ + user_b_[static_cast<size_t>(u)] + item_b_[static_cast<size_t>(i)];
        for (int f = 0; f < d; ++f) x += pu[f] * qi[f];
        double sig = 1.0 / (1.0 + std::exp(-x));
        double err = sig - label;  // d(loss)/dx for logistic loss
        global_b_ -= lr * err;
        user_b_[static_cast<size_t>(u)] -= lr * err;
        item_b_[static_cast<size_t>(i)] -= lr * err;
        for (int f = 0; f < d; ++f) {
            double puf = pu[f];
            pu[f] -= lr * err * qi[f];
            qi[f] -= lr * err * puf;
        }
        return label > 0.5 ? -std::log(std::max(sig, 1e-15))
                           : -std::log(std::max(1.0 - sig, 1e-15));
    }

    ModelConfig cfg_;
    int n_items_ = 0, dim_ = 0;
    std::vector<double> user_f_, item_f_, user_b_, item_b_;
    double global_b_ = 0.0;
};

}  // namespace

std::unique_ptr<Recommender> make_recommender(const ModelConfig& config,
                                              const ItemCatalog* catalog) {
    config.validate();
    const std::string& kind = config.kind;
    auto need_catalog = [&]() -> const ItemCatalog& {
        if (!catalog) throw UsageError(kind + " requires an item catalog with attributes");
        return *catalog;
    };
    if (kind == "mostpop") return std::make_unique<MostPopRecommender>();
    if (kind == "random") return std::make_unique<RandomRecommender>(config.seed);
    if (kind == "itemknn") return std::make_unique<ItemKnnRecommender>(config.neighborhood_k);
    if (kind == "userknn") return std::make_unique<UserKnnRecommender>(config.neighborhood_k);
    if (kind == "attr-itemknn")
        return std::make_unique<AttributeItemKnnRecommender>(config.neighborhood_k, need_catalog());
    if (kind == "attr-userknn")
        return std::make_unique<AttributeUserKnnRecommender>(config.neighborhood_k, need_catalog());
    if (kind == "vsm") return std::make_unique<VsmRecommender>(need_catalog());
    if (kind == "rp3beta") return std::make_unique<Rp3BetaRecommender>(config.alpha, config.beta);
    if (kind == "ease") return std::make_unique<EaseRecommender>(config.lambda);
    if (kind == "mf2020") return std::make_unique<MfRecommender>(config);
    throw UsageError("unknown model kind '" + kind + "'");
}

// ---------------------------------------------------------------------------
// Hyperparameter search
// ---------------------------------------------------------------------------

std::vector<ModelConfig> default_grid(const std::string& kind, std::uint64_t seed) {
    std::vector<ModelConfig> grid;
    auto base = [&]() {
        ModelConfig c;
        c.kind = kind;
        c.seed = seed;
        return c;
    };
    if (kind == "itemknn" || kind == "userknn" || kind == "attr-itemknn" ||
        kind == "attr-userknn") {
        for (int k : {10, 50, 100, 200, 500}) {
            auto c = base();
            c.neighborhood_k = k;
            grid.push_back(c);
        }
    } else if (kind == "rp3beta") {
        for (double alpha : {0.5, 1.0})
            for (double beta : {0.0, 0.2, 0.4, 0.6, 0.8, 1.0}) {
                auto c = base();
                c.alpha = alpha;
                c.beta = beta;
                grid.push_back(c);
            }
    } else if (kind == "ease") {
        for (double lambda : {1.0, 10.0, 100.0, 1000.0}) {
            auto c = base();
            c.lambda = lambda;
            grid.push_back(c);
        }
    } else if (kind == "mf2020") {
        for (int dim : {16, 64})
            for (double lr : {0.01, 0.05}) {
                auto c = base();
                c.latent_dim = dim;
                c.learning_rate = lr;
                c.negatives = 4;
                grid.push_back(c);
            }
    } else {
        grid.push_back(base());  // non-tunable kinds: singleton grid
    }
    return grid;
}

ModelConfig tune_hyperparameters(const std::string& kind, const InteractionLog& train,
                                 const std::vector<ModelConfig>& grid, std::uint64_t seed,
                                 int cutoff, const ItemCatalog* catalog) {
    if (grid.empty()) throw UsageError("tune_hyperparameters: empty grid");

    SplitPair inner = split_holdout(train, 0.10, mix_seed(seed, fnv1a("validation")));
    SparseInteractionMatrix matrix = SparseInteractionMatrix::from_log(inner.train);
    auto validation = inner.test.profiles();

    ModelConfig best = grid.front();
    double best_score = -1.0;
    for (const auto& config : grid) {
        if (config.kind != kind)
            throw UsageError("tune_hyperparameters: grid entry kind '" + config.kind +
                             "' does not match '" + kind + "'");
        auto model = make_recommender(config, catalog);
        model->fit(matrix);
        double sum = 0.0;
        size_t n = 0;
        for (const auto& [user, items] : validation) {
            if (matrix.user_ordinal(user) < 0) continue;
            std::set<std::string> relevant(items.begin(), items.end());
            if (relevant.empty()) continue;
            RankedList list = recommend_top_n(*model, matrix, user, cutoff);
            sum += ndcg_at_k(list, relevant, cutoff);
            ++n;
        }
        double score = n > 0 ? sum / static_cast<double>(n) : 0.0;
        if (score > best_score) {
            best_score = score;
            best = config;
        }
    }
    return best;
}

}  // namespace receval
