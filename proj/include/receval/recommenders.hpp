#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "receval/corpus.hpp"
#include "receval/matrix.hpp"
#include "receval/ranked_list.hpp"

namespace receval {

struct ModelConfig {
    std::string kind;  // random | mostpop | itemknn | userknn | attr-itemknn |
                       // attr-userknn | vsm | rp3beta | ease | mf2020 | llm
    int neighborhood_k = 100;
    double alpha = 1.0;       // rp3beta walk exponent
    double beta = 0.6;        // rp3beta popularity penalty
    double lambda = 100.0;    // ease ridge weight
    int latent_dim = 16;      // mf2020
    double learning_rate = 0.05;
    int epochs = 30;
    int negatives = 4;
    std::uint64_t seed = 42;

    void validate() const;           // throws UsageError on out-of-range values
    std::string display_name() const;
    std::string config_hash() const;  // stable hex digest of the full config
};

class Recommender {
public:
    virtual ~Recommender() = default;
    virtual std::string name() const = 0;
    virtual void fit(const SparseInteractionMatrix& train) = 0;
    /// Scores for every item ordinal for one trained user. Seen-item masking
    /// is recommend_top_n's job.
    virtual std::vector<double> score_user(int user_ord) const = 0;
    bool fitted() const { return fitted_; }

protected:
    bool fitted_ = false;
};

/// Content-based kinds require a catalog; collaborative kinds ignore it.
std::unique_ptr<Recommender> make_recommender(const ModelConfig& config,
                                              const ItemCatalog* catalog = nullptr);

/// Scores all unseen items and returns the n highest. Ties break on ascending
/// item id. Throws DataError for unknown users and unfitted models.
RankedList recommend_top_n(const Recommender& model, const SparseInteractionMatrix& train,
                           const std::string& user_id, int n);

RankedList most_popular_ranking(const SparseInteractionMatrix& train, const std::string& user_id,
                                int n);
RankedList random_ranking(const SparseInteractionMatrix& train, const std::string& user_id, int n,
                          std::uint64_t seed);

/// Top-k cosine neighbors of one binary vector among its family, excluding
/// the target itself. Vectors are sorted coordinate lists. Zero-norm vectors
/// have similarity 0 to everything.
std::vector<std::pair<int, double>> knn_similarity(const std::vector<std::vector<int>>& vectors,
                                                   int target, int k);

double cosine_binary(const std::vector<int>& a, const std::vector<int>& b);

// --- content features ---

struct TfIdfModel {
    std::vector<std::string> attribute_names;  // ordinal -> "kind:value"
    // item -> sorted (attribute ordinal, weight)
    std::map<std::string, std::vector<std::pair<int, double>>> vectors;
    std::vector<std::string> zero_vector_items;  // items with no attributes, flagged
};

/// weight(a,i) = tf * ln(N/df(a)) with tf = 1 for set-valued attributes.
TfIdfModel tfidf_vectors(const ItemCatalog& catalog, const std::vector<std::string>& items);

double cosine_sparse(const std::vector<std::pair<int, double>>& a,
                     const std::vector<std::pair<int, double>>& b);

// --- closed-form / random-walk item weight matrices ---

/// EASE: B = -P * diag(1/diag(P)) with P = (X^T X + lambda I)^-1 and a zero
/// diagonal. Row-major item x item matrix; user scores are train row times B.
std::vector<std::vector<double>> fit_ease_weights(const SparseInteractionMatrix& train,
                                                  double lambda);

/// RP3beta transition weights: the three-step walk product of the alpha-raised
/// row-normalized item->user and user->item matrices, columns divided by
/// pop^beta. beta = 0 yields the plain P3 walk.
std::vector<std::vector<double>> fit_rp3beta_weights(const SparseInteractionMatrix& train,
                                                     double alpha, double beta);

// --- hyperparameter search ---

/// Declared default grids per model kind (documented in the README).
std::vector<ModelConfig> default_grid(const std::string& kind, std::uint64_t seed);

/// Carves a per-user validation holdout (10%, seeded) from `train`, evaluates
/// every grid point by validation nDCG@cutoff and returns the best config.
/// Ties resolve to the earliest grid entry.
ModelConfig tune_hyperparameters(const std::string& kind, const InteractionLog& train,
                                 const std::vector<ModelConfig>& grid, std::uint64_t seed,
                                 int cutoff = 10, const ItemCatalog* catalog = nullptr);

}  // namespace receval
