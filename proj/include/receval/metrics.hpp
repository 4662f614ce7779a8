#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "receval/matrix.hpp"
#include "receval/ranked_list.hpp"

namespace receval {

/// Per-user binary relevance: the user's test items.
using RelevanceJudgments = std::map<std::string, std::set<std::string>>;

/// Train-side popularity statistics plus the head/long-tail partition.
struct PopularityProfile {
    std::map<std::string, long> counts;    // item -> train interaction count (0 allowed)
    std::map<std::string, double> p_seen;  // item -> fraction of users who interacted
    long total = 0;                        // sum of counts
    std::set<std::string> head;            // most popular segment
    double head_fraction = 0.2;

    bool in_tail(const std::string& item) const { return head.count(item) == 0; }

    /// Partition rule: head = the round(head_fraction * n) most interacted
    /// items (ties broken by ascending item id), at least one when non-empty.
    static PopularityProfile from_matrix(const SparseInteractionMatrix& train,
                                         double head_fraction = 0.2,
                                         const std::vector<std::string>& extra_catalog_items = {});
};

struct MetricVector {
    std::string metric;
    std::string model;
    std::map<std::string, double> values;  // user -> value

    double mean() const;
    std::size_t n_users() const { return values.size(); }
};

// --- per-list metrics (binary relevance, cutoff k) ---

double ndcg_at_k(const RankedList& list, const std::set<std::string>& relevant, int k = 10);
std::pair<double, double> precision_recall_at_k(const RankedList& list,
                                                const std::set<std::string>& relevant, int k = 10);
double epc_at_k(const RankedList& list, const std::set<std::string>& relevant,
                const PopularityProfile& pop, int k = 10);
double efd_at_k(const RankedList& list, const std::set<std::string>& relevant,
                const PopularityProfile& pop, int k = 10);
double aplt_at_k(const RankedList& list, const PopularityProfile& pop, int k = 10);
double arp_at_k(const RankedList& list, const PopularityProfile& pop, int k = 10);

// --- whole-run metrics ---

std::size_t item_coverage(const std::vector<RankedList>& lists, int k = 10);

/// 1 - Gini over per-item recommendation counts across the whole catalog of
/// size n (zero counts included). Throws DataError when no recommendations.
double gini_evenness(const std::vector<RankedList>& lists,
                     const std::vector<std::string>& catalog_items, int k = 10);

// --- significance ---

struct TTestResult {
    double t = 0.0;
    std::size_t df = 0;
    double p = 1.0;  // two-sided
};

/// Classic paired t-test on per-user differences. All-zero differences return
/// p = 1. Throws DataError on mismatched user sets or n < 2.
TTestResult paired_t_test(const MetricVector& a, const MetricVector& b);

/// Regularized incomplete beta I_x(a,b); exposed for the t distribution.
double incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, std::size_t df);

}  // namespace receval
