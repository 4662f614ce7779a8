#include "receval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "receval/common.hpp"

namespace receval {

namespace {

inline double rank_discount(int rank) {  // rank is 1-based
    return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

}  // namespace

PopularityProfile PopularityProfile::from_matrix(const SparseInteractionMatrix& train,
                                                 double head_fraction,
                                                 const std::vector<std::string>& extra) {
    PopularityProfile pop;
    pop.head_fraction = head_fraction;
    const double n_users = static_cast<double>(train.n_users());
    for (int i = 0; i < train.n_items(); ++i) {
        long c = static_cast<long>(train.users_of(i).size());
        pop.counts[train.item_id(i)] = c;
        pop.p_seen[train.item_id(i)] = n_users > 0 ? static_cast<double>(c) / n_users : 0.0;
        pop.total += c;
    }
    for (const auto& id : extra) {
        if (pop.counts.count(id)) continue;
        pop.counts[id] = 0;
        pop.p_seen[id] = 0.0;
    }

    std::vector<std::pair<long, std::string>> order;  // (count, id)
    order.reserve(pop.counts.size());
    for (const auto& [id, c] : pop.counts) order.emplace_back(c, id);
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    size_t n = order.size();
    size_t head_n = n == 0 ? 0
                           : std::max<size_t>(
                                 1, static_cast<size_t>(std::llround(head_fraction *
                                                                     static_cast<double>(n))));
    head_n = std::min(head_n, n);
    for (size_t i = 0; i < head_n; ++i) pop.head.insert(order[i].second);
    return pop;
}

double MetricVector::mean() const {
    if (values.empty()) return 0.0;
    double s = 0.0;
    for (const auto& [user, v] : values) s += v;
    return s / static_cast<double>(values.size());
}

double ndcg_at_k(const RankedList& list, const std::set<std::string>& relevant, int k) {
    if (relevant.empty()) throw DataError("ndcg: user '" + list.user_id + "' has no relevant items");
    double dcg = 0.0;
    int rank = 0;
    for (const auto& it : list.items) {
        if (++rank > k) break;
        if (relevant.count(it.item_id)) dcg += rank_discount(rank);
    }
    int ideal_hits = std::min<int>(static_cast<int>(relevant.size()), k);
    double idcg = 0.0;
    for (int r = 1; r <= ideal_hits; ++r) idcg += rank_discount(r);
    return idcg > 0.0 ? dcg / idcg : 0.0;
}

std::pair<double, double> precision_recall_at_k(const RankedList& list,
                                                const std::set<std::string>& relevant, int k) {
    if (relevant.empty())
        throw DataError("precision/recall: user '" + list.user_id + "' has no relevant items");
    int hits = 0;
    int rank = 0;
    for (const auto& it : list.items) {
        if (++rank > k) break;
        if (relevant.count(it.item_id)) ++hits;
    }
    double precision = static_cast<double>(hits) / static_cast<double>(k);
    double recall = static_cast<double>(hits) / static_cast<double>(relevant.size());
    return {precision, recall};
}

double epc_at_k(const RankedList& list, const std::set<std::string>& relevant,
                const PopularityProfile& pop, int k) {
    if (relevant.empty()) throw DataError("epc: user '" + list.user_id + "' has no relevant items");
    double num = 0.0, den = 0.0;
    int rank = 0;
    for (const auto& it : list.items) {
        if (++rank > k) break;
        den += rank_discount(rank);
        if (!relevant.count(it.item_id)) continue;
        auto p = pop.p_seen.find(it.item_id);
        double seen = p == pop.p_seen.end() ? 0.0 : p->second;
        num += rank_discount(rank) * (1.0 - seen);
    }
    return den > 0.0 ? num / den : 0.0;
}

double efd_at_k(const RankedList& list, const std::set<std::string>& relevant,
                const PopularityProfile& pop, int k) {
    if (relevant.empty()) throw DataError("efd: user '" + list.user_id + "' has no relevant items");
    double num = 0.0, den = 0.0;
    int rank = 0;
    for (const auto& it : list.items) {
        if (++rank > k) break;
        den += rank_discount(rank);
        if (!relevant.count(it.item_id)) continue;
        auto c = pop.counts.find(it.item_id);
        double count = c == pop.counts.end() ? 0.0 : static_cast<double>(c->second);
        if (count <= 0.0) count = 0.5;  // smoothing for never-seen items
        double p = count / static_cast<double>(pop.total);
        num += rank_discount(rank) * (-std::log2(p));
    }
    return den > 0.0 ? num / den : 0.0;
}

double aplt_at_k(const RankedList& list, const PopularityProfile& pop, int k) {
    int tail = 0;
    int rank = 0;
    for (const auto& it : list.items) {
        if (++rank > k) break;
        if (pop.in_tail(it.item_id)) ++tail;
    }
    return static_cast<double>(tail) / static_cast<double>(k);
}

double arp_at_k(const RankedList& list, const PopularityProfile& pop, int k) {
    double sum = 0.0;
    int n = 0;
    int rank = 0;
    for (const auto& it : list.items) {
        if (++rank > k) break;
        auto c = pop.counts.find(it.item_id);
        sum += c == pop.counts.end() ? 0.0 : static_cast<double>(c->second);
        ++n;
    }
    return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

std::size_t item_coverage(const std::vector<RankedList>& lists, int k) {
    std::set<std::string> covered;
    for (const auto& list : lists) {
        int rank = 0;
        for (const auto& it : list.items) {
            if (++rank > k) break;
            covered.insert(it.item_id);
        }
    }
    return covered.size();
}

double gini_evenness(const std::vector<RankedList>& lists,
                     const std::vector<std::string>& catalog_items, int k) {
    if (catalog_items.size() < 2) throw DataError("gini: catalog must hold at least two items");
    std::map<std::string, long> counts;
    for (const auto& id : catalog_items) counts[id] = 0;
    long total = 0;
    for (const auto& list : lists) {
        int rank = 0;
        for (const auto& it : list.items) {
            if (++rank > k) break;
            auto c = counts.find(it.item_id);
            if (c != counts.end()) ++c->second;
            ++total;
        }
    }
    if (total == 0) throw DataError("gini: zero recommendations");

    std::vector<long> sorted;
    sorted.reserve(counts.size());
    for (const auto& [id, c] : counts) sorted.push_back(c);
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double weighted = 0.0;
    double sum = 0.0;
    for (size_t j = 0; j < sorted.size(); ++j) {
        weighted += (2.0 * static_cast<double>(j + 1) - n - 1.0) * static_cast<double>(sorted[j]);
        sum += static_cast<double>(sorted[j]);
    }
    double gini = weighted / ((n - 1.0) * sum);
    return 1.0 - gini;
}

// Lentz continued fraction for the regularized incomplete beta.
static double betacf(double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 3e-16, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_beta = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    double front = std::exp(ln_beta + a * std::log(x) + b * std::log(1.0 - x));
    if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, std::size_t df) {
    if (df == 0) return 1.0;
    double v = static_cast<double>(df);
    double x = v / (v + t * t);
    return incomplete_beta(v / 2.0, 0.5, x);
}

TTestResult paired_t_test(const MetricVector& a, const MetricVector& b) {
    if (a.values.size() != b.values.size())
        throw DataError("paired_t_test: user sets differ in size");
    std::vector<double> diffs;
    diffs.reserve(a.values.size());
    for (const auto& [user, va] : a.values) {
        auto it = b.values.find(user);
        if (it == b.values.end())
            throw DataError("paired_t_test: user '" + user + "' missing from second vector");
        diffs.push_back(va - it->second);
    }
    if (diffs.size() < 2) throw DataError("paired_t_test: need at least 2 paired values");

    bool all_zero = std::all_of(diffs.begin(), diffs.end(), [](double d) { return d == 0.0; });
    TTestResult res;
    res.df = diffs.size() - 1;
    if (all_zero) {
        res.t = 0.0;
        res.p = 1.0;
        return res;
    }
    double mean = 0.0;
    for (double d : diffs) mean += d;
    mean /= static_cast<double>(diffs.size());
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    double sd = std::sqrt(ss / static_cast<double>(diffs.size() - 1));
    if (sd == 0.0) {
        // equal nonzero shift everywhere: infinite t, p -> 0
        res.t = mean > 0 ? std::numeric_limits<double>::infinity()
                         : -std::numeric_limits<double>::infinity();
        res.p = 0.0;
        return res;
    }
    res.t = mean / (sd / std::sqrt(static_cast<double>(diffs.size())));
    res.p = student_t_two_sided_p(res.t, res.df);
    return res;
}

}  // namespace receval
