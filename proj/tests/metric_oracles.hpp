#pragma once

// Naive reference implementations of the metric suite, written with plain
// loops and no code shared with the library. The unit tests and the
// acceptance battery both compare the production metrics against these.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace oracle {

struct Instance {
    std::vector<std::string> catalog;                           // all item ids
    std::map<std::string, long> counts;                         // train counts
    std::map<std::string, double> p_seen;                       // fraction of users
    long total = 0;
    std::set<std::string> head;                                 // naive partition
    std::map<std::string, std::vector<std::string>> lists;      // user -> ranked ids
    std::map<std::string, std::set<std::string>> relevant;      // user -> test items
    int k = 10;
};

inline double disc(int rank) { return 1.0 / std::log2(rank + 1.0); }

inline double o_ndcg(const std::vector<std::string>& list, const std::set<std::string>& rel,
                     int k) {
    double dcg = 0;
    for (int r = 1; r <= static_cast<int>(list.size()) && r <= k; ++r)
        if (rel.count(list[r - 1])) dcg += disc(r);
    double idcg = 0;
    int ideal = std::min<int>(k, static_cast<int>(rel.size()));
    for (int r = 1; r <= ideal; ++r) idcg += disc(r);
    return idcg > 0 ? dcg / idcg : 0.0;
}

inline double o_precision(const std::vector<std::string>& list, const std::set<std::string>& rel,
                          int k) {
    int hits = 0;
    for (int r = 1; r <= static_cast<int>(list.size()) && r <= k; ++r)
        if (rel.count(list[r - 1])) ++hits;
    return static_cast<double>(hits) / k;
}

inline double o_recall(const std::vector<std::string>& list, const std::set<std::string>& rel,
                       int k) {
    int hits = 0;
    for (int r = 1; r <= static_cast<int>(list.size()) && r <= k; ++r)
        if (rel.count(list[r - 1])) ++hits;
    return static_cast<double>(hits) / static_cast<double>(rel.size());
}

inline double o_epc(const Instance& inst, const std::vector<std::string>& list,
                    const std::set<std::string>& rel) {
    double num = 0, den = 0;
    for (int r = 1; r <= static_cast<int>(list.size()) && r <= inst.k; ++r) {
        den += disc(r);
        if (rel.count(list[r - 1]))
            num += disc(r) * (1.0 - inst.p_seen.at(list[r - 1]));
    }
    return den > 0 ? num / den : 0.0;
}

inline double o_efd(const Instance& inst, const std::vector<std::string>& list,
                    const std::set<std::string>& rel) {
    double num = 0, den = 0;
    for (int r = 1; r <= static_cast<int>(list.size()) && r <= inst.k; ++r) {
        den += disc(r);
        if (rel.count(list[r - 1])) {
            double c = static_cast<double>(inst.counts.at(list[r - 1]));
            if (c <= 0) c = 0.5;
            num += disc(r) * (-std::log2(c / static_cast<double>(inst.total)));
        }
    }
    return den > 0 ? num / den : 0.0;
}

inline double o_aplt(const Instance& inst, const std::vector<std::string>& list) {
    int tail = 0;
    for (int r = 1; r <= static_cast<int>(list.size()) && r <= inst.k; ++r)
        if (!inst.head.count(list[r - 1])) ++tail;
    return static_cast<double>(tail) / inst.k;
}

inline double o_arp(const Instance& inst, const std::vector<std::string>& list) {
    double sum = 0;
    int n = 0;
    for (int r = 1; r <= static_cast<int>(list.size()) && r <= inst.k; ++r) {
        sum += static_cast<double>(inst.counts.at(list[r - 1]));
        ++n;
    }
    return n > 0 ? sum / n : 0.0;
}

inline std::size_t o_item_coverage(const Instance& inst) {
    std::set<std::string> covered;
    for (const auto& [user, list] : inst.lists)
        for (int r = 1; r <= static_cast<int>(list.size()) && r <= inst.k; ++r)
            covered.insert(list[r - 1]);
    return covered.size();
}

// Pairwise mean-absolute-difference Gini, rescaled by n/(n-1); an
// independent algebraic route to the sorted-rank formula.
inline double o_gini_evenness(const Instance& inst) {
    std::map<std::string, long> rec_counts;
    for (const auto& id : inst.catalog) rec_counts[id] = 0;
    for (const auto& [user, list] : inst.lists)
        for (int r = 1; r <= static_cast<int>(list.size()) && r <= inst.k; ++r)
            ++rec_counts[list[r - 1]];
    std::vector<double> c;
    for (const auto& [id, n] : rec_counts) c.push_back(static_cast<double>(n));
    const double n = static_cast<double>(c.size());
    double mean = 0;
    for (double v : c) mean += v;
    mean /= n;
    double mad = 0;
    for (double a : c)
        for (double b : c) mad += std::fabs(a - b);
    double gini = mad / (2.0 * n * n * mean);
    return 1.0 - gini * n / (n - 1.0);
}

// Random instance: a popularity profile, ranked lists and relevance sets.
inline Instance random_instance(std::mt19937_64& rng, int max_users = 20, int max_items = 50) {
    Instance inst;
    std::uniform_int_distribution<int> n_users_d(3, max_users), n_items_d(5, max_items);
    const int n_users = n_users_d(rng);
    const int n_items = n_items_d(rng);
    for (int i = 0; i < n_items; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "i%03d", i);
        inst.catalog.push_back(buf);
    }
    std::uniform_int_distribution<long> count_d(0, 40);
    for (const auto& id : inst.catalog) {
        long c = count_d(rng);
        inst.counts[id] = c;
        inst.total += c;
    }
    if (inst.total == 0) {
        inst.counts[inst.catalog[0]] = 5;
        inst.total = 5;
    }
    std::uniform_real_distribution<double> frac(0.0, 1.0);
    for (const auto& id : inst.catalog) inst.p_seen[id] = frac(rng);

    // naive head partition: top round(0.2*n) by (count desc, id asc)
    std::vector<std::string> by_pop = inst.catalog;
    std::sort(by_pop.begin(), by_pop.end(), [&](const std::string& a, const std::string& b) {
        if (inst.counts.at(a) != inst.counts.at(b)) return inst.counts.at(a) > inst.counts.at(b);
        return a < b;
    });
    size_t head_n = std::max<size_t>(1, static_cast<size_t>(std::llround(0.2 * n_items)));
    for (size_t i = 0; i < head_n && i < by_pop.size(); ++i) inst.head.insert(by_pop[i]);

    std::uniform_int_distribution<int> list_len(0, std::min(12, n_items));
    std::uniform_int_distribution<int> rel_len(1, std::min(8, n_items));
    for (int u = 0; u < n_users; ++u) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "u%03d", u);
        std::vector<std::string> pool = inst.catalog;
        std::shuffle(pool.begin(), pool.end(), rng);
        std::vector<std::string> list(pool.begin(), pool.begin() + list_len(rng));
        inst.lists[buf] = list;
        std::shuffle(pool.begin(), pool.end(), rng);
        inst.relevant[buf] =
            std::set<std::string>(pool.begin(), pool.begin() + rel_len(rng));
    }
    return inst;
}

}  // namespace oracle
