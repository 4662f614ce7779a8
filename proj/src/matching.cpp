#include "receval/matching.hpp"

#include <algorithm>
#include <set>

#include "receval/common.hpp"

namespace receval {

namespace {

struct Block {
    size_t a = 0, b = 0, len = 0;
};

// Longest common substring of a[alo,ahi) and b[blo,bhi); earliest in a, then
// earliest in b, on ties. Suffix-length DP over one rolling row.
Block longest_match(const std::string& a, size_t alo, size_t ahi, const std::string& b, size_t blo,
                    size_t bhi) {
    Block best;
    std::vector<size_t> prev(bhi - blo + 1, 0), cur(bhi - blo + 1, 0);
    for (size_t i = alo; i < ahi; ++i) {
        for (size_t j = blo; j < bhi; ++j) {
            size_t jj = j - blo + 1;
            if (a[i] == b[j]) {
                cur[jj] = prev[jj - 1] + 1;
                size_t len = cur[jj];
                size_t ai = i + 1 - len, bj = j + 1 - len;
                if (len > best.len || (len == best.len && len > 0 &&
                                       (ai < best.a || (ai == best.a && bj < best.b)))) {
                    best = {ai, bj, len};
                }
            } else {
                cur[jj] = 0;
            }
        }
        std::swap(prev, cur);
    }
    return best;
}

size_t matched_chars(const std::string& a, size_t alo, size_t ahi, const std::string& b, size_t blo,
                     size_t bhi) {
    if (alo >= ahi || blo >= bhi) return 0;
    Block m = longest_match(a, alo, ahi, b, blo, bhi);
    if (m.len == 0) return 0;
    return m.len + matched_chars(a, alo, m.a, b, blo, m.b) +
           matched_chars(a, m.a + m.len, ahi, b, m.b + m.len, bhi);
}

}  // namespace

double ro_similarity(const std::string& a, const std::string& b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    // The recursive decomposition depends on which side drives the tie-break
    // between equally long blocks; canonical argument order keeps the
    // similarity symmetric.
    const std::string& lo = a <= b ? a : b;
    const std::string& hi = a <= b ? b : a;
    size_t m = matched_chars(lo, 0, lo.size(), hi, 0, hi.size());
    return 2.0 * static_cast<double>(m) / static_cast<double>(a.size() + b.size());
}

CatalogMatcher::CatalogMatcher(const ItemCatalog& catalog,
                               const std::map<std::string, long>& popularity,
                               bool use_length_prefilter)
    : prefilter_(use_length_prefilter) {
    if (catalog.entries.empty()) throw DataError("matcher: empty catalog");
    candidates_.reserve(catalog.entries.size());
    for (const auto& [id, entry] : catalog.entries) {
        Candidate c;
        c.item_id = id;
        c.normalized_name = normalize_text(entry.name);
        auto pop = popularity.find(id);
        c.popularity = pop == popularity.end() ? 0 : pop->second;
        candidates_.push_back(std::move(c));
    }
    // scan order implements the tie rule: first strictly-better similarity
    // wins, so equal-similarity ties fall to the more popular item, then to
    // the ascending item id
    std::sort(candidates_.begin(), candidates_.end(), [](const Candidate& x, const Candidate& y) {
        if (x.popularity != y.popularity) return x.popularity > y.popularity;
        return x.item_id < y.item_id;
    });
}

MatchResult CatalogMatcher::resolve_item(const std::string& raw, double threshold) const {
    MatchResult result;
    result.raw = raw;
    const std::string normalized = normalize_text(raw);

    double best = -1.0;
    const Candidate* best_candidate = nullptr;
    const double raw_len = static_cast<double>(normalized.size());
    for (const auto& c : candidates_) {
        if (prefilter_) {
            // similarity is bounded by 2*min_len/(len_a+len_b); skip names
            // that cannot clear the gate
            double min_len = static_cast<double>(std::min(normalized.size(), c.normalized_name.size()));
            double denom = raw_len + static_cast<double>(c.normalized_name.size());
            double bound = denom > 0.0 ? 2.0 * min_len / denom : 1.0;
            if (!(bound > threshold)) continue;
        }
        double sim = ro_similarity(normalized, c.normalized_name);
        if (sim > best) {
            best = sim;
            best_candidate = &c;
            if (best == 1.0) break;
        }
    }
    if (best_candidate && best > threshold) {
        result.matched = true;
        result.item_id = best_candidate->item_id;
        result.similarity = best;
    }
    return result;
}

ResolvedList CatalogMatcher::resolve_list(const std::string& user_id,
                                          const std::vector<std::string>& raw_items,
                                          double threshold) const {
    ResolvedList out;
    out.user_id = user_id;
    std::set<std::string> kept;
    int rank = 0;
    for (const auto& raw : raw_items) {
        ++rank;
        MatchResult m = resolve_item(raw, threshold);
        m.rank = rank;
        if (!m.matched) {
            ++out.external_count;
            if (out.first_external_rank == 0) out.first_external_rank = rank;
        } else if (kept.insert(m.item_id).second) {
            out.item_ids.push_back(m.item_id);
            out.ranks.push_back(rank);
        }
        out.audit.push_back(std::move(m));
    }
    return out;
}

}  // namespace receval
