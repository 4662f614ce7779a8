#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "receval/corpus.hpp"

namespace receval {

struct MatchResult {
    std::string raw;                 // normalized raw string
    int rank = 0;                    // 1-based rank in the source list
    bool matched = false;
    std::string item_id;             // only when matched
    double similarity = 0.0;         // only when matched
};

struct ResolvedList {
    std::string user_id;
    std::vector<std::string> item_ids;  // deduplicated, raw order preserved
    std::vector<int> ranks;             // raw rank of each kept item (1-based)
    int external_count = 0;
    int first_external_rank = 0;        // 0 when no external item
    std::vector<MatchResult> audit;     // one entry per raw string
};

/// Ratcliff-Obershelp similarity 2M/(|a|+|b|): M from the recursive
/// longest-common-substring decomposition. Inputs are compared as-is;
/// callers normalize first.
double ro_similarity(const std::string& a, const std::string& b);

/// Pre-normalized catalog name index with train popularity for tie-breaking.
class CatalogMatcher {
public:
    CatalogMatcher(const ItemCatalog& catalog, const std::map<std::string, long>& popularity = {},
                   bool use_length_prefilter = true);

    /// Best catalog match for one raw string. Similarity must be strictly
    /// above the threshold to match; ties resolve to the more popular item,
    /// then the ascending item id.
    MatchResult resolve_item(const std::string& raw, double threshold = 0.90) const;

    ResolvedList resolve_list(const std::string& user_id, const std::vector<std::string>& raw_items,
                              double threshold = 0.90) const;

private:
    struct Candidate {
        std::string normalized_name;
        std::string item_id;
        long popularity = 0;
    };
    std::vector<Candidate> candidates_;  // sorted by (popularity desc, item_id asc)
    bool prefilter_ = true;
};

}  // namespace receval
