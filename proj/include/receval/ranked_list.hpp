#pragma once

#include <string>
#include <vector>

namespace receval {

struct ScoredItem {
    std::string item_id;
    double score = 0.0;
};

/// Top-N recommendation for one user. Invariants: scores non-increasing, no
/// item from the user's train profile, no duplicate item ids.
struct RankedList {
    std::string user_id;
    std::vector<ScoredItem> items;
    int cutoff_origin = 0;  // n requested

    RankedList cut(int k) const {
        RankedList out{user_id, {}, cutoff_origin};
        for (const auto& it : items) {
            if (static_cast<int>(out.items.size()) >= k) break;
            out.items.push_back(it);
        }
        return out;
    }
};

}  // namespace receval
