#include "receval/matrix.hpp"

#include <algorithm>

namespace receval {

SparseInteractionMatrix SparseInteractionMatrix::from_log(const InteractionLog& log) {
    SparseInteractionMatrix m;
    m.user_ids_ = log.user_ids();
    m.item_ids_ = log.item_ids();
    m.user_ord_.reserve(m.user_ids_.size());
    m.item_ord_.reserve(m.item_ids_.size());
    for (int u = 0; u < static_cast<int>(m.user_ids_.size()); ++u)
        m.user_ord_[m.user_ids_[static_cast<size_t>(u)]] = u;
    for (int i = 0; i < static_cast<int>(m.item_ids_.size()); ++i)
        m.item_ord_[m.item_ids_[static_cast<size_t>(i)]] = i;

    m.user_items_.assign(m.user_ids_.size(), {});
    m.item_users_.assign(m.item_ids_.size(), {});
    for (const auto& r : log.records()) {
        if (r.weight <= 0.0) continue;  // implicit feedback: positive weights only
        int u = m.user_ord_.at(r.user);
        int i = m.item_ord_.at(r.item);
        m.user_items_[static_cast<size_t>(u)].push_back(i);
        m.item_users_[static_cast<size_t>(i)].push_back(u);
        ++m.nnz_;
    }
    for (auto& v : m.user_items_) std::sort(v.begin(), v.end());
    for (auto& v : m.item_users_) std::sort(v.begin(), v.end());
    return m;
}

int SparseInteractionMatrix::user_ordinal(const std::string& id) const {
    auto it = user_ord_.find(id);
    return it == user_ord_.end() ? -1 : it->second;
}

int SparseInteractionMatrix::item_ordinal(const std::string& id) const {
    auto it = item_ord_.find(id);
    return it == item_ord_.end() ? -1 : it->second;
}

bool SparseInteractionMatrix::has(int u, int i) const {
    const auto& row = user_items_[static_cast<size_t>(u)];
    return std::binary_search(row.begin(), row.end(), i);
}

}  // namespace receval
