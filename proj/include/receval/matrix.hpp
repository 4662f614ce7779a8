#pragma once

#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "receval/corpus.hpp"

namespace receval {

/// Binary implicit-feedback matrix with id <-> ordinal bimaps. Ordinals are
/// assigned in ascending id order, so iteration over ordinals is iteration
/// over sorted external ids.
class SparseInteractionMatrix {
public:
    static SparseInteractionMatrix from_log(const InteractionLog& log);

    int n_users() const { return static_cast<int>(user_ids_.size()); }
    int n_items() const { return static_cast<int>(item_ids_.size()); }

    const std::string& user_id(int u) const { return user_ids_[static_cast<size_t>(u)]; }
    const std::string& item_id(int i) const { return item_ids_[static_cast<size_t>(i)]; }

    int user_ordinal(const std::string& id) const;  // -1 when absent
    int item_ordinal(const std::string& id) const;

    std::span<const int> items_of(int u) const { return user_items_[static_cast<size_t>(u)]; }
    std::span<const int> users_of(int i) const { return item_users_[static_cast<size_t>(i)]; }

    bool has(int u, int i) const;
    std::size_t n_interactions() const { return nnz_; }

    const std::vector<std::string>& user_ids() const { return user_ids_; }
    const std::vector<std::string>& item_ids() const { return item_ids_; }

private:
    std::vector<std::string> user_ids_;
    std::vector<std::string> item_ids_;
    std::unordered_map<std::string, int> user_ord_;
    std::unordered_map<std::string, int> item_ord_;
    std::vector<std::vector<int>> user_items_;  // sorted item ordinals per user
    std::vector<std::vector<int>> item_users_;  // sorted user ordinals per item
    std::size_t nnz_ = 0;
};

}  // namespace receval
