#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "receval/common.hpp"

namespace receval {

struct Interaction {
    std::string user;
    std::string item;
    double weight = 1.0;
};

/// Deduplicated (user,item) interaction events. Records are kept sorted by
/// (user, item) so every downstream consumer sees a deterministic order.
class InteractionLog {
public:
    InteractionLog() = default;

    // Merges duplicates keeping the maximum weight.
    static InteractionLog from_records(const std::vector<Interaction>& recs);

    const std::vector<Interaction>& records() const { return records_; }
    bool empty() const { return records_.empty(); }
    std::size_t size() const { return records_.size(); }

    std::vector<std::string> user_ids() const;  // sorted unique
    std::vector<std::string> item_ids() const;  // sorted unique

    // user -> item ids in record order (sorted by item id)
    std::map<std::string, std::vector<std::string>> profiles() const;

    bool contains(const std::string& user, const std::string& item) const;

private:
    std::vector<Interaction> records_;
};

struct CatalogEntry {
    std::string name;
    std::map<std::string, std::set<std::string>> attributes;  // kind -> values
};

struct ItemCatalog {
    std::map<std::string, CatalogEntry> entries;

    bool has(const std::string& item) const { return entries.count(item) > 0; }
    // Items present in the catalog but carrying no attribute values.
    std::vector<std::string> items_without_attributes() const;
};

struct SplitPair {
    InteractionLog train;
    InteractionLog test;
    std::uint64_t seed = 0;
    double ratio = 0.2;
};

struct DatasetStats {
    std::size_t n_users = 0;
    std::size_t n_items = 0;
    std::size_t n_interactions = 0;
    double sparsity = 0.0;  // 1 - n_interactions / (n_users * n_items)
};

enum class DatasetFormat { movielens_100k, lastfm_hetrec, facebook_books, generic_tsv };

DatasetFormat dataset_format_from_string(const std::string& tag);
std::string to_string(DatasetFormat fmt);

/// Reads an interaction file. Duplicate (user,item) rows merge keeping the
/// max weight. Throws DataError on unreadable files, malformed rows (message
/// carries the line number) and empty results.
InteractionLog parse_interactions(const std::filesystem::path& path, DatasetFormat format);

/// Iterative k-core: repeatedly delete users with < k interactions, then
/// items with < k interactions, until a fixpoint. May return an empty log.
InteractionLog apply_kcore(const InteractionLog& log, std::size_t k);

/// Per-user random holdout. Test size per user = clamp(round(ratio * n)) into
/// [1, n-1]. Rejects users with fewer than two interactions.
SplitPair split_holdout(const InteractionLog& log, double ratio, std::uint64_t seed);

DatasetStats dataset_stats(const InteractionLog& log);

/// Reads tab-separated (item_id, attribute_kind, attribute_value) triples.
/// The reserved kind "name" sets the item display name; items without a name
/// row fall back to their id. Values merge with set semantics.
ItemCatalog parse_attributes(const std::filesystem::path& path);

// --- serialization (tab-separated, deterministic ordering) ---
void write_interactions(const InteractionLog& log, const std::filesystem::path& path);
InteractionLog read_interactions_tsv(const std::filesystem::path& path);

std::string sha256_file(const std::filesystem::path& path);

}  // namespace receval
