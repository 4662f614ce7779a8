#include "receval/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include <openssl/evp.h>

namespace receval {

namespace {

double parse_weight(const std::string& field, const std::filesystem::path& path, size_t line_no) {
    try {
        size_t pos = 0;
        double w = std::stod(field, &pos);
        if (pos != field.size()) throw std::invalid_argument("trailing chars");
        if (!std::isfinite(w) || w < 0.0)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": negative or non-finite weight '" + field + "'");
        return w;
    } catch (const DataError&) {
        throw;
    } catch (const std::exception&) {
        throw DataError(path.string() + ":" + std::to_string(line_no) + ": malformed weight '" +
                        field + "'");
    }
}

}  // namespace

InteractionLog InteractionLog::from_records(const std::vector<Interaction>& recs) {
    std::map<std::pair<std::string, std::string>, double> merged;
    for (const auto& r : recs) {
        auto key = std::make_pair(r.user, r.item);
        auto it = merged.find(key);
        if (it == merged.end())
            merged.emplace(std::move(key), r.weight);
        else
            it->second = std::max(it->second, r.weight);
    }
    InteractionLog log;
    log.records_.reserve(merged.size());
    for (const auto& [key, w] : merged) log.records_.push_back({key.first, key.second, w});
    return log;
}

std::vector<std::string> InteractionLog::user_ids() const {
    std::vector<std::string> out;
    for (const auto& r : records_)
        if (out.empty() || out.back() != r.user) out.push_back(r.user);
    // records_ sorted by (user,item): users already grouped and sorted
    return out;
}

std::vector<std::string> InteractionLog::item_ids() const {
    std::set<std::string> items;
    for (const auto& r : records_) items.insert(r.item);
    return {items.begin(), items.end()};
}

std::map<std::string, std::vector<std::string>> InteractionLog::profiles() const {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& r : records_) out[r.user].push_back(r.item);
    return out;
}

bool InteractionLog::contains(const std::string& user, const std::string& item) const {
    Interaction probe{user, item, 0.0};
    auto it = std::lower_bound(records_.begin(), records_.end(), probe,
                               [](const Interaction& a, const Interaction& b) {
                                   return std::tie(a.user, a.item) < std::tie(b.user, b.item);
                               });
    return it != records_.end() && it->user == user && it->item == item;
}

std::vector<std::string> ItemCatalog::items_without_attributes() const {
    std::vector<std::string> out;
    for (const auto& [id, entry] : entries) {
        bool any = false;
        for (const auto& [kind, values] : entry.attributes)
            if (!values.empty()) { any = true; break; }
        if (!any) out.push_back(id);
    }
    return out;
}

DatasetFormat dataset_format_from_string(const std::string& tag) {
    if (tag == "movielens-100k") return DatasetFormat::movielens_100k;
    if (tag == "lastfm-hetrec") return DatasetFormat::lastfm_hetrec;
    if (tag == "facebook-books") return DatasetFormat::facebook_books;
    if (tag == "generic-tsv") return DatasetFormat::generic_tsv;
    throw UsageError("unknown dataset format '" + tag + "'");
}

std::string to_string(DatasetFormat fmt) {
    switch (fmt) {
        case DatasetFormat::movielens_100k: return "movielens-100k";
        case DatasetFormat::lastfm_hetrec: return "lastfm-hetrec";
        case DatasetFormat::facebook_books: return "facebook-books";
        case DatasetFormat::generic_tsv: return "generic-tsv";
    }
    return "?";
}

InteractionLog parse_interactions(const std::filesystem::path& path, DatasetFormat format) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read interaction file: " + path.string());

    std::vector<Interaction> recs;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        // Last.FM hetrec files carry a header line.
        if (format == DatasetFormat::lastfm_hetrec && line_no == 1 &&
            line.rfind("userID", 0) == 0)
            continue;
        auto fields = split_whitespace(line);
        switch (format) {
            case DatasetFormat::movielens_100k: {
                if (fields.size() != 4)
                    throw DataError(path.string() + ":" + std::to_string(line_no) +
                                    ": expected 4 fields (user item rating timestamp), got " +
                                    std::to_string(fields.size()));
                recs.push_back({fields[0], fields[1], parse_weight(fields[2], path, line_no)});
                break;
            }
            case DatasetFormat::lastfm_hetrec: {
                if (fields.size() != 3)
                    throw DataError(path.string() + ":" + std::to_string(line_no) +
                                    ": expected 3 fields (user artist weight), got " +
                                    std::to_string(fields.size()));
                recs.push_back({fields[0], fields[1], parse_weight(fields[2], path, line_no)});
                break;
            }
            case DatasetFormat::facebook_books:
            case DatasetFormat::generic_tsv: {
                if (fields.size() != 2 && fields.size() != 3)
                    throw DataError(path.string() + ":" + std::to_string(line_no) +
                                    ": expected 2 or 3 fields (user item [weight]), got " +
                                    std::to_string(fields.size()));
                double w = fields.size() == 3 ? parse_weight(fields[2], path, line_no) : 1.0;
                recs.push_back({fields[0], fields[1], w});
                break;
            }
        }
    }
    if (recs.empty()) throw DataError("empty result: no interactions in " + path.string());
    return InteractionLog::from_records(recs);
}

InteractionLog apply_kcore(const InteractionLog& log, std::size_t k) {
    if (k < 1) throw UsageError("k-core requires k >= 1");

    std::vector<Interaction> current = log.records();
    bool changed = true;
    while (changed) {
        changed = false;
        std::map<std::string, size_t> user_deg;
        for (const auto& r : current) ++user_deg[r.user];
        std::vector<Interaction> kept;
        kept.reserve(current.size());
        for (auto& r : current)
            if (user_deg[r.user] >= k) kept.push_back(std::move(r));
        if (kept.size() != current.size()) changed = true;
        current = std::move(kept);

        std::map<std::string, size_t> item_deg;
        for (const auto& r : current) ++item_deg[r.item];
        kept.clear();
        kept.reserve(current.size());
        for (auto& r : current)
            if (item_deg[r.item] >= k) kept.push_back(std::move(r));
        if (kept.size() != current.size()) changed = true;
        current = std::move(kept);
    }
    return InteractionLog::from_records(current);
}

SplitPair split_holdout(const InteractionLog& log, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw UsageError("split ratio must be in (0,1)");

    auto profiles = log.profiles();
    for (const auto& [user, items] : profiles)
        if (items.size() < 2)
            throw DataError("cannot split: user '" + user + "' has a single interaction");

    // weights for rebuilding the sub-logs
    std::map<std::pair<std::string, std::string>, double> weight;
    for (const auto& r : log.records()) weight[{r.user, r.item}] = r.weight;

    std::vector<Interaction> train, test;
    for (const auto& [user, items] : profiles) {
        std::vector<std::string> shuffled = items;
        std::mt19937_64 rng(mix_seed(seed, fnv1a(user)));
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        size_t n = shuffled.size();
        size_t want = static_cast<size_t>(std::llround(ratio * static_cast<double>(n)));
        size_t test_n = std::min(n - 1, std::max<size_t>(1, want));
        for (size_t i = 0; i < n; ++i) {
            const auto& item = shuffled[i];
            Interaction rec{user, item, weight.at({user, item})};
            if (i < test_n)
                test.push_back(std::move(rec));
            else
                train.push_back(std::move(rec));
        }
    }
    SplitPair out;
    out.train = InteractionLog::from_records(train);
    out.test = InteractionLog::from_records(test);
    out.seed = seed;
    out.ratio = ratio;
    return out;
}

DatasetStats dataset_stats(const InteractionLog& log) {
    if (log.empty()) throw DataError("dataset_stats: empty log");
    DatasetStats s;
    s.n_users = log.user_ids().size();
    s.n_items = log.item_ids().size();
    s.n_interactions = log.size();
    s.sparsity = 1.0 - static_cast<double>(s.n_interactions) /
                           (static_cast<double>(s.n_users) * static_cast<double>(s.n_items));
    return s;
}

ItemCatalog parse_attributes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read attribute file: " + path.string());

    ItemCatalog catalog;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        auto fields = split_tabs(line);
        if (fields.size() != 3)
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected 3 tab-separated fields (item kind value), got " +
                            std::to_string(fields.size()));
        std::string item = trim(fields[0]);
        std::string kind = trim(fields[1]);
        std::string value = trim(fields[2]);
        if (item.empty() || kind.empty())
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": empty item id or attribute kind");
        if (value.empty())
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": empty attribute value");
        auto& entry = catalog.entries[item];
        if (kind == "name")
            entry.name = value;
        else
            entry.attributes[kind].insert(value);
    }
    // Items that never received a name row keep their id as display name.
    for (auto& [id, entry] : catalog.entries)
        if (trim(entry.name).empty()) entry.name = id;
    return catalog;
}

void write_interactions(const InteractionLog& log, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw DataError("cannot write: " + path.string());
    for (const auto& r : log.records())
        out << r.user << '\t' << r.item << '\t' << format_double(r.weight) << '\n';
}

InteractionLog read_interactions_tsv(const std::filesystem::path& path) {
    return parse_interactions(path, DatasetFormat::generic_tsv);
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read for checksum: " + path.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 16];
    while (in.good()) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) EVP_DigestUpdate(ctx, buf, static_cast<size_t>(got));
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

}  // namespace receval
