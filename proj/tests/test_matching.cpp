#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "receval/matching.hpp"
#include "receval/common.hpp"

using namespace receval;

namespace {

ItemCatalog catalog_of(const std::vector<std::pair<std::string, std::string>>& entries) {
    ItemCatalog catalog;
    for (const auto& [id, name] : entries) {
        CatalogEntry e;
        e.name = name;
        catalog.entries[id] = e;
    }
    return catalog;
}

std::string random_string(std::mt19937_64& rng, int max_len) {
    std::uniform_int_distribution<int> len(0, max_len);
    std::uniform_int_distribution<int> ch(0, 4);
    std::string s;
    for (int i = len(rng); i > 0; --i) s.push_back(static_cast<char>('a' + ch(rng)));
    return s;
}

}  // namespace

TEST_CASE("ro_similarity worked values") {
    CHECK(ro_similarity("the green mile", "the green mile") == 1.0);
    CHECK(std::fabs(ro_similarity("abcd", "bcd") - 6.0 / 7.0) <= 1e-12);
    CHECK(ro_similarity("aaaa", "zzzz") == 0.0);
    CHECK(ro_similarity("", "abc") == 0.0);
    CHECK(ro_similarity("abc", "") == 0.0);
    CHECK(ro_similarity("", "") == 1.0);
}

TEST_CASE("ro_similarity is symmetric and bounded on random pairs") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 2000; ++trial) {
        std::string a = random_string(rng, 12), b = random_string(rng, 12);
        double ab = ro_similarity(a, b), ba = ro_similarity(b, a);
        REQUIRE(ab == ba);
        REQUIRE(ab >= 0.0);
        REQUIRE(ab <= 1.0);
        if (a == b) REQUIRE(ab == 1.0);
    }
}

TEST_CASE("ro_similarity is 1 only for equal strings") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 1000; ++trial) {
        std::string a = random_string(rng, 10), b = random_string(rng, 10);
        if (ro_similarity(a, b) == 1.0) REQUIRE(a == b);
    }
}

TEST_CASE("resolve_item matches exact catalog names at similarity 1") {
    CatalogMatcher matcher(catalog_of({{"i1", "The Green Mile"}, {"i2", "Interstellar"}}));
    auto m = matcher.resolve_item("the green  mile");  // case/whitespace-insensitive
    REQUIRE(m.matched);
    CHECK(m.item_id == "i1");
    CHECK(m.similarity == 1.0);
}

TEST_CASE("resolve_item flags sub-threshold strings as external") {
    CatalogMatcher matcher(catalog_of({{"i1", "abcdefghij"}}));
    auto below = matcher.resolve_item("abcdefgh--");  // sim 0.8
    CHECK_FALSE(below.matched);
    CHECK(below.item_id.empty());

    // exactly at the threshold: "above 90%" is strict
    auto at = matcher.resolve_item("abcdefghix");  // sim 0.9
    CHECK(std::fabs(ro_similarity("abcdefghix", "abcdefghij") - 0.9) < 1e-12);
    CHECK_FALSE(at.matched);
}

TEST_CASE("resolve_item similarity ties fall to popularity then item id") {
    // two catalog entries with the same normalized name
    auto catalog = catalog_of({{"ia", "The Wall"}, {"ib", "the wall"}});
    CatalogMatcher popular(catalog, {{"ia", 3}, {"ib", 10}});
    auto m = popular.resolve_item("The Wall");
    REQUIRE(m.matched);
    CHECK(m.item_id == "ib");

    CatalogMatcher equal(catalog, {{"ia", 5}, {"ib", 5}});
    CHECK(equal.resolve_item("The Wall").item_id == "ia");

    CatalogMatcher unweighted(catalog);
    CHECK(unweighted.resolve_item("The Wall").item_id == "ia");
}

TEST_CASE("resolve_list drops externals, dedups and records the first external rank") {
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 0; i < 50; ++i)
        entries.push_back({"i" + std::to_string(100 + i), "catalog title number " + std::to_string(100 + i)});
    CatalogMatcher matcher(catalog_of(entries));

    std::vector<std::string> raw;
    for (int i = 0; i < 50; ++i) raw.push_back("catalog title number " + std::to_string(100 + i));
    raw[23] = "completely unrelated xyzzy";   // rank 24
    raw[30] = "another fabricated qqqqq";     // rank 31
    raw[46] = "pure hallucination zzz";       // rank 47

    auto resolved = matcher.resolve_list("u1", raw);
    CHECK(resolved.item_ids.size() == 47);
    CHECK(resolved.external_count == 3);
    CHECK(resolved.first_external_rank == 24);
}

TEST_CASE("resolve_list keeps the earliest rank for duplicate matches") {
    CatalogMatcher matcher(catalog_of({{"i1", "Dune"}, {"i2", "Hyperion"}}));
    auto resolved = matcher.resolve_list("u1", {"Dune", "Hyperion", "dune"});
    REQUIRE(resolved.item_ids == std::vector<std::string>{"i1", "i2"});
    REQUIRE(resolved.ranks == std::vector<int>{1, 2});
    CHECK(resolved.external_count == 0);
    CHECK(resolved.first_external_rank == 0);
}

TEST_CASE("resolve_list with only externals returns an empty list") {
    CatalogMatcher matcher(catalog_of({{"i1", "Dune"}}));
    auto resolved = matcher.resolve_list("u1", {"xxxxxxx", "yyyyyyy"});
    CHECK(resolved.item_ids.empty());
    CHECK(resolved.external_count == 2);
    CHECK(resolved.first_external_rank == 1);
}

TEST_CASE("threshold gate: matched above, external at-or-below") {
    std::mt19937_64 rng(21);
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 0; i < 20; ++i) entries.push_back({"i" + std::to_string(i), random_string(rng, 10) + "name" + std::to_string(i)});
    auto catalog = catalog_of(entries);
    CatalogMatcher matcher(catalog);

    for (int trial = 0; trial < 300; ++trial) {
        std::string raw = random_string(rng, 14);
        auto m = matcher.resolve_item(raw);
        // independent full scan for the best similarity
        double best = 0.0;
        for (const auto& [id, e] : catalog.entries)
            best = std::max(best, ro_similarity(normalize_text(raw), normalize_text(e.name)));
        if (m.matched) {
            REQUIRE(m.similarity > 0.90);
            REQUIRE(m.similarity == best);
        } else {
            REQUIRE(best <= 0.90);
        }
    }
}

TEST_CASE("matched order is a subsequence of the raw order") {
    std::mt19937_64 rng(22);
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 0; i < 15; ++i)
        entries.push_back({"i" + std::to_string(i), "title " + std::to_string(i) + " of catalog"});
    CatalogMatcher matcher(catalog_of(entries));

    std::uniform_int_distribution<int> pick(0, 14), coin(0, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<std::string> raw;
        for (int j = 0; j < 12; ++j)
            raw.push_back(coin(rng) ? "title " + std::to_string(pick(rng)) + " of catalog"
                                    : random_string(rng, 6));
        auto resolved = matcher.resolve_list("u", raw);
        REQUIRE(resolved.ranks.size() == resolved.item_ids.size());
        for (size_t x = 1; x < resolved.ranks.size(); ++x)
            REQUIRE(resolved.ranks[x - 1] < resolved.ranks[x]);  // strictly increasing raw ranks
    }
}

TEST_CASE("length-band prefilter is result-identical to the full scan") {
    std::mt19937_64 rng(23);
    std::vector<std::pair<std::string, std::string>> entries;
    for (int i = 0; i < 25; ++i)
        entries.push_back({"i" + std::to_string(i), "x" + random_string(rng, 11)});
    auto catalog = catalog_of(entries);
    std::map<std::string, long> pop;
    for (int i = 0; i < 25; ++i) pop["i" + std::to_string(i)] = i % 7;

    CatalogMatcher with(catalog, pop, true);
    CatalogMatcher without(catalog, pop, false);
    for (int trial = 0; trial < 500; ++trial) {
        std::string raw = random_string(rng, 14);
        auto a = with.resolve_item(raw);
        auto b = without.resolve_item(raw);
        REQUIRE(a.matched == b.matched);
        REQUIRE(a.item_id == b.item_id);
        REQUIRE(a.similarity == b.similarity);
    }
}

TEST_CASE("matcher rejects an empty catalog") {
    CHECK_THROWS_AS(CatalogMatcher(ItemCatalog{}), DataError);
}
