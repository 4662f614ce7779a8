#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "metric_oracles.hpp"
#include "receval/metrics.hpp"
#include "test_util.hpp"

using namespace receval;
using testutil::make_log;

namespace {

RankedList list_of(const std::string& user, const std::vector<std::string>& ids) {
    RankedList list;
    list.user_id = user;
    list.cutoff_origin = static_cast<int>(ids.size());
    double score = static_cast<double>(ids.size());
    for (const auto& id : ids) list.items.push_back({id, score--});
    return list;
}

PopularityProfile profile_from_instance(const oracle::Instance& inst) {
    PopularityProfile pop;
    pop.counts = inst.counts;
    pop.p_seen = inst.p_seen;
    pop.total = inst.total;
    pop.head = inst.head;
    return pop;
}

}  // namespace

// ---------------------------------------------------------------------------
// Worked examples
// ---------------------------------------------------------------------------

TEST_CASE("ndcg worked values") {
    std::set<std::string> rel{"hit"};
    CHECK(ndcg_at_k(list_of("u", {"miss", "hit"}), rel, 10) ==
          doctest::Approx(1.0 / std::log2(3.0)).epsilon(1e-12));
    CHECK(ndcg_at_k(list_of("u", {"miss", "hit"}), rel, 10) ==
          doctest::Approx(0.6309).epsilon(1e-4));

    std::set<std::string> rel3{"a", "b", "c"};
    CHECK(ndcg_at_k(list_of("u", {"a", "b", "c"}), rel3, 10) == doctest::Approx(1.0));
    CHECK(ndcg_at_k(list_of("u", {"x", "y"}), rel3, 10) == 0.0);
    CHECK_THROWS_AS(ndcg_at_k(list_of("u", {"a"}), {}, 10), DataError);
}

TEST_CASE("precision and recall worked values") {
    std::set<std::string> rel{"a", "b", "c", "d", "e"};
    auto list = list_of("u", {"a", "x1", "b", "x2", "c", "x3", "x4", "x5", "x6", "x7"});
    auto [p, r] = precision_recall_at_k(list, rel, 10);
    CHECK(p == doctest::Approx(0.3));
    CHECK(r == doctest::Approx(0.6));

    std::set<std::string> rel10;
    std::vector<std::string> all;
    for (int i = 0; i < 10; ++i) {
        rel10.insert("i" + std::to_string(i));
        all.push_back("i" + std::to_string(i));
    }
    auto [p2, r2] = precision_recall_at_k(list_of("u", all), rel10, 10);
    CHECK(p2 == doctest::Approx(1.0));
    CHECK(r2 == doctest::Approx(1.0));

    auto [p3, r3] = precision_recall_at_k(list_of("u", {"x", "y"}), rel, 10);
    CHECK(p3 == 0.0);
    CHECK(r3 == 0.0);
}

TEST_CASE("item coverage counts the union of recommended items") {
    CHECK(item_coverage({list_of("u1", {"a", "b"}), list_of("u2", {"b", "c"})}, 10) == 3);
    std::vector<RankedList> same;
    for (int u = 0; u < 6; ++u)
        same.push_back(list_of("u" + std::to_string(u), {"a", "b", "c", "d"}));
    CHECK(item_coverage(same, 4) == 4);
}

TEST_CASE("gini evenness worked values") {
    // uniform exposure over the catalog
    std::vector<RankedList> uniform = {list_of("u1", {"a", "b"}), list_of("u2", {"c", "d"})};
    CHECK(gini_evenness(uniform, {"a", "b", "c", "d"}, 10) == doctest::Approx(1.0));

    // everything on one item
    std::vector<RankedList> single = {list_of("u1", {"a"}), list_of("u2", {"a"})};
    CHECK(gini_evenness(single, {"a", "b", "c"}, 10) == doctest::Approx(0.0).epsilon(1e-12));

    // counts (0,1,3) over n=3: Gini 0.75, reported 0.25
    std::vector<RankedList> skew = {list_of("u1", {"b", "c"}), list_of("u2", {"c"}),
                                    list_of("u3", {"c"})};
    CHECK(gini_evenness(skew, {"a", "b", "c"}, 10) == doctest::Approx(0.25).epsilon(1e-12));

    CHECK_THROWS_AS(gini_evenness({}, {"a", "b"}, 10), DataError);
    CHECK_THROWS_AS(gini_evenness(uniform, {"a"}, 10), DataError);
}

TEST_CASE("epc worked values") {
    PopularityProfile pop;
    pop.p_seen = {{"hit", 0.25}, {"x", 1.0}};
    pop.counts = {{"hit", 1}, {"x", 4}};
    pop.total = 5;
    std::set<std::string> rel{"hit"};

    double expected = 0.75 / (1.0 + 1.0 / std::log2(3.0));
    CHECK(epc_at_k(list_of("u", {"hit", "x"}), rel, pop, 2) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(epc_at_k(list_of("u", {"hit", "x"}), rel, pop, 2) ==
          doctest::Approx(0.4599).epsilon(1e-4));

    // every recommended item seen by everyone
    PopularityProfile all_seen;
    all_seen.p_seen = {{"hit", 1.0}, {"x", 1.0}};
    CHECK(epc_at_k(list_of("u", {"hit", "x"}), rel, all_seen, 2) == doctest::Approx(0.0));
    // no relevant item in the list
    CHECK(epc_at_k(list_of("u", {"x"}), rel, pop, 2) == doctest::Approx(0.0));
}

TEST_CASE("efd worked values") {
    PopularityProfile pop;
    pop.counts = {{"hit", 1}, {"x", 7}};
    pop.total = 8;  // p(hit) = 1/8
    std::set<std::string> rel{"hit"};

    double expected = 3.0 / (1.0 + 1.0 / std::log2(3.0));
    CHECK(efd_at_k(list_of("u", {"hit", "x"}), rel, pop, 2) ==
          doctest::Approx(expected).epsilon(1e-12));
    CHECK(efd_at_k(list_of("u", {"hit", "x"}), rel, pop, 2) ==
          doctest::Approx(1.8395).epsilon(1e-4));

    CHECK(efd_at_k(list_of("u", {"x", "y"}), rel, pop, 2) == 0.0);

    // maximally popular item: -log2(1) = 0
    PopularityProfile solo;
    solo.counts = {{"hit", 8}};
    solo.total = 8;
    CHECK(efd_at_k(list_of("u", {"hit"}), rel, solo, 2) == doctest::Approx(0.0));

    // never-seen items use the 0.5 smoothing count
    PopularityProfile smoothed;
    smoothed.counts = {{"hit", 0}, {"x", 8}};
    smoothed.total = 8;
    double smoothed_expected = -std::log2(0.5 / 8.0) / (1.0 + 1.0 / std::log2(3.0));
    CHECK(efd_at_k(list_of("u", {"hit", "x"}), rel, smoothed, 2) ==
          doctest::Approx(smoothed_expected).epsilon(1e-12));
}

TEST_CASE("aplt worked values") {
    PopularityProfile pop;
    pop.head = {"h1", "h2"};
    CHECK(aplt_at_k(list_of("u", {"h1", "h2"}), pop, 10) == 0.0);
    CHECK(aplt_at_k(list_of("u", {"t1", "t2", "t3"}), pop, 3) == doctest::Approx(1.0));
    std::vector<std::string> mixed = {"t1", "t2", "t3", "t4", "h1", "h1", "h1", "h1", "h1", "h1"};
    CHECK(aplt_at_k(list_of("u", mixed), pop, 10) == doctest::Approx(0.4));
}

TEST_CASE("arp worked values") {
    PopularityProfile pop;
    pop.counts = {{"a", 5}, {"b", 15}, {"z", 0}};
    CHECK(arp_at_k(list_of("u", {"a", "b"}), pop, 10) == doctest::Approx(10.0));
    CHECK(arp_at_k(list_of("u", {"z", "z2"}), pop, 10) == doctest::Approx(0.0));
}

TEST_CASE("mostpop has maximal arp among arbitrary recommenders") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 30; ++trial) {
        auto log = testutil::random_log(rng, 15, 30, 3, 10);
        auto m = SparseInteractionMatrix::from_log(log);
        auto pop = PopularityProfile::from_matrix(m, 0.2);

        double mostpop_arp = 0.0;
        std::vector<double> counts(static_cast<size_t>(m.n_items()));
        for (int i = 0; i < m.n_items(); ++i)
            counts[static_cast<size_t>(i)] = static_cast<double>(m.users_of(i).size());

        std::uniform_int_distribution<int> pick(0, m.n_items() - 1);
        for (const auto& user : m.user_ids()) {
            int u = m.user_ordinal(user);
            // MostPop list: top 5 unseen by count
            std::vector<int> unseen;
            for (int i = 0; i < m.n_items(); ++i)
                if (!m.has(u, i)) unseen.push_back(i);
            std::sort(unseen.begin(), unseen.end(), [&](int a, int b) {
                if (counts[a] != counts[b]) return counts[a] > counts[b];
                return a < b;
            });
            std::vector<std::string> top, rando;
            for (size_t r = 0; r < unseen.size() && r < 5; ++r)
                top.push_back(m.item_id(unseen[static_cast<size_t>(r)]));
            // arbitrary alternative selection from the same unseen pool
            std::shuffle(unseen.begin(), unseen.end(), rng);
            for (size_t r = 0; r < unseen.size() && r < 5; ++r)
                rando.push_back(m.item_id(unseen[static_cast<size_t>(r)]));

            double a = arp_at_k(list_of(user, top), pop, 5);
            double b = arp_at_k(list_of(user, rando), pop, 5);
            REQUIRE(a >= b - 1e-12);
        }
        (void)mostpop_arp;
    }
}

// ---------------------------------------------------------------------------
// Paired t-test
// ---------------------------------------------------------------------------

TEST_CASE("paired t-test worked example") {
    MetricVector a{"m", "A", {{"u1", 1.0}, {"u2", 2.0}, {"u3", 3.0}}};
    MetricVector b{"m", "B", {{"u1", 2.0}, {"u2", 4.0}, {"u3", 6.0}}};
    auto res = paired_t_test(a, b);
    CHECK(res.df == 2);
    CHECK(res.t == doctest::Approx(-3.464).epsilon(1e-3));
    CHECK(res.p == doctest::Approx(0.0742).epsilon(1e-3 / 0.0742));
    CHECK(std::fabs(res.p - 0.0742) < 1e-3);
}

TEST_CASE("paired t-test degenerate and error cases") {
    MetricVector a{"m", "A", {{"u1", 0.5}, {"u2", 0.25}}};
    auto res = paired_t_test(a, a);
    CHECK(res.p == 1.0);

    MetricVector mismatched{"m", "B", {{"u1", 0.5}, {"zz", 0.25}}};
    CHECK_THROWS_AS(paired_t_test(a, mismatched), DataError);

    MetricVector tiny{"m", "A", {{"u1", 0.5}}};
    CHECK_THROWS_AS(paired_t_test(tiny, tiny), DataError);
}

namespace {

// Student-t two-sided p via Simpson quadrature of the density; independent of
// the incomplete-beta route.
double t_p_quadrature(double t, int df) {
    double v = df;
    double log_norm = std::lgamma((v + 1) / 2) - std::lgamma(v / 2) - 0.5 * std::log(v * M_PI);
    auto density = [&](double x) {
        return std::exp(log_norm - (v + 1) / 2 * std::log1p(x * x / v));
    };
    double hi = std::fabs(t);
    const int steps = 20000;
    double h = hi / steps;
    double acc = density(0.0) + density(hi);
    for (int i = 1; i < steps; ++i) acc += density(i * h) * (i % 2 ? 4.0 : 2.0);
    double integral = acc * h / 3.0;
    return 1.0 - 2.0 * integral;
}

}  // namespace

TEST_CASE("t distribution p-values match an independent quadrature") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> td(-6.0, 6.0);
    std::uniform_int_distribution<int> dfd(2, 60);
    for (int trial = 0; trial < 200; ++trial) {
        double t = td(rng);
        int df = dfd(rng);
        CHECK(student_t_two_sided_p(t, df) ==
              doctest::Approx(t_p_quadrature(t, df)).epsilon(1e-8));
    }
}

// ---------------------------------------------------------------------------
// Oracle battery (unit-sized; the acceptance suite runs the full 1000)
// ---------------------------------------------------------------------------

TEST_CASE("all nine metrics match the brute-force oracles on random instances") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        auto inst = oracle::random_instance(rng);
        auto pop = profile_from_instance(inst);

        std::vector<RankedList> lists;
        for (const auto& [user, ids] : inst.lists) lists.push_back(list_of(user, ids));

        for (const auto& [user, ids] : inst.lists) {
            auto list = list_of(user, ids);
            const auto& rel = inst.relevant.at(user);
            REQUIRE(std::fabs(ndcg_at_k(list, rel, inst.k) - oracle::o_ndcg(ids, rel, inst.k)) <=
                    1e-9);
            auto [p, r] = precision_recall_at_k(list, rel, inst.k);
            REQUIRE(std::fabs(p - oracle::o_precision(ids, rel, inst.k)) <= 1e-9);
            REQUIRE(std::fabs(r - oracle::o_recall(ids, rel, inst.k)) <= 1e-9);
            REQUIRE(std::fabs(epc_at_k(list, rel, pop, inst.k) - oracle::o_epc(inst, ids, rel)) <=
                    1e-9);
            REQUIRE(std::fabs(efd_at_k(list, rel, pop, inst.k) - oracle::o_efd(inst, ids, rel)) <=
                    1e-9);
            REQUIRE(std::fabs(aplt_at_k(list, pop, inst.k) - oracle::o_aplt(inst, ids)) <= 1e-9);
            REQUIRE(std::fabs(arp_at_k(list, pop, inst.k) - oracle::o_arp(inst, ids)) <= 1e-9);
        }
        REQUIRE(item_coverage(lists, inst.k) == oracle::o_item_coverage(inst));
        bool any = false;
        for (const auto& [user, ids] : inst.lists) any |= !ids.empty();
        if (any)
            REQUIRE(std::fabs(gini_evenness(lists, inst.catalog, inst.k) -
                              oracle::o_gini_evenness(inst)) <= 1e-9);
    }
}

// ---------------------------------------------------------------------------
// Invariants
// ---------------------------------------------------------------------------

TEST_CASE("metric ranges hold on random instances") {
    std::mt19937_64 rng(3141);
    for (int trial = 0; trial < 100; ++trial) {
        auto inst = oracle::random_instance(rng);
        auto pop = profile_from_instance(inst);
        std::vector<RankedList> lists;
        for (const auto& [user, ids] : inst.lists) lists.push_back(list_of(user, ids));

        for (const auto& [user, ids] : inst.lists) {
            auto list = list_of(user, ids);
            const auto& rel = inst.relevant.at(user);
            double ndcg = ndcg_at_k(list, rel, inst.k);
            CHECK(ndcg >= 0.0);
            CHECK(ndcg <= 1.0 + 1e-12);
            auto [p, r] = precision_recall_at_k(list, rel, inst.k);
            CHECK(p >= 0.0);
            CHECK(p <= 1.0);
            CHECK(r >= 0.0);
            CHECK(r <= 1.0);
            double epc = epc_at_k(list, rel, pop, inst.k);
            CHECK(epc >= 0.0);
            CHECK(epc <= 1.0 + 1e-12);
            CHECK(efd_at_k(list, rel, pop, inst.k) >= 0.0);
            double aplt = aplt_at_k(list, pop, inst.k);
            CHECK(aplt >= 0.0);
            CHECK(aplt <= 1.0);
            CHECK(arp_at_k(list, pop, inst.k) >= 0.0);
        }
        CHECK(item_coverage(lists, inst.k) <= inst.catalog.size());
        bool any = false;
        for (const auto& [user, ids] : inst.lists) any |= !ids.empty();
        if (any) {
            double g = gini_evenness(lists, inst.catalog, inst.k);
            CHECK(g >= -1e-12);
            CHECK(g <= 1.0 + 1e-12);
        }
    }
}

TEST_CASE("metrics depend on order only, never on score magnitudes") {
    PopularityProfile pop;
    pop.counts = {{"a", 3}, {"b", 1}, {"c", 0}};
    pop.p_seen = {{"a", 0.6}, {"b", 0.2}, {"c", 0.0}};
    pop.total = 4;
    pop.head = {"a"};
    std::set<std::string> rel{"b"};

    RankedList original = list_of("u", {"a", "b", "c"});
    RankedList perturbed = original;
    perturbed.items[0].score = 900.0;
    perturbed.items[1].score = 5.5;
    perturbed.items[2].score = 5.4999;

    CHECK(ndcg_at_k(original, rel, 3) == ndcg_at_k(perturbed, rel, 3));
    CHECK(epc_at_k(original, rel, pop, 3) == epc_at_k(perturbed, rel, pop, 3));
    CHECK(efd_at_k(original, rel, pop, 3) == efd_at_k(perturbed, rel, pop, 3));
    CHECK(aplt_at_k(original, pop, 3) == aplt_at_k(perturbed, pop, 3));
    CHECK(arp_at_k(original, pop, 3) == arp_at_k(perturbed, pop, 3));
}

TEST_CASE("promoting a relevant item one rank never decreases ndcg") {
    std::mt19937_64 rng(555);
    for (int trial = 0; trial < 200; ++trial) {
        auto inst = oracle::random_instance(rng, 6, 20);
        for (const auto& [user, ids] : inst.lists) {
            if (ids.size() < 2) continue;
            const auto& rel = inst.relevant.at(user);
            for (size_t pos = 1; pos < ids.size(); ++pos) {
                if (!rel.count(ids[pos]) || rel.count(ids[pos - 1])) continue;
                auto promoted = ids;
                std::swap(promoted[pos], promoted[pos - 1]);
                CHECK(ndcg_at_k(list_of(user, promoted), rel, inst.k) >=
                      ndcg_at_k(list_of(user, ids), rel, inst.k) - 1e-15);
                break;
            }
        }
    }
}

TEST_CASE("moving a recommendation from head to tail never decreases aplt") {
    PopularityProfile pop;
    pop.head = {"h1", "h2", "h3"};
    std::vector<std::string> ids = {"h1", "t1", "h2", "t2"};
    double before = aplt_at_k(list_of("u", ids), pop, 4);
    ids[0] = "t9";  // head slot replaced by an unlisted tail item
    double after = aplt_at_k(list_of("u", ids), pop, 4);
    CHECK(after >= before);
    CHECK(after == doctest::Approx(0.75));
}

// ---------------------------------------------------------------------------
// PopularityProfile
// ---------------------------------------------------------------------------

TEST_CASE("popularity profile partitions the catalog") {
    std::mt19937_64 rng(777);
    auto log = testutil::random_log(rng, 12, 20, 3, 9);
    auto m = SparseInteractionMatrix::from_log(log);
    auto pop = PopularityProfile::from_matrix(m, 0.2);

    long total = 0;
    for (const auto& [id, c] : pop.counts) {
        total += c;
        CHECK(pop.p_seen.at(id) >= 0.0);
        CHECK(pop.p_seen.at(id) <= 1.0);
    }
    CHECK(total == pop.total);
    CHECK(pop.counts.size() == static_cast<size_t>(m.n_items()));
    size_t expected_head = std::max<size_t>(1, static_cast<size_t>(std::llround(0.2 * m.n_items())));
    CHECK(pop.head.size() == expected_head);
    for (const auto& h : pop.head) CHECK(pop.counts.count(h));
    size_t tail = 0;
    for (const auto& [id, c] : pop.counts)
        if (pop.in_tail(id)) ++tail;
    CHECK(tail + pop.head.size() == pop.counts.size());
}
