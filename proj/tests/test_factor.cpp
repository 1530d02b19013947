#include <algorithm>
#include <random>

#include "doctest.h"
#include "relnet/factor.hpp"

using namespace relnet;

namespace {

Factor random_factor(std::mt19937_64& rng, std::vector<NodeId> scope, const std::vector<std::size_t>& card_of) {
    std::vector<std::size_t> cards;
    std::size_t n = 1;
    for (NodeId v : scope) {
        cards.push_back(card_of[v]);
        n *= card_of[v];
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> values(n);
    for (double& x : values) x = u(rng);
    return Factor(std::move(scope), std::move(cards), std::move(values));
}

std::vector<NodeId> random_scope(std::mt19937_64& rng, std::size_t vars) {
    std::vector<NodeId> scope;
    for (NodeId v = 0; v < vars; ++v) {
        if (rng() % 2) scope.push_back(v);
    }
    std::shuffle(scope.begin(), scope.end(), rng);
    return scope;
}

void check_close(const Factor& a, const Factor& b, double tol) {
    REQUIRE(a.scope() == b.scope());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(tol));
}

}  // namespace

TEST_CASE("construction validates shape") {
    CHECK_THROWS_AS(Factor({0, 1}, {2}, {1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Factor({0}, {2}, {1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Factor({0, 0}, {2, 2}, {1, 1, 1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Factor({0}, {0}, {}), std::invalid_argument);
    Factor s;
    CHECK(s.is_scalar());
    CHECK(s.values() == std::vector<double>{1.0});
}

TEST_CASE("multiply examples") {
    const Factor a({0}, {2}, {0.3, 0.7});
    const Factor scaled = multiply(a, Factor::scalar(2.0));
    CHECK(scaled.values()[0] == doctest::Approx(0.6));
    CHECK(scaled.values()[1] == doctest::Approx(1.4));
    CHECK(multiply(a, Factor::ones({0}, {2})) == a);

    const Factor f({0}, {2}, {0.5, 0.5});
    const Factor g({1}, {2}, {0.2, 0.8});
    const Factor fg = multiply(f, g);
    CHECK(fg.scope() == std::vector<NodeId>{0, 1});
    const std::vector<double> expected{0.1, 0.4, 0.1, 0.4};
    for (std::size_t i = 0; i < 4; ++i) CHECK(fg.values()[i] == doctest::Approx(expected[i]));

    CHECK_THROWS_AS(multiply(Factor({0}, {2}, {1, 1}), Factor({0}, {3}, {1, 1, 1})), std::invalid_argument);
}

TEST_CASE("marginalize examples") {
    const Factor f({0, 1}, {2, 2}, {0.1, 0.4, 0.1, 0.4});
    const NodeId b[] = {1};
    const Factor m = marginalize(f, b);
    CHECK(m.scope() == std::vector<NodeId>{0});
    CHECK(m.values()[0] == doctest::Approx(0.5));
    CHECK(m.values()[1] == doctest::Approx(0.5));
    CHECK(marginalize(f, std::span<const NodeId>{}) == f);

    // P(a) P(b|a) summed over everything.
    const Factor joint = multiply(Factor({0}, {2}, {0.3, 0.7}), Factor({0, 1}, {2, 2}, {0.9, 0.1, 0.2, 0.8}));
    const NodeId all[] = {0, 1};
    CHECK(marginalize(joint, all).values()[0] == doctest::Approx(1.0).epsilon(1e-15));

    const NodeId missing[] = {5};
    CHECK_THROWS_AS(marginalize(f, missing), std::invalid_argument);
}

TEST_CASE("reduce examples") {
    const Factor f({0, 1}, {2, 3}, {1, 2, 3, 4, 5, 6});
    const Factor r = reduce(f, {{0, 1}});
    CHECK(r.scope() == std::vector<NodeId>{1});
    CHECK(r.values() == std::vector<double>{4, 5, 6});
    CHECK(reduce(f, {}) == f);
    const Factor col = reduce(f, {{1, 2}});
    CHECK(col.values() == std::vector<double>{3, 6});

    const Factor cpt({0, 1}, {2, 2}, {0.9, 0.1, 0.2, 0.8});
    const Factor row = reduce(cpt, {{0, 1}});
    CHECK(row.sum() == doctest::Approx(1.0));
    CHECK(row.values()[0] == doctest::Approx(0.2));

    CHECK_THROWS_AS(reduce(f, {{0, 2}}), std::out_of_range);
    CHECK_THROWS_AS(reduce(f, {{7, 0}}), std::invalid_argument);
    CHECK(reduce_matching(f, {{7, 0}, {0, 0}}).values() == std::vector<double>{1, 2, 3});
}

TEST_CASE("multiply is commutative and associative after canonicalization") {
    std::mt19937_64 rng(7);
    const std::vector<std::size_t> cards{2, 3, 2, 4, 3};
    for (int trial = 0; trial < 300; ++trial) {
        const Factor f = random_factor(rng, random_scope(rng, 5), cards);
        const Factor g = random_factor(rng, random_scope(rng, 5), cards);
        const Factor h = random_factor(rng, random_scope(rng, 5), cards);
        check_close(canonical(multiply(f, g)), canonical(multiply(g, f)), 1e-15);
        check_close(canonical(multiply(multiply(f, g), h)), canonical(multiply(f, multiply(g, h))), 1e-15);
    }
}

TEST_CASE("marginalizing a disjoint product scales by the mass of the other factor") {
    std::mt19937_64 rng(8);
    const std::vector<std::size_t> cards{2, 3, 2, 3, 2, 2};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<NodeId> fs, gs;
        for (NodeId v = 0; v < 6; ++v) (rng() % 2 ? fs : gs).push_back(v);
        const Factor f = random_factor(rng, fs, cards);
        const Factor g = random_factor(rng, gs, cards);
        const Factor m = marginalize(multiply(f, g), g.scope());

        // Nested-loop oracle: m[x] = f[x] * sum_y g[y].
        double mass = 0.0;
        for (double v : g.values()) mass += v;
        REQUIRE(m.scope() == f.scope());
        for (std::size_t i = 0; i < f.size(); ++i) {
            CHECK(m.values()[i] == doctest::Approx(f.values()[i] * mass).epsilon(1e-13));
        }
    }
}

TEST_CASE("reorder round trips and index arithmetic is row-major") {
    const Factor f({3, 1, 2}, {2, 3, 2}, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    CHECK(f.index_of({{3, 1}, {1, 2}, {2, 1}}) == 11);
    const NodeId perm[] = {2, 3, 1};
    const Factor r = reorder(f, perm);
    CHECK(r.values()[r.index_of({{3, 1}, {1, 0}, {2, 1}})] == 7);
    const NodeId back[] = {3, 1, 2};
    CHECK(reorder(r, back) == f);
}

TEST_CASE("in-place multiply, divide, and zeroing") {
    Factor t({0, 1}, {2, 2}, {1, 2, 3, 4});
    multiply_in_place(t, Factor({1}, {2}, {10, 0}));
    CHECK(t.values() == std::vector<double>{10, 0, 30, 0});
    divide_in_place(t, Factor({1}, {2}, {10, 0}));
    CHECK(t.values() == std::vector<double>{1, 0, 3, 0});
    zero_incompatible(t, 0, 1);
    CHECK(t.values() == std::vector<double>{0, 0, 3, 0});
    CHECK_THROWS_AS(multiply_in_place(t, Factor({4}, {2}, {1, 1})), std::invalid_argument);
    Factor z({0}, {2}, {0, 0});
    CHECK(z.normalize() == 0.0);
    CHECK(z.values() == std::vector<double>{0, 0});
}
