#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <set>

#include "freeprob/perm.hpp"

using namespace freeprob;

TEST_CASE("composition convention and group laws") {
    const auto id = Permutation::identity(3);
    const auto s = parse_cycles("(1 3)(2)");
    CHECK(compose(id, s) == s);
    CHECK(compose(s, id) == s);
    CHECK(compose(s, s.inverse()) == Permutation::identity(3));

    // (1 2) after (2 3): image chase under (a o b)(i) = a(b(i)) gives the
    // 3-cycle 1 -> 2 -> 3 -> 1.
    const auto t12 = parse_cycles("(1 2)(3)");
    const auto t23 = parse_cycles("(2 3)(1)");
    const auto c = compose(t12, t23);
    CHECK(c == Permutation(std::vector<int>{2, 3, 1}));
    CHECK(c.cycle_string() == "(1 2 3)");
}

TEST_CASE("inverse") {
    CHECK(Permutation::identity(4).inverse() == Permutation::identity(4));
    // (1 2 4)(3) inverts cycle-wise to (1 4 2)(3), images [4,1,3,2].
    const auto a = parse_cycles("(1 2 4)(3)");
    CHECK(a.inverse() == Permutation(std::vector<int>{4, 1, 3, 2}));
    const auto t = parse_cycles("(2 5)(1)(3)(4)");
    CHECK(t.inverse() == t);
}

TEST_CASE("cycle decomposition") {
    // alpha(1)=2, alpha(2)=4, alpha(3)=3, alpha(4)=1 decomposes as
    // {(1,2,4),(3)} with two cycles of lengths 3 and 1.
    const Permutation alpha(std::vector<int>{2, 4, 3, 1});
    const auto cyc = alpha.cycles();
    REQUIRE(cyc.size() == 2);
    CHECK(cyc[0] == std::vector<int>{1, 2, 4});
    CHECK(cyc[1] == std::vector<int>{3});
    CHECK(alpha.cycle_count() == 2);
    CHECK(alpha.cycle_type() == CycleType({3, 1}));
    CHECK(alpha.cycle_string() == "(1 2 4)(3)");

    CHECK(Permutation::identity(5).cycle_count() == 5);
    CHECK(Permutation::identity(4).cycle_type() == CycleType({1, 1, 1, 1}));
    CHECK(Permutation::full_cycle(5).cycle_count() == 1);
    CHECK(Permutation::full_cycle(4).cycle_type() == CycleType({4}));
}

TEST_CASE("full cycle") {
    CHECK(Permutation::full_cycle(1) == Permutation::identity(1));
    CHECK(Permutation::full_cycle(3) == Permutation(std::vector<int>{2, 3, 1}));
    CHECK_THROWS_AS(Permutation::full_cycle(0), std::invalid_argument);
}

TEST_CASE("enumerate_sn") {
    CHECK(enumerate_sn(1).size() == 1);
    CHECK(enumerate_sn(3).size() == 6);
    const auto s5 = enumerate_sn(5);
    CHECK(s5.size() == 120);
    std::set<std::string> distinct;
    for (const auto& p : s5) distinct.insert(p.cycle_string());
    CHECK(distinct.size() == 120);
    CHECK_THROWS_AS(enumerate_sn(7), std::invalid_argument);
    CHECK(enumerate_sn(7, 7).size() == 5040);
}

TEST_CASE("parse and print cycle notation") {
    const auto a = parse_cycles("(1 2 4)(3)");
    CHECK(a.cycle_string() == "(1 2 4)(3)");
    CHECK(parse_cycles(a.cycle_string()) == a);
    CHECK_THROWS_AS(parse_cycles("(1 2)(2 3)"), std::invalid_argument);
    CHECK_THROWS_AS(parse_cycles("nonsense"), std::invalid_argument);
}

TEST_CASE("bad constructions") {
    CHECK_THROWS_AS(Permutation(std::vector<int>{1, 1}), std::invalid_argument);
    CHECK_THROWS_AS(Permutation(std::vector<int>{0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(compose(Permutation::identity(2), Permutation::identity(3)),
                    std::invalid_argument);
    CHECK_THROWS_AS(CycleType({2, 0}), std::invalid_argument);
}

TEST_CASE("associativity on sampled triples") {
    std::mt19937 rng(42);
    for (int n = 2; n <= 5; ++n) {
        const auto sn = enumerate_sn(n);
        std::uniform_int_distribution<std::size_t> pick(0, sn.size() - 1);
        for (int trial = 0; trial < 50; ++trial) {
            const auto& s = sn[pick(rng)];
            const auto& t = sn[pick(rng)];
            const auto& r = sn[pick(rng)];
            CHECK(compose(compose(s, t), r) == compose(s, compose(t, r)));
        }
    }
}

TEST_CASE("cycle type is conjugation invariant") {
    std::mt19937 rng(7);
    for (int n = 2; n <= 5; ++n) {
        const auto sn = enumerate_sn(n);
        std::uniform_int_distribution<std::size_t> pick(0, sn.size() - 1);
        for (int trial = 0; trial < 50; ++trial) {
            const auto& s = sn[pick(rng)];
            const auto& t = sn[pick(rng)];
            CHECK(compose(compose(s, t), s.inverse()).cycle_type() == t.cycle_type());
        }
    }
}

TEST_CASE("pair genus bound against the full cycle") {
    for (int n = 1; n <= 5; ++n) {
        const auto gamma = Permutation::full_cycle(n);
        for (const auto& s : enumerate_sn(n)) {
            const int lhs = s.cycle_count() + compose(s.inverse(), gamma).cycle_count();
            CHECK(lhs <= n + 1);
        }
    }
}

TEST_CASE("integer partitions") {
    CHECK(integer_partitions(1).size() == 1);
    CHECK(integer_partitions(5).size() == 7);
    CHECK(integer_partitions(6).size() == 11);
    for (const auto& t : integer_partitions(6)) CHECK(t.degree() == 6);
}
