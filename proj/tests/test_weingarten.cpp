#include <catch2/catch_amalgamated.hpp>

#include "freeprob/weingarten.hpp"

using namespace freeprob;

namespace {

// Independent 2x2 oracle for n = 2: with x = Wg(N, id) and y = Wg(N, (12)),
// the defining identity reads N^2 x + N y = 1 (sigma = id) and
// N x + N^2 y = 0 (sigma = (12)). Solving gives x = 1/(N^2-1),
// y = -1/(N(N^2-1)).
std::pair<Rational, Rational> n2_oracle(long N) {
    const Rational n2(BigInt(N) * N);
    const Rational x = 1 / (n2 - 1);
    const Rational y = -x / N;
    return {x, y};
}

}  // namespace

TEST_CASE("n = 1 table") {
    for (long N : {1L, 2L, 5L, 16L}) {
        const WeingartenTable t(1, N);
        CHECK(t.at(CycleType({1})) == Rational(1, N));
    }
}

TEST_CASE("n = 2 closed values against the 2x2 oracle") {
    for (long N = 2; N <= 16; ++N) {
        const WeingartenTable t(2, N);
        const auto [x, y] = n2_oracle(N);
        CHECK(t.at(CycleType({1, 1})) == x);
        CHECK(t.at(CycleType({2})) == y);
    }
    // Spot values at N = 3: 1/8 and -1/24.
    const WeingartenTable t3(2, 3);
    CHECK(t3.at(CycleType({1, 1})) == Rational(1, 8));
    CHECK(t3.at(CycleType({2})) == Rational(-1, 24));
}

TEST_CASE("convolution identity holds exactly") {
    for (int n = 1; n <= 4; ++n) {
        for (long N : {static_cast<long>(n), 8L}) {
            const WeingartenTable t(n, N);
            CHECK(verify_convolution_identity(t));
        }
    }
}

TEST_CASE("class solve matches the full-system solve at n = 3") {
    for (long N : {3L, 5L, 10L}) {
        const WeingartenTable t(3, N);
        const auto full = weingarten_full_system(3, N);
        REQUIRE(full.size() == t.values().size());
        for (const auto& [type, value] : full) CHECK(t.at(type) == value);
    }
}

TEST_CASE("errors") {
    CHECK_THROWS_AS(WeingartenTable(3, 2), std::domain_error);
    CHECK_THROWS_AS(WeingartenTable(7, 16), std::invalid_argument);
    const WeingartenTable t(2, 4);
    CHECK_THROWS_AS(t.at(CycleType({3})), std::invalid_argument);
}

TEST_CASE("asymptotic phi closed form") {
    CHECK(asymptotic_phi(CycleType({1, 1, 1})) == 1);
    CHECK(asymptotic_phi(CycleType({2})) == -1);
    CHECK(asymptotic_phi(CycleType({3})) == 2);
    CHECK(asymptotic_phi(CycleType({4})) == -5);
    CHECK(asymptotic_phi(CycleType({3, 2})) == -2);
}

TEST_CASE("phi is the observed limit of exact tables") {
    // Extrapolation of N^{2n-#a} Wg(N, a): differences to phi shrink along
    // N = 10, 20, 40. Checked for the 3-cycle where phi = 2.
    const CycleType three({3});
    std::vector<Rational> err;
    for (long N : {10L, 20L, 40L}) {
        const WeingartenTable t(3, N);
        const Rational scaled = Rational(bigint_pow(N, 2 * 3 - 1)) * t.at(three);
        Rational e = scaled - asymptotic_phi(three);
        if (e < 0) e = -e;
        err.push_back(e);
    }
    CHECK(err[1] < err[0]);
    CHECK(err[2] < err[1]);
}

TEST_CASE("extrapolation gate for every cycle type up to n = 4") {
    for (int n = 1; n <= 4; ++n) {
        for (const auto& type : integer_partitions(n)) {
            std::vector<Rational> err;
            for (long N : {8L, 16L, 32L, 64L}) {
                const WeingartenTable t(n, N);
                const Rational scaled =
                    Rational(bigint_pow(N, 2 * n - type.block_count())) * t.at(type);
                Rational e = scaled - asymptotic_phi(type);
                if (e < 0) e = -e;
                err.push_back(e);
            }
            const bool all_zero = err[0] == 0 && err[3] == 0;
            if (all_zero) {
                SUCCEED();
                continue;
            }
            CHECK(err[1] < err[0]);
            CHECK(err[2] < err[1]);
            CHECK(err[3] < err[2]);
            CHECK(err[3] * 16 <= err[0]);
        }
    }
}

TEST_CASE("genus bound over permutation pairs") {
    for (int n = 1; n <= 5; ++n) {
        const auto sn = enumerate_sn(n);
        const auto gamma = Permutation::full_cycle(n);
        int leading_pairs = 0;
        for (const auto& alpha : sn) {
            for (const auto& beta : sn) {
                const int total = alpha.cycle_count() +
                                  compose(alpha.inverse(), beta).cycle_count() +
                                  compose(beta.inverse(), gamma).cycle_count();
                CHECK(total <= 2 * n + 1);
                if (total == 2 * n + 1) ++leading_pairs;
            }
        }
        CHECK(leading_pairs > 0);  // alpha = beta = id always attains it
    }
}

TEST_CASE("haar conjugation expectation, literal cases") {
    const long N = 4;
    const auto tr_a = [](long) { return Rational(4); };  // A = I_4, Tr(A^j) = 4
    // B = diag(1, 2, 0, 0): Tr(B^0) = 4, otherwise 1 + 2^j.
    const auto tr_b4 = [](long j) {
        return j == 0 ? Rational(4) : Rational(1 + bigint_pow(2, static_cast<unsigned>(j)));
    };

    // n = 1, k = 0: the unitary cancels, E Tr(U I U* B) = Tr(B).
    const Rational e0 = haar_conjugation_expectation<Rational>({0}, tr_a, tr_b4, N);
    CHECK(e0 == tr_b4(1));

    // n = 1, k = 1: E Tr(U A U* B) = Tr(A) Tr(B) / N.
    const auto tr_a2 = [](long j) {
        // A = diag(1, -1, 2, 0).
        Rational s = 0;
        for (long v : {1L, -1L, 2L, 0L}) {
            Rational p = 1;
            for (long i = 0; i < j; ++i) p *= v;
            s += p;
        }
        return s;
    };
    const Rational e1 = haar_conjugation_expectation<Rational>({1}, tr_a2, tr_b4, N);
    CHECK(e1 == tr_a2(1) * tr_b4(1) / N);

    // n = 2, k = (1,1), A = B = I_N: the word collapses to Tr(I) = N.
    for (long dim : {2L, 3L, 6L}) {
        const auto tr_id = [dim](long) { return Rational(dim); };
        const Rational e2 = haar_conjugation_expectation<Rational>({1, 1}, tr_id, tr_id, dim);
        CHECK(e2 == Rational(dim));
    }
}

TEST_CASE("haar conjugation expectation rejects bad input") {
    const auto tr = [](long) { return Rational(1); };
    CHECK_THROWS_AS(haar_conjugation_expectation<Rational>({}, tr, tr, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(haar_conjugation_expectation<Rational>({-1}, tr, tr, 4),
                    std::invalid_argument);
    CHECK_THROWS_AS((haar_conjugation_expectation<Rational>({1, 1, 1}, tr, tr, 2)),
                    std::domain_error);
}
