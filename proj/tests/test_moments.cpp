#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "freeprob/moments.hpp"
#include "freeprob/ncpart.hpp"
#include "freeprob/spectra.hpp"

using namespace freeprob;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Oracle: evaluate m_n = sum over NC(n) of the cumulant block products by
// explicit enumeration, independent of the series recursion in the library.
double moment_by_nc_enumeration(const CumulantSequence& kappa, int n) {
    double sum = 0.0;
    for_each_noncrossing(n, [&](const std::vector<std::vector<int>>& blocks) {
        double prod = 1.0;
        for (const auto& b : blocks) prod *= kappa.cumulant(static_cast<int>(b.size()));
        sum += prod;
    });
    return sum;
}

MomentSequence random_moments(std::mt19937& rng, int K) {
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> m(K);
    for (auto& v : m) v = u(rng);
    return MomentSequence(std::move(m));
}

// Moments of a random discrete probability measure on [-1, 1].
MomentSequence random_measure_moments(std::mt19937& rng, int K) {
    std::uniform_real_distribution<double> loc(-1.0, 1.0);
    std::uniform_real_distribution<double> wt(0.1, 1.0);
    const int atoms = 2 + static_cast<int>(rng() % 5);
    std::vector<double> x(atoms), w(atoms);
    double total = 0.0;
    for (int i = 0; i < atoms; ++i) {
        x[i] = loc(rng);
        w[i] = wt(rng);
        total += w[i];
    }
    std::vector<double> m(K, 0.0);
    for (int i = 0; i < atoms; ++i) {
        double p = 1.0;
        for (int j = 1; j <= K; ++j) {
            p *= x[i];
            m[j - 1] += (w[i] / total) * p;
        }
    }
    return MomentSequence(std::move(m));
}

}  // namespace

TEST_CASE("moment to cumulant, hand cases") {
    // Point mass at c: only the first cumulant survives.
    const auto kc = moments_to_cumulants(point_mass_moments(1.7, 6));
    CHECK_THAT(kc.cumulant(1), WithinAbs(1.7, 1e-12));
    for (int j = 2; j <= 6; ++j) CHECK_THAT(kc.cumulant(j), WithinAbs(0.0, 1e-10));

    // Symmetric Bernoulli +-1: m4 = k4 + 2 k2^2 forces k4 = 1 - 2 = -1.
    const auto kb = moments_to_cumulants(bernoulli_pm1_moments(4));
    CHECK_THAT(kb.cumulant(1), WithinAbs(0.0, 1e-12));
    CHECK_THAT(kb.cumulant(2), WithinAbs(1.0, 1e-12));
    CHECK_THAT(kb.cumulant(3), WithinAbs(0.0, 1e-12));
    CHECK_THAT(kb.cumulant(4), WithinAbs(-1.0, 1e-12));
}

TEST_CASE("cumulant to moment, hand cases") {
    // All cumulants 1: m_n counts NC(n), so m = 1, 2, 5, 14.
    const auto m1 = cumulants_to_moments(CumulantSequence({1, 1, 1, 1}));
    CHECK_THAT(m1.moment(1), WithinAbs(1.0, 1e-12));
    CHECK_THAT(m1.moment(2), WithinAbs(2.0, 1e-12));
    CHECK_THAT(m1.moment(3), WithinAbs(5.0, 1e-12));
    CHECK_THAT(m1.moment(4), WithinAbs(14.0, 1e-12));

    // Semicircle cumulants (0,1,0,0): m4 counts non-crossing pair partitions.
    const auto ms = cumulants_to_moments(CumulantSequence({0, 1, 0, 0}));
    CHECK_THAT(ms.moment(1), WithinAbs(0.0, 1e-12));
    CHECK_THAT(ms.moment(2), WithinAbs(1.0, 1e-12));
    CHECK_THAT(ms.moment(3), WithinAbs(0.0, 1e-12));
    CHECK_THAT(ms.moment(4), WithinAbs(2.0, 1e-12));

    const auto mp = cumulants_to_moments(CumulantSequence({1, 0, 0}));
    for (int j = 1; j <= 3; ++j) CHECK_THAT(mp.moment(j), WithinAbs(1.0, 1e-12));
    const auto mz = cumulants_to_moments(CumulantSequence({0, 0, 0}));
    for (int j = 1; j <= 3; ++j) CHECK_THAT(mz.moment(j), WithinAbs(0.0, 1e-12));
}

TEST_CASE("series recursion matches NC enumeration") {
    std::mt19937 rng(101);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> k(8);
        for (auto& v : k) v = u(rng);
        const CumulantSequence kappa(k);
        const auto m = cumulants_to_moments(kappa);
        for (int n = 1; n <= 8; ++n)
            CHECK_THAT(m.moment(n), WithinAbs(moment_by_nc_enumeration(kappa, n), 1e-9));
    }
}

TEST_CASE("round trip at 1e-12 for 100 random sequences") {
    std::mt19937 rng(202);
    for (int trial = 0; trial < 100; ++trial) {
        const int K = 1 + static_cast<int>(rng() % 10);
        const auto m = random_measure_moments(rng, K);
        const auto back = cumulants_to_moments(moments_to_cumulants(m));
        for (int j = 1; j <= K; ++j) {
            const double scale = std::max(1.0, std::abs(m.moment(j)));
            CHECK(std::abs(back.moment(j) - m.moment(j)) <= 1e-12 * scale);
        }
    }
}

TEST_CASE("transform caps") {
    CHECK_THROWS_AS(moments_to_cumulants(MomentSequence(std::vector<double>(13, 0.0))),
                    std::invalid_argument);
    CHECK_THROWS_AS(cumulants_to_moments(CumulantSequence(std::vector<double>(13, 0.0))),
                    std::invalid_argument);
}

TEST_CASE("squared-aspect moments and the quadrature gate") {
    for (double lambda : {0.25, 0.5, 1.0, 2.0, 4.0}) {
        const auto m = mp_moments(lambda, 6);
        CHECK_THAT(m.moment(1), WithinAbs(1.0, 1e-12));
        const MpLaw law(lambda);
        for (int n = 1; n <= 6; ++n)
            CHECK_THAT(m.moment(n), WithinAbs(law.moment_by_quadrature(n), 1e-6));
    }
    CHECK_THAT(mp_moments(1.0, 2).moment(2), WithinAbs(2.0, 1e-12));
    CHECK_THAT(mp_moments(0.5, 2).moment(2), WithinAbs(1.5, 1e-12));
    const auto m3 = mp_moments(0.5, 3);
    CHECK_THAT(m3.moment(3), WithinAbs(2.75, 1e-12));
    CHECK_THROWS_AS(mp_moments(0.0, 4), std::invalid_argument);
}

TEST_CASE("semicircle moments") {
    const auto m = semicircle_moments(10);
    CHECK_THAT(m.moment(2), WithinAbs(1.0, 1e-12));
    CHECK_THAT(m.moment(4), WithinAbs(2.0, 1e-12));
    CHECK_THAT(m.moment(3), WithinAbs(0.0, 1e-12));
    for (int j = 1; j <= 5; ++j) {
        CHECK_THAT(m.moment(2 * j - 1), WithinAbs(0.0, 1e-12));
        CHECK_THAT(m.moment(2 * j),
                   WithinAbs(catalan(j).convert_to<double>(), 1e-12));
    }
}

TEST_CASE("free word moments, hand cases") {
    const auto mw = mp_moments(0.5, 8);
    const auto my = bernoulli_pm1_moments(8);

    CHECK_THAT(free_word_moment(NoncommWord("WY"), mw, my),
               WithinAbs(mw.moment(1) * my.moment(1), 1e-12));
    CHECK_THAT(free_word_moment(NoncommWord("WWW"), mw, my),
               WithinAbs(mw.moment(3), 1e-12));
    // Freeness identity for the alternating word of length 4.
    CHECK_THAT(free_word_moment(NoncommWord("WYWY"), mw, my), WithinAbs(1.0, 1e-12));
}

TEST_CASE("alternating word of length 4 equals the freeness identity") {
    // phi(xyxy) = phi(x^2) phi(y)^2 + phi(x)^2 phi(y^2) - phi(x)^2 phi(y)^2,
    // from the three monochromatic non-crossing partitions of W Y W Y.
    std::mt19937 rng(303);
    for (int trial = 0; trial < 25; ++trial) {
        const auto mx = random_moments(rng, 4);
        const auto my = random_moments(rng, 4);
        const double expected = mx.moment(2) * my.moment(1) * my.moment(1) +
                                mx.moment(1) * mx.moment(1) * my.moment(2) -
                                mx.moment(1) * mx.moment(1) * my.moment(1) * my.moment(1);
        CHECK_THAT(free_word_moment(NoncommWord("WYWY"), mx, my),
                   WithinAbs(expected, 1e-10));
    }
}

TEST_CASE("unit y collapses a word to the marginal moment") {
    std::mt19937 rng(404);
    const auto one = point_mass_moments(1.0, 8);
    for (int trial = 0; trial < 25; ++trial) {
        const auto mw = random_moments(rng, 8);
        const int len = 2 + static_cast<int>(rng() % 7);
        std::string word;
        int wdeg = 0;
        for (int i = 0; i < len; ++i) {
            if (rng() % 2) {
                word += 'W';
                ++wdeg;
            } else {
                word += 'Y';
            }
        }
        if (wdeg == 0) {
            word[0] = 'W';
            wdeg = 1;
        }
        CHECK_THAT(free_word_moment(NoncommWord(word), mw, one),
                   WithinAbs(mw.moment(wdeg), 1e-9));
    }
}

TEST_CASE("free word moment errors") {
    const auto m4 = bernoulli_pm1_moments(4);
    CHECK_THROWS_AS(free_word_moment(NoncommWord(""), m4, m4), std::invalid_argument);
    CHECK_THROWS_AS(free_word_moment(NoncommWord("WWWWW"), m4, m4), std::out_of_range);
    CHECK_THROWS_AS(free_word_moment(NoncommWord(std::string(17, 'W')),
                                     MomentSequence(std::vector<double>(17, 0.0)), m4),
                    std::invalid_argument);
    CHECK_THROWS_AS(NoncommWord("WXZ"), std::invalid_argument);
}

TEST_CASE("free polynomial moment") {
    const auto mw = mp_moments(1.0, 6);
    const auto my = bernoulli_pm1_moments(6);

    const auto p = NoncommPolynomial({{2.0, NoncommWord("W")}, {3.0, NoncommWord("Y")}});
    CHECK_THAT(free_poly_moment(p, mw, my).real(),
               WithinAbs(2.0 * mw.moment(1) + 3.0 * my.moment(1), 1e-12));

    const auto commutator = NoncommPolynomial::from_word("WY") - NoncommPolynomial::from_word("YW");
    CHECK_THAT(free_poly_moment(commutator, mw, my).real(), WithinAbs(0.0, 1e-12));

    const auto c = NoncommPolynomial::constant({2.5, -1.0});
    const auto v = free_poly_moment(c, mw, my);
    CHECK_THAT(v.real(), WithinAbs(2.5, 1e-12));
    CHECK_THAT(v.imag(), WithinAbs(-1.0, 1e-12));
}

TEST_CASE("genus-zero sum, hand cases") {
    const auto mw = mp_moments(0.5, 8);
    const auto my = bernoulli_pm1_moments(8);

    CHECK_THAT(genus_zero_moment({1}, mw, my),
               WithinAbs(mw.moment(1) * my.moment(1), 1e-12));
    CHECK_THAT(genus_zero_moment({1, 1}, mw, my), WithinAbs(1.0, 1e-12));
    // k = (0, 1): phi(y w y) = phi(w) phi(y^2) by free factorization.
    CHECK_THAT(genus_zero_moment({0, 1}, mw, my),
               WithinAbs(mw.moment(1) * my.moment(2), 1e-12));
}

TEST_CASE("genus-zero sum equals the partition engine") {
    const std::vector<MomentSequence> ws = {mp_moments(0.5, 12), mp_moments(1.0, 12),
                                            mp_moments(2.0, 12)};
    const std::vector<MomentSequence> ys = {bernoulli_pm1_moments(4),
                                            point_mass_moments(1.0, 4),
                                            uniform_moments(0.0, 1.0, 4)};
    for (int n = 1; n <= 3; ++n) {
        std::vector<long> k(n, 0);
        while (true) {
            for (const auto& mw : ws) {
                for (const auto& my : ys) {
                    const double lhs = genus_zero_moment(k, mw, my);
                    const double rhs = free_word_moment(alternating_word(k), mw, my);
                    CHECK_THAT(lhs, WithinAbs(rhs, 1e-10));
                }
            }
            int i = 0;
            while (i < n && k[i] == 2) k[i++] = 0;
            if (i == n) break;
            ++k[i];
        }
    }
}

TEST_CASE("free additive convolution") {
    const auto sc = semicircle_moments(6);
    const auto two = free_additive_convolution(sc, sc);
    CHECK_THAT(two.moment(1), WithinAbs(0.0, 1e-12));
    CHECK_THAT(two.moment(2), WithinAbs(2.0, 1e-12));

    const auto da = point_mass_moments(1.25, 6);
    const auto db = point_mass_moments(-0.5, 6);
    const auto dsum = free_additive_convolution(da, db);
    CHECK_THAT(dsum.moment(1), WithinAbs(0.75, 1e-12));
    CHECK_THAT(dsum.moment(2), WithinAbs(0.5625, 1e-12));

    // nu_1 boxplus nu_1: cumulants double to (2,2,...), m2 = 2 + 4.
    const auto m = free_additive_convolution(mp_moments(1.0, 6), mp_moments(1.0, 6));
    CHECK_THAT(m.moment(2), WithinAbs(6.0, 1e-12));

    // delta_0 is the identity.
    const auto z = point_mass_moments(0.0, 6);
    const auto same = free_additive_convolution(mp_moments(0.5, 6), z);
    for (int j = 1; j <= 6; ++j)
        CHECK_THAT(same.moment(j), WithinAbs(mp_moments(0.5, 6).moment(j), 1e-12));
}

TEST_CASE("free additive convolution is commutative and associative") {
    std::mt19937 rng(505);
    for (int trial = 0; trial < 20; ++trial) {
        const auto a = random_moments(rng, 6);
        const auto b = random_moments(rng, 6);
        const auto c = random_moments(rng, 6);
        const auto ab = free_additive_convolution(a, b);
        const auto ba = free_additive_convolution(b, a);
        const auto ab_c = free_additive_convolution(ab, c);
        const auto a_bc = free_additive_convolution(a, free_additive_convolution(b, c));
        for (int j = 1; j <= 6; ++j) {
            CHECK_THAT(ab.moment(j), WithinAbs(ba.moment(j), 1e-10));
            CHECK_THAT(ab_c.moment(j), WithinAbs(a_bc.moment(j), 1e-9));
        }
    }
}

TEST_CASE("free multiplicative convolution") {
    const auto a = mp_moments(0.5, 6);
    const auto b = bernoulli_pm1_moments(6);
    const auto prod = free_multiplicative_convolution(a, b);
    CHECK_THAT(prod.moment(1), WithinAbs(a.moment(1) * b.moment(1), 1e-12));
    CHECK_THAT(prod.moment(2),
               WithinAbs(a.moment(2) * b.moment(1) * b.moment(1) +
                             a.moment(1) * a.moment(1) * b.moment(2) -
                             a.moment(1) * a.moment(1) * b.moment(1) * b.moment(1),
                         1e-12));

    // delta_c scales: m_n -> c^n m_n.
    const double c = 0.75;
    const auto scaled = free_multiplicative_convolution(point_mass_moments(c, 6), a);
    double cpow = 1.0;
    for (int j = 1; j <= 6; ++j) {
        cpow *= c;
        CHECK_THAT(scaled.moment(j), WithinAbs(cpow * a.moment(j), 1e-10));
    }

    // delta_1 is the identity.
    const auto same = free_multiplicative_convolution(point_mass_moments(1.0, 6), a);
    for (int j = 1; j <= 6; ++j) CHECK_THAT(same.moment(j), WithinAbs(a.moment(j), 1e-10));

    // Tracial symmetry: the two argument orders agree.
    const auto flip = free_multiplicative_convolution(b, a);
    for (int j = 1; j <= 6; ++j) CHECK_THAT(prod.moment(j), WithinAbs(flip.moment(j), 1e-10));

    CHECK_THROWS_AS(free_multiplicative_convolution(mp_moments(1.0, 9), mp_moments(1.0, 9)),
                    std::invalid_argument);
}

TEST_CASE("alternating word builder") {
    CHECK(alternating_word({2, 0, 1}).letters == "WWYYWY");
    CHECK(alternating_word({0}).letters == "Y");
    CHECK_THROWS_AS(alternating_word({-1}), std::invalid_argument);
}
