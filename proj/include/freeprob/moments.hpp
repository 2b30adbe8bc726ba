#pragma once

// Moment-level free probability. Distributions live here only as truncated
// moment sequences; free cumulants are the working coordinates. Mixed moments
// of a free pair are sums over non-crossing partitions with monochromatic
// blocks, which is also how the free convolutions are computed. The
// genus-zero permutation sum gives the same mixed moments by a different
// route and is kept as an independent engine.

#include <complex>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/ncpart.hpp"
#include "freeprob/perm.hpp"
#include "freeprob/weingarten.hpp"

namespace freeprob {

inline constexpr int kTransformCap = 12;  // moment <-> cumulant order cap
inline constexpr int kWordCap = 16;       // mixed-moment word length cap

/// Truncated moment sequence m[1..K]; moment(0) is always 1.
class MomentSequence {
  public:
    MomentSequence() = default;
    explicit MomentSequence(std::vector<double> m) : m_(std::move(m)) {}

    int order() const { return static_cast<int>(m_.size()); }

    double moment(int j) const {
        if (j == 0) return 1.0;
        if (j < 0 || j > order())
            throw std::out_of_range("MomentSequence: insufficient moment order");
        return m_[j - 1];
    }

    const std::vector<double>& values() const { return m_; }

  private:
    std::vector<double> m_;
};

/// Truncated free-cumulant sequence kappa[1..K].
class CumulantSequence {
  public:
    CumulantSequence() = default;
    explicit CumulantSequence(std::vector<double> k) : k_(std::move(k)) {}

    int order() const { return static_cast<int>(k_.size()); }

    double cumulant(int j) const {
        if (j < 1 || j > order())
            throw std::out_of_range("CumulantSequence: insufficient cumulant order");
        return k_[j - 1];
    }

    const std::vector<double>& values() const { return k_; }

  private:
    std::vector<double> k_;
};

namespace detail {

/// c[s][t] = [x^t] (1 + sum_j m_j x^j)^s for s, t in [0, K]. Extended
/// precision: the downstream transforms cancel heavily at high order.
inline std::vector<std::vector<long double>> power_coefficients(
    const std::vector<long double>& m, int K) {
    std::vector<std::vector<long double>> c(K + 1, std::vector<long double>(K + 1, 0.0L));
    c[0][0] = 1.0L;
    for (int s = 1; s <= K; ++s) {
        for (int t = 0; t <= K; ++t) {
            long double acc = c[s - 1][t];  // j = 0 term (m_0 = 1)
            for (int j = 1; j <= t; ++j) acc += c[s - 1][t - j] * m[j - 1];
            c[s][t] = acc;
        }
    }
    return c;
}

}  // namespace detail

/// Invert m_n = sum_{pi in NC(n)} prod_{V in pi} kappa_|V|. Uses the
/// first-block decomposition m_n = sum_s kappa_s [x^{n-s}] M(x)^s.
inline CumulantSequence moments_to_cumulants(const MomentSequence& m, int cap = kTransformCap) {
    const int K = m.order();
    if (K > cap) throw std::invalid_argument("moments_to_cumulants: cap exceeded");
    const std::vector<long double> mv(m.values().begin(), m.values().end());
    const auto pw = detail::power_coefficients(mv, K);
    std::vector<long double> kappa(K, 0.0L);
    for (int n = 1; n <= K; ++n) {
        long double acc = mv[n - 1];
        for (int s = 1; s < n; ++s) acc -= kappa[s - 1] * pw[s][n - s];
        kappa[n - 1] = acc;
    }
    return CumulantSequence(std::vector<double>(kappa.begin(), kappa.end()));
}

inline MomentSequence cumulants_to_moments(const CumulantSequence& kappa, int cap = kTransformCap) {
    const int K = kappa.order();
    if (K > cap) throw std::invalid_argument("cumulants_to_moments: cap exceeded");
    std::vector<long double> m;
    m.reserve(K);
    for (int n = 1; n <= K; ++n) {
        // Powers of the series known so far (degrees < n suffice).
        const auto pw = detail::power_coefficients(m, n - 1);
        long double acc = kappa.cumulant(n);  // s = n: coefficient of x^0 is 1
        for (int s = 1; s < n; ++s)
            acc += static_cast<long double>(kappa.cumulant(s)) * pw[s][n - s];
        m.push_back(acc);
    }
    return MomentSequence(std::vector<double>(m.begin(), m.end()));
}

/// Moments of the limiting squared-aspect law with ratio lambda; generated
/// from free cumulants kappa_n = lambda^(n-1). The quadrature of the explicit
/// density in spectra.hpp is the test oracle for these values.
inline MomentSequence mp_moments(double lambda, int order) {
    if (!(lambda > 0.0)) throw std::invalid_argument("mp_moments: lambda must be > 0");
    std::vector<double> kappa(order);
    double p = 1.0;
    for (int n = 1; n <= order; ++n) {
        kappa[n - 1] = p;
        p *= lambda;
    }
    return cumulants_to_moments(CumulantSequence(std::move(kappa)));
}

/// Unit-variance semicircle: m_{2j} = Catalan(j), odd moments vanish.
inline MomentSequence semicircle_moments(int order) {
    std::vector<double> kappa(order, 0.0);
    if (order >= 2) kappa[1] = 1.0;
    return cumulants_to_moments(CumulantSequence(std::move(kappa)));
}

inline MomentSequence point_mass_moments(double c, int order) {
    std::vector<double> m(order);
    double p = 1.0;
    for (int j = 1; j <= order; ++j) {
        p *= c;
        m[j - 1] = p;
    }
    return MomentSequence(std::move(m));
}

inline MomentSequence bernoulli_pm1_moments(int order) {
    std::vector<double> m(order);
    for (int j = 1; j <= order; ++j) m[j - 1] = (j % 2 == 0) ? 1.0 : 0.0;
    return MomentSequence(std::move(m));
}

inline MomentSequence uniform_moments(double a, double b, int order) {
    if (!(a < b)) throw std::invalid_argument("uniform_moments: need a < b");
    std::vector<double> m(order);
    double pa = a, pb = b;
    for (int j = 1; j <= order; ++j) {
        pa *= a;
        pb *= b;
        m[j - 1] = (pb - pa) / ((j + 1) * (b - a));
    }
    return MomentSequence(std::move(m));
}

/// Word over the two-letter alphabet {W, Y}.
struct NoncommWord {
    std::string letters;

    NoncommWord() = default;
    explicit NoncommWord(std::string s) : letters(std::move(s)) {
        for (char c : letters)
            if (c != 'W' && c != 'Y')
                throw std::invalid_argument("NoncommWord: letters must be W or Y");
    }

    int size() const { return static_cast<int>(letters.size()); }
    bool operator==(const NoncommWord&) const = default;
};

/// The alternating word W^{k_1} Y W^{k_2} Y ... W^{k_n} Y.
inline NoncommWord alternating_word(const std::vector<long>& k) {
    std::string s;
    for (long ki : k) {
        if (ki < 0) throw std::invalid_argument("alternating_word: k_i must be >= 0");
        s.append(static_cast<std::size_t>(ki), 'W');
        s.push_back('Y');
    }
    return NoncommWord(std::move(s));
}

/// Mixed moment of a free pair: sum over non-crossing partitions of the word
/// positions with monochromatic blocks of the product of per-letter free
/// cumulants. Requires marginal moments up to the letter counts of the word.
inline double free_word_moment(const NoncommWord& word, const MomentSequence& mw,
                               const MomentSequence& my, int word_cap = kWordCap) {
    const int m = word.size();
    if (m < 1) throw std::invalid_argument("free_word_moment: empty word");
    if (m > word_cap) throw std::invalid_argument("free_word_moment: word cap exceeded");
    int count_w = 0;
    for (char c : word.letters)
        if (c == 'W') ++count_w;
    const int count_y = m - count_w;
    if (count_w > mw.order() || count_y > my.order())
        throw std::out_of_range("free_word_moment: insufficient moment order");

    if (count_w == 0) return my.moment(m);
    if (count_y == 0) return mw.moment(m);

    const CumulantSequence kw =
        moments_to_cumulants(MomentSequence(std::vector<double>(
            mw.values().begin(), mw.values().begin() + count_w)));
    const CumulantSequence ky =
        moments_to_cumulants(MomentSequence(std::vector<double>(
            my.values().begin(), my.values().begin() + count_y)));

    double sum = 0.0;
    for_each_monochromatic_noncrossing(word.letters, [&](const std::vector<std::vector<int>>& blocks) {
        double prod = 1.0;
        for (const auto& b : blocks) {
            const int len = static_cast<int>(b.size());
            prod *= (word.letters[b.front() - 1] == 'W') ? kw.cumulant(len) : ky.cumulant(len);
        }
        sum += prod;
    });
    return sum;
}

struct PolyTerm {
    std::complex<double> coeff;
    NoncommWord word;
};

/// Complex-coefficient polynomial in the noncommuting letters W, Y; equal
/// words are merged and zero terms dropped on construction.
class NoncommPolynomial {
  public:
    NoncommPolynomial() = default;

    explicit NoncommPolynomial(std::vector<PolyTerm> terms,
                               std::complex<double> constant = 0.0)
        : constant_(constant) {
        std::map<std::string, std::complex<double>> merged;
        for (auto& t : terms) {
            if (t.word.size() == 0) {
                constant_ += t.coeff;
                continue;
            }
            merged[t.word.letters] += t.coeff;
        }
        for (auto& [w, c] : merged)
            if (c != std::complex<double>(0.0)) terms_.push_back({c, NoncommWord(w)});
    }

    static NoncommPolynomial from_word(const std::string& letters,
                                       std::complex<double> coeff = 1.0) {
        return NoncommPolynomial({PolyTerm{coeff, NoncommWord(letters)}});
    }

    static NoncommPolynomial constant(std::complex<double> c) {
        return NoncommPolynomial({}, c);
    }

    const std::vector<PolyTerm>& terms() const { return terms_; }
    std::complex<double> constant_term() const { return constant_; }

    int max_word_length() const {
        int m = 0;
        for (const auto& t : terms_) m = std::max(m, t.word.size());
        return m;
    }

    friend NoncommPolynomial operator+(const NoncommPolynomial& a, const NoncommPolynomial& b) {
        std::vector<PolyTerm> ts = a.terms_;
        ts.insert(ts.end(), b.terms_.begin(), b.terms_.end());
        return NoncommPolynomial(std::move(ts), a.constant_ + b.constant_);
    }

    friend NoncommPolynomial operator-(const NoncommPolynomial& a, const NoncommPolynomial& b) {
        std::vector<PolyTerm> ts = a.terms_;
        for (const auto& t : b.terms_) ts.push_back({-t.coeff, t.word});
        return NoncommPolynomial(std::move(ts), a.constant_ - b.constant_);
    }

    friend NoncommPolynomial operator*(const NoncommPolynomial& a, const NoncommPolynomial& b) {
        std::vector<PolyTerm> ts;
        for (const auto& ta : a.terms_)
            for (const auto& tb : b.terms_)
                ts.push_back({ta.coeff * tb.coeff, NoncommWord(ta.word.letters + tb.word.letters)});
        if (a.constant_ != std::complex<double>(0.0))
            for (const auto& tb : b.terms_) ts.push_back({a.constant_ * tb.coeff, tb.word});
        if (b.constant_ != std::complex<double>(0.0))
            for (const auto& ta : a.terms_) ts.push_back({ta.coeff * b.constant_, ta.word});
        return NoncommPolynomial(std::move(ts), a.constant_ * b.constant_);
    }

    NoncommPolynomial pow(int j) const {
        if (j < 0) throw std::invalid_argument("NoncommPolynomial::pow: j must be >= 0");
        NoncommPolynomial out = constant(1.0);
        for (int i = 0; i < j; ++i) out = out * (*this);
        return out;
    }

    std::string to_string() const {
        if (terms_.empty() && constant_ == std::complex<double>(0.0)) return "0";
        std::string s;
        auto coeff_str = [](std::complex<double> c) {
            if (c.imag() == 0.0) return std::to_string(c.real());
            return "(" + std::to_string(c.real()) + "+" + std::to_string(c.imag()) + "i)";
        };
        for (const auto& t : terms_) {
            if (!s.empty()) s += " + ";
            if (t.coeff != std::complex<double>(1.0)) s += coeff_str(t.coeff) + "*";
            s += t.word.letters;
        }
        if (constant_ != std::complex<double>(0.0)) {
            if (!s.empty()) s += " + ";
            s += coeff_str(constant_);
        }
        return s;
    }

  private:
    std::vector<PolyTerm> terms_;
    std::complex<double> constant_ = 0.0;
};

/// phi(p(w, y)) for the free pair with the given marginal moments.
inline std::complex<double> free_poly_moment(const NoncommPolynomial& p,
                                             const MomentSequence& mw,
                                             const MomentSequence& my,
                                             int word_cap = kWordCap) {
    std::complex<double> acc = p.constant_term();
    for (const auto& t : p.terms())
        acc += t.coeff * free_word_moment(t.word, mw, my, word_cap);
    return acc;
}

/// phi(w^{k_1} y ... w^{k_n} y) by the constrained permutation sum: pairs
/// (alpha, beta) with #alpha + #(alpha^-1 beta) + #(beta^-1 gamma) = 2n + 1,
/// each contributing phi(alpha^-1 beta) times marginal-moment products.
/// Independent of the partition engine; the two must agree.
inline double genus_zero_moment(const std::vector<long>& k, const MomentSequence& mw,
                                const MomentSequence& my, int cap = kSnEnumerationCap) {
    const int n = static_cast<int>(k.size());
    if (n < 1) throw std::invalid_argument("genus_zero_moment: empty k");
    const auto sn = enumerate_sn(n, cap);
    const Permutation gamma = Permutation::full_cycle(n);

    std::vector<double> a_factor(sn.size());
    std::vector<int> a_blocks(sn.size());
    std::vector<Permutation> inverses;
    inverses.reserve(sn.size());
    for (std::size_t i = 0; i < sn.size(); ++i) {
        double f = 1.0;
        const auto cyc = sn[i].cycles();
        for (const auto& theta : cyc) {
            long ksum = 0;
            for (int point : theta) ksum += k[point - 1];
            f *= mw.moment(static_cast<int>(ksum));  // moment(0) == 1
        }
        a_factor[i] = f;
        a_blocks[i] = static_cast<int>(cyc.size());
        inverses.push_back(sn[i].inverse());
    }

    std::vector<double> b_factor(sn.size());
    std::vector<int> b_blocks(sn.size());
    for (std::size_t j = 0; j < sn.size(); ++j) {
        double f = 1.0;
        const auto cyc = compose(sn[j].inverse(), gamma).cycles();
        for (const auto& theta : cyc) f *= my.moment(static_cast<int>(theta.size()));
        b_factor[j] = f;
        b_blocks[j] = static_cast<int>(cyc.size());
    }

    std::map<CycleType, double> phi_cache;
    double total = 0.0;
    for (std::size_t i = 0; i < sn.size(); ++i) {
        for (std::size_t j = 0; j < sn.size(); ++j) {
            const Permutation rel = compose(inverses[i], sn[j]);
            if (a_blocks[i] + rel.cycle_count() + b_blocks[j] != 2 * n + 1) continue;
            const CycleType t = rel.cycle_type();
            auto it = phi_cache.find(t);
            if (it == phi_cache.end())
                it = phi_cache.emplace(t, to_double(asymptotic_phi(t))).first;
            total += it->second * a_factor[i] * b_factor[j];
        }
    }
    return total;
}

/// Free additive convolution: cumulants add.
inline MomentSequence free_additive_convolution(const MomentSequence& a,
                                                const MomentSequence& b,
                                                int cap = kTransformCap) {
    if (a.order() != b.order())
        throw std::invalid_argument("free_additive_convolution: orders must match");
    const auto ka = moments_to_cumulants(a, cap);
    const auto kb = moments_to_cumulants(b, cap);
    std::vector<double> k(a.order());
    for (int j = 1; j <= a.order(); ++j) k[j - 1] = ka.cumulant(j) + kb.cumulant(j);
    return cumulants_to_moments(CumulantSequence(std::move(k)), cap);
}

/// Free multiplicative convolution: m_n = phi((ab)^n) via the alternating
/// word. Caller asserts that at least one factor is supported on [0, inf).
inline MomentSequence free_multiplicative_convolution(const MomentSequence& a,
                                                      const MomentSequence& b,
                                                      int word_cap = kWordCap) {
    if (a.order() != b.order())
        throw std::invalid_argument("free_multiplicative_convolution: orders must match");
    const int K = a.order();
    if (2 * K > word_cap)
        throw std::invalid_argument("free_multiplicative_convolution: word cap exceeded");
    std::vector<double> m(K);
    for (int j = 1; j <= K; ++j) {
        std::string word;
        for (int i = 0; i < j; ++i) word += "WY";
        m[j - 1] = free_word_moment(NoncommWord(word), a, b, word_cap);
    }
    return MomentSequence(std::move(m));
}

}  // namespace freeprob
