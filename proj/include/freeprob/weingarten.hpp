#pragma once

// Exact Weingarten calculus on S_n for finite N: the table Wg(N, .) is the
// convolution inverse of sigma -> N^{#sigma} in the group algebra, i.e. the
// unique class function with
//
//     sum_{tau in S_n} N^{#(sigma tau^{-1})} Wg(N, tau) = [sigma == id]
//
// for every sigma. Wg depends on sigma only through its cycle type, so the
// solve runs on the class-function system (one unknown per cycle type) in
// exact rational arithmetic. The full |S_n|-dimensional solve is kept as a
// cross-check. Also here: the large-N coefficients phi(alpha) and the exact
// expectation of Tr prod_i (U A^{k_i} U* B) over a Haar unitary U.

#include <map>
#include <stdexcept>
#include <vector>

#include "freeprob/ncpart.hpp"
#include "freeprob/perm.hpp"
#include "freeprob/rational.hpp"

namespace freeprob {

inline constexpr int kWeingartenCap = 6;  // n = 6 works but the checks get slow

namespace detail {

/// Exact Gaussian elimination; A is square, b the right-hand side.
inline std::vector<Rational> solve_rational(std::vector<std::vector<Rational>> A,
                                            std::vector<Rational> b) {
    const std::size_t n = A.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        while (pivot < n && A[pivot][col] == 0) ++pivot;
        if (pivot == n) throw std::domain_error("solve_rational: singular system");
        std::swap(A[col], A[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t row = 0; row < n; ++row) {
            if (row == col || A[row][col] == 0) continue;
            const Rational f = A[row][col] / A[col][col];
            for (std::size_t j = col; j < n; ++j) A[row][j] -= f * A[col][j];
            b[row] -= f * b[col];
        }
    }
    std::vector<Rational> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = b[i] / A[i][i];
    return x;
}

/// Representative permutation with the given cycle lengths laid out
/// consecutively: [3,1] -> (1 2 3)(4).
inline Permutation representative(const CycleType& t) {
    std::vector<int> im(t.degree());
    int start = 0;
    for (int len : t.parts()) {
        for (int i = 0; i < len; ++i) im[start + i] = start + (i + 1) % len + 1;
        start += len;
    }
    return Permutation(im);
}

}  // namespace detail

/// Exact rational Weingarten values for fixed (n, N), keyed by cycle type.
class WeingartenTable {
  public:
    WeingartenTable(int n, long N, int cap = kWeingartenCap) : n_(n), N_(N) {
        if (n < 1) throw std::invalid_argument("WeingartenTable: n must be >= 1");
        if (n > cap) throw std::invalid_argument("WeingartenTable: cap exceeded");
        if (N < n)
            throw std::domain_error("WeingartenTable: N < n gives a singular system");
        const auto types = integer_partitions(n);
        const auto sn = enumerate_sn(n, cap);
        std::map<CycleType, std::size_t> index;
        for (std::size_t i = 0; i < types.size(); ++i) index[types[i]] = i;

        // Row s: sum over tau of N^{#(sigma_s tau^{-1})} Wg(type(tau)),
        // grouped by the cycle type of tau.
        const std::size_t p = types.size();
        std::vector<std::vector<Rational>> A(p, std::vector<Rational>(p, 0));
        std::vector<Rational> rhs(p, 0);
        const CycleType id_type = Permutation::identity(n).cycle_type();
        for (std::size_t s = 0; s < p; ++s) {
            const Permutation sigma = detail::representative(types[s]);
            for (const auto& tau : sn) {
                const int c = compose(sigma, tau.inverse()).cycle_count();
                A[s][index.at(tau.cycle_type())] += Rational(bigint_pow(N, c));
            }
            rhs[s] = (types[s] == id_type) ? 1 : 0;
        }
        const auto x = detail::solve_rational(std::move(A), std::move(rhs));
        for (std::size_t i = 0; i < p; ++i) values_[types[i]] = x[i];
    }

    int n() const { return n_; }
    long N() const { return N_; }

    const Rational& at(const CycleType& t) const {
        auto it = values_.find(t);
        if (it == values_.end())
            throw std::invalid_argument("WeingartenTable: cycle type not of degree n");
        return it->second;
    }

    const Rational& at(const Permutation& a) const { return at(a.cycle_type()); }

    const std::map<CycleType, Rational>& values() const { return values_; }

  private:
    int n_;
    long N_;
    std::map<CycleType, Rational> values_;
};

/// Exact check of the defining identity for every sigma in S_n.
inline bool verify_convolution_identity(const WeingartenTable& table) {
    const auto sn = enumerate_sn(table.n());
    const Permutation id = Permutation::identity(table.n());
    for (const auto& sigma : sn) {
        Rational acc = 0;
        for (const auto& tau : sn) {
            const int c = compose(sigma, tau.inverse()).cycle_count();
            acc += Rational(bigint_pow(table.N(), c)) * table.at(tau);
        }
        if (acc != Rational(sigma == id ? 1 : 0)) return false;
    }
    return true;
}

/// Solve the full |S_n| x |S_n| system without the class-function reduction.
/// Cross-check only; cost grows as (n!)^3.
inline std::map<CycleType, Rational> weingarten_full_system(int n, long N) {
    if (N < n) throw std::domain_error("weingarten_full_system: N < n");
    const auto sn = enumerate_sn(n);
    const std::size_t sz = sn.size();
    std::vector<std::vector<Rational>> A(sz, std::vector<Rational>(sz, 0));
    std::vector<Rational> rhs(sz, 0);
    const Permutation id = Permutation::identity(n);
    for (std::size_t i = 0; i < sz; ++i) {
        for (std::size_t j = 0; j < sz; ++j) {
            const int c = compose(sn[i], sn[j].inverse()).cycle_count();
            A[i][j] = Rational(bigint_pow(N, c));
        }
        rhs[i] = (sn[i] == id) ? 1 : 0;
    }
    const auto x = detail::solve_rational(std::move(A), std::move(rhs));
    std::map<CycleType, Rational> out;
    for (std::size_t j = 0; j < sz; ++j) {
        auto [it, inserted] = out.emplace(sn[j].cycle_type(), x[j]);
        if (!inserted && it->second != x[j])
            throw std::logic_error("weingarten_full_system: solution is not a class function");
    }
    return out;
}

/// Leading-order coefficient phi(alpha) = lim N^{2n-#alpha} Wg(N, alpha):
/// the product over cycles of length l of (-1)^(l-1) * Catalan(l-1).
inline Rational asymptotic_phi(const CycleType& t) {
    Rational out = 1;
    for (int len : t.parts()) {
        Rational f(catalan(len - 1));
        if ((len - 1) % 2 == 1) f = -f;
        out *= f;
    }
    return out;
}

template <class Scalar>
Scalar scalar_from_rational(const Rational& q);

template <>
inline double scalar_from_rational<double>(const Rational& q) { return to_double(q); }

template <>
inline Rational scalar_from_rational<Rational>(const Rational& q) { return q; }

/// Exact expectation E Tr[prod_{i=1}^n (U A^{k_i} U* B)] for a Haar unitary U
/// and fixed A, B, given trace providers trace_a(j) = Tr(A^j) and
/// trace_b(j) = Tr(B^j) (including j = 0 -> dimension N):
///
///   sum_{alpha,beta} Wg(N, alpha^{-1} beta)
///       * prod_{theta in alpha}          trace_a(sum_{i in theta} k_i)
///       * prod_{theta in beta^{-1}gamma} trace_b(|theta|)
///
/// with gamma the full cycle. Exact when the providers return Rationals.
template <class Scalar, class TraceA, class TraceB>
Scalar haar_conjugation_expectation(const std::vector<long>& k, TraceA&& trace_a,
                                    TraceB&& trace_b, long N,
                                    int cap = kWeingartenCap) {
    const int n = static_cast<int>(k.size());
    if (n < 1) throw std::invalid_argument("haar_conjugation_expectation: empty k");
    for (long ki : k)
        if (ki < 0) throw std::invalid_argument("haar_conjugation_expectation: k_i must be >= 0");
    const WeingartenTable table(n, N, cap);
    const auto sn = enumerate_sn(n, cap);
    const Permutation gamma = Permutation::full_cycle(n);

    std::vector<Scalar> a_factor;
    std::vector<Scalar> b_factor;
    std::vector<Permutation> inverses;
    a_factor.reserve(sn.size());
    b_factor.reserve(sn.size());
    inverses.reserve(sn.size());
    for (const auto& alpha : sn) {
        Scalar fa = scalar_from_rational<Scalar>(Rational(1));
        for (const auto& theta : alpha.cycles()) {
            long ksum = 0;
            for (int point : theta) ksum += k[point - 1];
            fa = fa * trace_a(ksum);
        }
        a_factor.push_back(fa);
        inverses.push_back(alpha.inverse());
    }
    for (const auto& beta : sn) {
        Scalar fb = scalar_from_rational<Scalar>(Rational(1));
        for (const auto& theta : compose(beta.inverse(), gamma).cycles())
            fb = fb * trace_b(static_cast<long>(theta.size()));
        b_factor.push_back(fb);
    }

    std::map<CycleType, Scalar> wg;
    for (const auto& [type, value] : table.values())
        wg.emplace(type, scalar_from_rational<Scalar>(value));

    Scalar total = scalar_from_rational<Scalar>(Rational(0));
    for (std::size_t i = 0; i < sn.size(); ++i) {
        for (std::size_t j = 0; j < sn.size(); ++j) {
            const CycleType t = compose(inverses[i], sn[j]).cycle_type();
            total = total + wg.at(t) * a_factor[i] * b_factor[j];
        }
    }
    return total;
}

}  // namespace freeprob
