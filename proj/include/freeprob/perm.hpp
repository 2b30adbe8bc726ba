#pragma once

// Symmetric-group machinery: permutations on the 1-based ground set {1,...,n},
// cycle decompositions, cycle types, and exhaustive enumeration at small degree.
//
// Composition convention, used everywhere: compose(a, b)(i) = a(b(i)).

#include <algorithm>
#include <cctype>
#include <compare>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace freeprob {

/// Multiset of cycle lengths, sorted descending. Summing to the degree n.
class CycleType {
  public:
    CycleType() = default;

    explicit CycleType(std::vector<int> parts) : parts_(std::move(parts)) {
        for (int p : parts_) {
            if (p < 1) throw std::invalid_argument("CycleType: parts must be >= 1");
        }
        std::sort(parts_.begin(), parts_.end(), std::greater<int>());
    }

    int degree() const { return std::accumulate(parts_.begin(), parts_.end(), 0); }
    int block_count() const { return static_cast<int>(parts_.size()); }
    const std::vector<int>& parts() const { return parts_; }

    std::string to_string() const {
        std::ostringstream os;
        os << '[';
        for (std::size_t i = 0; i < parts_.size(); ++i) {
            if (i > 0) os << ',';
            os << parts_[i];
        }
        os << ']';
        return os.str();
    }

    auto operator<=>(const CycleType&) const = default;

  private:
    std::vector<int> parts_;
};

class Permutation {
  public:
    /// Construct from 1-based images: images[i-1] = a(i). Must be a bijection.
    explicit Permutation(const std::vector<int>& images) {
        const int n = static_cast<int>(images.size());
        if (n < 1) throw std::invalid_argument("Permutation: degree must be >= 1");
        img_.assign(n, -1);
        std::vector<char> seen(n, 0);
        for (int i = 0; i < n; ++i) {
            const int v = images[i];
            if (v < 1 || v > n || seen[v - 1])
                throw std::invalid_argument("Permutation: images are not a bijection of {1..n}");
            seen[v - 1] = 1;
            img_[i] = v - 1;
        }
    }

    static Permutation identity(int n) {
        std::vector<int> im(check_degree(n));
        std::iota(im.begin(), im.end(), 1);
        return Permutation(im);
    }

    /// The n-cycle (1 2 ... n): i -> i+1, n -> 1.
    static Permutation full_cycle(int n) {
        std::vector<int> im(check_degree(n));
        for (int i = 0; i < n; ++i) im[i] = (i + 1) % n + 1;
        return Permutation(im);
    }

    int degree() const { return static_cast<int>(img_.size()); }

    /// 1-based application a(i).
    int operator()(int i) const {
        if (i < 1 || i > degree()) throw std::invalid_argument("Permutation: point out of range");
        return img_[i - 1] + 1;
    }

    Permutation inverse() const {
        std::vector<int> im(img_.size());
        for (std::size_t i = 0; i < img_.size(); ++i) im[img_[i]] = static_cast<int>(i) + 1;
        return Permutation(im);
    }

    /// Cycles as point lists; each cycle starts at its smallest point, cycles
    /// ordered by smallest point. Within a cycle, successive entries are
    /// successive images.
    std::vector<std::vector<int>> cycles() const {
        const int n = degree();
        std::vector<std::vector<int>> out;
        std::vector<char> seen(n, 0);
        for (int s = 0; s < n; ++s) {
            if (seen[s]) continue;
            std::vector<int> cyc;
            int cur = s;
            do {
                seen[cur] = 1;
                cyc.push_back(cur + 1);
                cur = img_[cur];
            } while (cur != s);
            out.push_back(std::move(cyc));
        }
        return out;
    }

    int cycle_count() const {
        const int n = degree();
        std::vector<char> seen(n, 0);
        int count = 0;
        for (int s = 0; s < n; ++s) {
            if (seen[s]) continue;
            ++count;
            for (int cur = s; !seen[cur]; cur = img_[cur]) seen[cur] = 1;
        }
        return count;
    }

    CycleType cycle_type() const {
        std::vector<int> parts;
        for (const auto& c : cycles()) parts.push_back(static_cast<int>(c.size()));
        return CycleType(std::move(parts));
    }

    /// Textual cycle notation, fixed points included: "(1 2 4)(3)".
    std::string cycle_string() const {
        std::ostringstream os;
        for (const auto& c : cycles()) {
            os << '(';
            for (std::size_t i = 0; i < c.size(); ++i) {
                if (i > 0) os << ' ';
                os << c[i];
            }
            os << ')';
        }
        return os.str();
    }

    bool operator==(const Permutation&) const = default;

    friend Permutation compose(const Permutation& a, const Permutation& b);

  private:
    static int check_degree(int n) {
        if (n < 1) throw std::invalid_argument("Permutation: degree must be >= 1");
        return n;
    }

    std::vector<int> img_;  // 0-based internal storage
};

/// (a o b)(i) = a(b(i)). Degrees must match.
inline Permutation compose(const Permutation& a, const Permutation& b) {
    if (a.degree() != b.degree())
        throw std::invalid_argument("compose: degree mismatch");
    std::vector<int> im(a.img_.size());
    for (std::size_t i = 0; i < im.size(); ++i) im[i] = a.img_[b.img_[i]] + 1;
    return Permutation(im);
}

inline constexpr int kSnEnumerationCap = 6;

/// All n! elements of S_n in lexicographic image order.
inline std::vector<Permutation> enumerate_sn(int n, int cap = kSnEnumerationCap) {
    if (n < 1) throw std::invalid_argument("enumerate_sn: n must be >= 1");
    if (n > cap) throw std::invalid_argument("enumerate_sn: cap exceeded");
    std::vector<int> im(n);
    std::iota(im.begin(), im.end(), 1);
    std::vector<Permutation> out;
    do {
        out.emplace_back(im);
    } while (std::next_permutation(im.begin(), im.end()));
    return out;
}

/// Integer partitions of n as CycleTypes, in descending lexicographic order.
inline std::vector<CycleType> integer_partitions(int n) {
    if (n < 1) throw std::invalid_argument("integer_partitions: n must be >= 1");
    std::vector<CycleType> out;
    std::vector<int> cur;
    auto rec = [&](auto&& self, int remaining, int max_part) -> void {
        if (remaining == 0) {
            out.emplace_back(cur);
            return;
        }
        for (int p = std::min(remaining, max_part); p >= 1; --p) {
            cur.push_back(p);
            self(self, remaining - p, p);
            cur.pop_back();
        }
    };
    rec(rec, n, n);
    return out;
}

/// Parse cycle notation "(1 2 4)(3)". The degree is the largest point seen;
/// fixed points must therefore be written as singletons.
inline Permutation parse_cycles(const std::string& text) {
    std::vector<std::vector<int>> cycles;
    std::size_t pos = 0;
    int max_point = 0;
    while (pos < text.size()) {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos >= text.size()) break;
        if (text[pos] != '(') throw std::invalid_argument("parse_cycles: expected '('");
        ++pos;
        std::vector<int> cyc;
        std::string num;
        for (; pos < text.size() && text[pos] != ')'; ++pos) {
            const char ch = text[pos];
            if (std::isdigit(static_cast<unsigned char>(ch))) {
                num += ch;
            } else if (ch == ' ' || ch == ',') {
                if (!num.empty()) {
                    cyc.push_back(std::stoi(num));
                    num.clear();
                }
            } else {
                throw std::invalid_argument("parse_cycles: unexpected character");
            }
        }
        if (pos >= text.size()) throw std::invalid_argument("parse_cycles: unbalanced '('");
        ++pos;  // skip ')'
        if (!num.empty()) cyc.push_back(std::stoi(num));
        if (cyc.empty()) throw std::invalid_argument("parse_cycles: empty cycle");
        for (int p : cyc) max_point = std::max(max_point, p);
        cycles.push_back(std::move(cyc));
    }
    if (max_point == 0) throw std::invalid_argument("parse_cycles: no cycles given");
    std::vector<int> im(max_point);
    std::iota(im.begin(), im.end(), 1);
    std::vector<char> seen(max_point, 0);
    for (const auto& cyc : cycles) {
        for (std::size_t i = 0; i < cyc.size(); ++i) {
            const int from = cyc[i];
            const int to = cyc[(i + 1) % cyc.size()];
            if (from < 1 || from > max_point || seen[from - 1])
                throw std::invalid_argument("parse_cycles: repeated or invalid point");
            seen[from - 1] = 1;
            im[from - 1] = to;
        }
    }
    return Permutation(im);
}

}  // namespace freeprob
