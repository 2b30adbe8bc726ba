#pragma once

// Non-crossing set partitions of {1,...,m}, two-letter colorings, and Catalan
// numbers. Enumeration runs a stack recursion: scanning positions left to
// right, a position either opens a new block or joins an open block, and
// joining a non-top block permanently closes everything stacked above it.
// That discipline generates each non-crossing partition exactly once and lets
// a coloring constraint prune branches early.

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/rational.hpp"

namespace freeprob {

inline constexpr int kNcEnumerationCap = 12;

/// Set partition of {1,...,m} in canonical form: blocks ordered by their
/// minimum, elements ascending within each block.
struct SetPartition {
    int m = 0;
    std::vector<std::vector<int>> blocks;
};

inline SetPartition make_set_partition(int m, std::vector<std::vector<int>> blocks) {
    if (m < 1) throw std::invalid_argument("SetPartition: m must be >= 1");
    std::vector<char> seen(m, 0);
    for (auto& b : blocks) {
        if (b.empty()) throw std::invalid_argument("SetPartition: empty block");
        std::sort(b.begin(), b.end());
        for (int x : b) {
            if (x < 1 || x > m || seen[x - 1])
                throw std::invalid_argument("SetPartition: blocks must partition {1..m}");
            seen[x - 1] = 1;
        }
    }
    for (int i = 0; i < m; ++i)
        if (!seen[i]) throw std::invalid_argument("SetPartition: blocks must cover {1..m}");
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return SetPartition{m, std::move(blocks)};
}

/// True iff no a < b < c < d has {a,c} in one block and {b,d} in another.
/// Two blocks cross exactly when their merged order alternates at least
/// three times (pattern PQPQ).
inline bool is_noncrossing(const SetPartition& p) {
    const auto& bs = p.blocks;
    for (std::size_t i = 0; i < bs.size(); ++i) {
        for (std::size_t j = i + 1; j < bs.size(); ++j) {
            const auto& A = bs[i];
            const auto& B = bs[j];
            std::size_t ia = 0, ib = 0;
            int switches = 0;
            int last = -1;  // 0 = from A, 1 = from B
            while (ia < A.size() || ib < B.size()) {
                int take;
                if (ib >= B.size() || (ia < A.size() && A[ia] < B[ib]))
                    take = 0;
                else
                    take = 1;
                if (take == 0) ++ia; else ++ib;
                if (last != -1 && take != last) ++switches;
                last = take;
            }
            if (switches >= 3) return false;
        }
    }
    return true;
}

/// Catalan number C_k = binom(2k, k) / (k+1), exact.
inline BigInt catalan(int k) {
    if (k < 0) throw std::invalid_argument("catalan: k must be >= 0");
    BigInt c = 1;
    for (int i = 0; i < k; ++i) {
        // C_{i+1} = C_i * 2(2i+1)/(i+2)
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    return c;
}

namespace detail {

template <class Visitor>
void nc_recurse(int pos, int m, const char* colors,
                std::vector<std::vector<int>>& blocks, std::vector<int>& open,
                Visitor& visit) {
    if (pos > m) {
        visit(const_cast<const std::vector<std::vector<int>>&>(blocks));
        return;
    }
    // Open a new block at pos. New blocks get increasing minima, so creation
    // order is already canonical.
    blocks.push_back({pos});
    open.push_back(static_cast<int>(blocks.size()) - 1);
    nc_recurse(pos + 1, m, colors, blocks, open, visit);
    open.pop_back();
    blocks.pop_back();

    // Join the open block at depth d, closing everything above it.
    for (int d = static_cast<int>(open.size()) - 1; d >= 0; --d) {
        auto& blk = blocks[open[d]];
        if (colors != nullptr && colors[blk.front() - 1] != colors[pos - 1]) continue;
        std::vector<int> popped(open.begin() + d + 1, open.end());
        open.resize(d + 1);
        blk.push_back(pos);
        nc_recurse(pos + 1, m, colors, blocks, open, visit);
        blk.pop_back();
        open.insert(open.end(), popped.begin(), popped.end());
    }
}

}  // namespace detail

/// Visit every non-crossing partition of {1,...,m} exactly once. The callback
/// receives canonical blocks (ordered by minimum, ascending within).
template <class Visitor>
void for_each_noncrossing(int m, Visitor&& visit) {
    if (m < 1) throw std::invalid_argument("for_each_noncrossing: m must be >= 1");
    std::vector<std::vector<int>> blocks;
    std::vector<int> open;
    detail::nc_recurse(1, m, nullptr, blocks, open, visit);
}

/// Visit every non-crossing partition of {1,...,m} whose blocks are
/// monochromatic under `colors` (one letter per position). Branches that
/// would mix letters inside a block are pruned before recursion.
template <class Visitor>
void for_each_monochromatic_noncrossing(const std::string& colors, Visitor&& visit) {
    const int m = static_cast<int>(colors.size());
    if (m < 1) throw std::invalid_argument("for_each_monochromatic_noncrossing: empty coloring");
    std::vector<std::vector<int>> blocks;
    std::vector<int> open;
    detail::nc_recurse(1, m, colors.data(), blocks, open, visit);
}

/// All non-crossing partitions of {1,...,m}; |result| = catalan(m).
inline std::vector<SetPartition> enumerate_nc(int m, int cap = kNcEnumerationCap) {
    if (m < 1) throw std::invalid_argument("enumerate_nc: m must be >= 1");
    if (m > cap) throw std::invalid_argument("enumerate_nc: cap exceeded");
    std::vector<SetPartition> out;
    for_each_noncrossing(m, [&](const std::vector<std::vector<int>>& blocks) {
        out.push_back(SetPartition{m, blocks});
    });
    return out;
}

/// True iff every block carries a single letter of `colors`.
inline bool is_monochromatic(const SetPartition& p, const std::string& colors) {
    if (static_cast<int>(colors.size()) != p.m)
        throw std::invalid_argument("is_monochromatic: coloring length mismatch");
    for (const auto& b : p.blocks) {
        const char c0 = colors[b.front() - 1];
        for (int x : b)
            if (colors[x - 1] != c0) return false;
    }
    return true;
}

inline std::string partition_to_string(const SetPartition& p) {
    std::string out;
    for (const auto& b : p.blocks) {
        out += '{';
        for (std::size_t i = 0; i < b.size(); ++i) {
            if (i > 0) out += ',';
            out += std::to_string(b[i]);
        }
        out += '}';
    }
    return out;
}

}  // namespace freeprob
