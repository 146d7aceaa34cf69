#pragma once

#include <algorithm>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "symlab/error.hpp"

namespace symlab {

//
// d-tuple of signed integers with lexicographic order. Used both for
// 1-based cell/level indices and for signed Fourier offsets k = i - j.
//
class MultiIndex
{
public:
    MultiIndex() = default;
    MultiIndex(std::initializer_list<std::int64_t> entries) : entries_(entries) {}
    explicit MultiIndex(std::vector<std::int64_t> entries) : entries_(std::move(entries)) {}

    /// constant multi-index (c, ..., c) of dimension d
    static MultiIndex constant(std::size_t d, std::int64_t c)
    {
        return MultiIndex(std::vector<std::int64_t>(d, c));
    }

    std::size_t dim() const noexcept { return entries_.size(); }

    std::int64_t operator[](std::size_t r) const { return entries_[r]; }
    std::int64_t& operator[](std::size_t r) { return entries_[r]; }

    const std::vector<std::int64_t>& entries() const noexcept { return entries_; }

    /// product n1 * ... * nd
    std::int64_t product() const
    {
        return std::accumulate(entries_.begin(), entries_.end(), std::int64_t{1},
                                std::multiplies<>{});
    }

    std::int64_t max_abs() const
    {
        std::int64_t m = 0;
        for (auto e : entries_)
            m = std::max(m, e < 0 ? -e : e);
        return m;
    }

    MultiIndex operator-(const MultiIndex& other) const
    {
        require_same_dim(other);
        MultiIndex out(*this);
        for (std::size_t r = 0; r < dim(); ++r)
            out.entries_[r] -= other.entries_[r];
        return out;
    }

    MultiIndex operator-() const
    {
        MultiIndex out(*this);
        for (auto& e : out.entries_)
            e = -e;
        return out;
    }

    bool operator==(const MultiIndex&) const = default;

    // std::map ordering; dimension is compared first so mixed-d keys never
    // reach lex_compare's mismatch check.
    bool operator<(const MultiIndex& other) const
    {
        if (dim() != other.dim())
            return dim() < other.dim();
        return entries_ < other.entries_;
    }

    std::string to_string() const
    {
        std::string s = "(";
        for (std::size_t r = 0; r < dim(); ++r)
        {
            if (r)
                s += ",";
            s += std::to_string(entries_[r]);
        }
        return s + ")";
    }

    void require_same_dim(const MultiIndex& other) const
    {
        if (dim() != other.dim())
            throw Error("multi-index dimension mismatch: " + std::to_string(dim()) + " vs " +
                        std::to_string(other.dim()));
    }

private:
    std::vector<std::int64_t> entries_;
};

/// i ◁ j iff i_r < j_r at the first coordinate where they differ.
inline std::strong_ordering lex_compare(const MultiIndex& a, const MultiIndex& b)
{
    a.require_same_dim(b);
    for (std::size_t r = 0; r < a.dim(); ++r)
    {
        if (a[r] != b[r])
            return a[r] < b[r] ? std::strong_ordering::less : std::strong_ordering::greater;
    }
    return std::strong_ordering::equal;
}

/// Row index (1-based) of unknown `block` (1..p) in cell i (1 <= i <= n),
/// with the last level varying fastest and the block index innermost.
inline std::int64_t linearize(const MultiIndex& i, const MultiIndex& n, std::int64_t block,
                              std::int64_t p)
{
    i.require_same_dim(n);
    if (p < 1 || block < 1 || block > p)
        throw Error("block index " + std::to_string(block) + " outside [1," + std::to_string(p) +
                    "]");
    std::int64_t cell = 0;
    for (std::size_t r = 0; r < i.dim(); ++r)
    {
        if (i[r] < 1 || i[r] > n[r])
            throw Error("multi-index " + i.to_string() + " outside [1," + n.to_string() + "]");
        cell = cell * n[r] + (i[r] - 1);
    }
    return cell * p + block;
}

struct CellBlock
{
    MultiIndex cell;     ///< 1-based
    std::int64_t block;  ///< 1-based
};

/// Inverse of linearize.
inline CellBlock delinearize(std::int64_t row, const MultiIndex& n, std::int64_t p)
{
    const std::int64_t total = n.product() * p;
    if (row < 1 || row > total)
        throw Error("row " + std::to_string(row) + " outside [1," + std::to_string(total) + "]");
    std::int64_t zero_based = row - 1;
    const std::int64_t block = zero_based % p + 1;
    std::int64_t cell = zero_based / p;
    MultiIndex i = MultiIndex::constant(n.dim(), 0);
    for (std::size_t r = n.dim(); r-- > 0;)
    {
        i[r] = cell % n[r] + 1;
        cell /= n[r];
    }
    return {std::move(i), block};
}

} // namespace symlab
