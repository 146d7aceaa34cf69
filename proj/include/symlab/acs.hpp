#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "symlab/error.hpp"
#include "symlab/linalg.hpp"

namespace symlab {

/// Rank/norm split realizing a gap value: A - B = R + N, rank R = rank, ||N|| = norm.
struct AcsWitness
{
    std::int64_t rank = 0;
    double norm = 0.0;
};

struct AcsGap
{
    double gap = 0.0;
    AcsWitness witness;
    std::int64_t size = 0;  ///< N used in the i/N term
};

/// min over i in [0, m] of i/m + s[i] (s descending, s[m] := 0). Ties keep the smaller i.
inline AcsGap gap_from_descending(const std::vector<double>& s, std::int64_t m)
{
    AcsGap out;
    out.size = m;
    out.gap = INFINITY;
    for (std::int64_t i = 0; i <= m; ++i)
    {
        const double tail = i < static_cast<std::int64_t>(s.size()) ? s[static_cast<std::size_t>(i)] : 0.0;
        const double value = static_cast<double>(i) / static_cast<double>(m) + tail;
        if (value < out.gap)
        {
            out.gap = value;
            out.witness = {i, tail};
        }
    }
    return out;
}

inline std::vector<double> descending_svals(const Eigen::MatrixXd& m)
{
    auto s = svals(m);
    std::reverse(s.begin(), s.end());
    return s;
}

//
// gap(A, B) = min_{0<=i<=N} ( i/N + sigma_{i+1}(A - B) ), sigma descending.
// The minimizing i is the rank of the truncated-SVD part R; the next singular
// value bounds the remainder N.
//
inline AcsGap acs_gap(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw Error("acs_gap: dimension mismatch (" + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()) + "); use gacs_gap for different sizes");
    const auto n = std::min(a.rows(), a.cols());
    if (n == 0)
        throw Error("acs_gap: empty matrices");
    return gap_from_descending(descending_svals(a - b), n);
}

struct SplitMatrices
{
    Eigen::MatrixXd low_rank;    ///< R: best rank-r approximation of A - B
    Eigen::MatrixXd small_norm;  ///< N = A - B - R
};

/// Materialize the witness split of A - B at rank r.
inline SplitMatrices acs_split(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, std::int64_t r)
{
    const Eigen::MatrixXd e = a - b;
    if (r < 0 || r > std::min(e.rows(), e.cols()))
        throw Error("acs_split: rank out of range");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(e, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto k = static_cast<Eigen::Index>(r);
    SplitMatrices out;
    out.low_rank = svd.matrixU().leftCols(k) * svd.singularValues().head(k).asDiagonal() *
                   svd.matrixV().leftCols(k).transpose();
    out.small_norm = e - out.low_rank;
    return out;
}

enum class Alignment
{
    embedding,
    singular_value,
};

struct GacsGap
{
    AcsGap acs;
    double m_fraction = 0.0;
};

namespace detail {

inline void require_not_larger(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    if (b.rows() > a.rows() || b.cols() > a.cols())
        throw Error("gacs_gap: B (" + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) +
                    ") is larger than A (" + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + ")");
}

inline double dimension_fraction(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    const double da = static_cast<double>(std::min(a.rows(), a.cols()));
    const double db = static_cast<double>(std::min(b.rows(), b.cols()));
    return (da - db) / da;
}

} // namespace detail

/// B placed inside a zero matrix shaped like A: entry (i,j) of B lands at
/// (row_map[i], col_map[j]).
inline Eigen::MatrixXd embed(const Eigen::MatrixXd& b, Eigen::Index rows, Eigen::Index cols,
                             const std::vector<std::int64_t>& row_map,
                             const std::vector<std::int64_t>& col_map)
{
    if (static_cast<Eigen::Index>(row_map.size()) != b.rows() ||
        static_cast<Eigen::Index>(col_map.size()) != b.cols())
        throw Error("embed: index map length does not match B");
    std::vector<char> seen_r(static_cast<std::size_t>(rows), 0), seen_c(static_cast<std::size_t>(cols), 0);
    for (auto r : row_map)
    {
        if (r < 0 || r >= rows || seen_r[static_cast<std::size_t>(r)]++)
            throw Error("embed: row map is not injective into A's rows");
    }
    for (auto c : col_map)
    {
        if (c < 0 || c >= cols || seen_c[static_cast<std::size_t>(c)]++)
            throw Error("embed: column map is not injective into A's columns");
    }
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(rows, cols);
    for (Eigen::Index j = 0; j < b.cols(); ++j)
        for (Eigen::Index i = 0; i < b.rows(); ++i)
            out(row_map[static_cast<std::size_t>(i)], col_map[static_cast<std::size_t>(j)]) = b(i, j);
    return out;
}

/// Embedding alignment: U, V realized as the permutations given by the index maps.
inline GacsGap gacs_gap_embedding(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  const std::vector<std::int64_t>& row_map,
                                  const std::vector<std::int64_t>& col_map)
{
    detail::require_not_larger(a, b);
    return {acs_gap(a, embed(b, a.rows(), a.cols(), row_map, col_map)),
            detail::dimension_fraction(a, b)};
}

inline GacsGap gacs_gap_embedding(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  const std::vector<std::int64_t>& index_map)
{
    return gacs_gap_embedding(a, b, index_map, index_map);
}

//
// Singular-value alignment: both matrices diagonalized by the same singular
// vectors of A, so A - U(B+0)V has singular values |sigma_j(A) - sigma_j(B+0)|.
// The gap of that aligned difference is an upper bound on the optimum over
// all unitary alignments.
//
inline GacsGap gacs_gap_singular(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b)
{
    detail::require_not_larger(a, b);
    const auto m = std::min(a.rows(), a.cols());
    if (m == 0)
        throw Error("gacs_gap: empty matrices");
    const auto sa = descending_svals(a);
    auto sb = descending_svals(b);
    sb.resize(static_cast<std::size_t>(m), 0.0);
    std::vector<double> diff(static_cast<std::size_t>(m));
    for (std::size_t j = 0; j < diff.size(); ++j)
        diff[j] = std::abs(sa[j] - sb[j]);
    std::sort(diff.begin(), diff.end(), std::greater<>());
    return {gap_from_descending(diff, m), detail::dimension_fraction(a, b)};
}

/// Weyl-type interlacing check on a witness: with A - B' = R + N, rank R = r,
/// ||N|| <= w, both sigma_{j+r}(A) <= sigma_j(B') + w and the symmetric
/// statement hold. Returns the largest violation (<= 0 when consistent).
inline double interlacing_violation(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b_padded,
                                    const AcsWitness& w)
{
    const auto sa = descending_svals(a);
    const auto sb = descending_svals(b_padded);
    const auto m = std::min(sa.size(), sb.size());
    const auto r = static_cast<std::size_t>(w.rank);
    double worst = -INFINITY;
    for (std::size_t j = 0; j + r < m; ++j)
    {
        worst = std::max(worst, sa[j + r] - sb[j] - w.norm);
        worst = std::max(worst, sb[j + r] - sa[j] - w.norm);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Decay fits over t
// ---------------------------------------------------------------------------

struct DecayFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    bool monotone_decreasing = false;
    std::vector<std::size_t> skipped;  ///< indices of nonpositive values left out
    bool flagged = false;              ///< skipped points or not monotone
};

/// Least-squares slope of log y against log t.
inline DecayFit decay_fit(const std::vector<double>& t, const std::vector<double>& y)
{
    if (t.size() != y.size())
        throw Error("decay_fit: t and value series differ in length");
    if (t.size() < 3)
        throw Error("decay_fit: need at least 3 t-values");
    DecayFit fit;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < t.size(); ++k)
    {
        if (!(t[k] > 0.0) || !(y[k] > 0.0))
        {
            fit.skipped.push_back(k);
            continue;
        }
        lx.push_back(std::log(t[k]));
        ly.push_back(std::log(y[k]));
    }
    fit.monotone_decreasing = true;
    for (std::size_t k = 1; k < y.size(); ++k)
        fit.monotone_decreasing = fit.monotone_decreasing && y[k] < y[k - 1];
    fit.flagged = !fit.skipped.empty() || !fit.monotone_decreasing;
    if (lx.size() < 2)
    {
        fit.flagged = true;
        return fit;
    }
    const auto n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < lx.size(); ++k)
    {
        mx += lx[k];
        my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k)
    {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
        syy += (ly[k] - my) * (ly[k] - my);
    }
    if (sxx == 0.0)
        throw Error("decay_fit: t-values must not all coincide");
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
    return fit;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct AcsGapRow
{
    std::int64_t n = 0;
    double t = 0.0;
    std::int64_t size = 0;
    double gap = 0.0;
    std::int64_t rank_witness = 0;
    double norm_witness = 0.0;
    double m_fraction = 0.0;
};

struct AcsGapReport
{
    std::vector<AcsGapRow> rows;

    void add(std::int64_t n, double t, const GacsGap& g)
    {
        rows.push_back({n, t, g.acs.size, g.acs.gap, g.acs.witness.rank, g.acs.witness.norm,
                        g.m_fraction});
    }

    /// deterministic (n, t) key order
    void sort()
    {
        std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
            return a.n != b.n ? a.n < b.n : a.t < b.t;
        });
    }

    /// columns: n, t, N, gap, rank_witness, norm_witness, m_fraction
    void write_csv(std::ostream& os) const
    {
        os << "n,t,N,gap,rank_witness,norm_witness,m_fraction\n";
        os.precision(17);
        for (const auto& r : rows)
            os << r.n << ',' << r.t << ',' << r.size << ',' << r.gap << ',' << r.rank_witness << ','
               << r.norm_witness << ',' << r.m_fraction << '\n';
    }
};

} // namespace symlab
