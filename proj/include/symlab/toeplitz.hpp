#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symlab/error.hpp"
#include "symlab/linalg.hpp"
#include "symlab/multiindex.hpp"
#include "symlab/symbol_catalog.hpp"

namespace symlab {

inline constexpr double coefficient_drop_tolerance = 1e-12;

//
// Fourier coefficients t_k = (2pi)^{-d} \int f(theta) e^{-i k.theta} d theta
// for |k_r| <= kmax_r. Coefficients whose norm falls below the drop
// tolerance are not stored (read back as exact zeros).
//
struct FourierTable
{
    int d = 1;
    int p = 1;
    MultiIndex kmax;
    std::map<MultiIndex, Eigen::MatrixXcd> coefficients;

    /// t_k, or the zero block when k is outside the stored support
    Eigen::MatrixXcd at(const MultiIndex& k) const
    {
        auto it = coefficients.find(k);
        if (it == coefficients.end())
            return Eigen::MatrixXcd::Zero(p, p);
        return it->second;
    }

    const Eigen::MatrixXcd* find(const MultiIndex& k) const
    {
        auto it = coefficients.find(k);
        return it == coefficients.end() ? nullptr : &it->second;
    }

    /// Table of the symbol conj(f)^T, i.e. t_k -> t_{-k}^*.
    FourierTable adjoint() const
    {
        FourierTable out{d, p, kmax, {}};
        for (const auto& [k, c] : coefficients)
            out.coefficients.emplace(-k, c.adjoint());
        return out;
    }
};

/// Uniform-grid quadrature of the Fourier coefficients; exact for
/// trigonometric polynomials of degree below quad_points_per_dim - kmax.
inline FourierTable fourier_coefficients(const MatrixSymbol& f, const MultiIndex& kmax,
                                         int quad_points_per_dim)
{
    if (f.phys_dim > 0)
        throw Error("fourier_coefficients: symbol '" + f.name +
                    "' depends on physical variables; only constant-coefficient symbols have a "
                    "Toeplitz table");
    if (static_cast<int>(kmax.dim()) != f.d)
        throw Error("fourier_coefficients: kmax has dimension " + std::to_string(kmax.dim()) +
                    ", symbol has " + std::to_string(f.d) + " levels");
    if (quad_points_per_dim < 4 * (kmax.max_abs() + 1))
        throw Error("fourier_coefficients: need at least 4*(kmax+1) quadrature points per level");

    const int d = f.d;
    const int q = quad_points_per_dim;
    const double step = 2.0 * std::numbers::pi / q;

    // sample the symbol once on the full tensor grid
    std::int64_t grid_size = 1;
    for (int r = 0; r < d; ++r)
        grid_size *= q;
    std::vector<Eigen::MatrixXcd> samples(static_cast<std::size_t>(grid_size));
    std::vector<double> theta(static_cast<std::size_t>(d));
    for (std::int64_t g = 0; g < grid_size; ++g)
    {
        std::int64_t rem = g;
        for (int r = d - 1; r >= 0; --r)
        {
            theta[r] = -std::numbers::pi + step * static_cast<double>(rem % q);
            rem /= q;
        }
        samples[static_cast<std::size_t>(g)] = f(theta);
    }

    FourierTable table{d, f.p, kmax, {}};
    MultiIndex k = -kmax;
    const double norm = 1.0 / static_cast<double>(grid_size);
    while (true)
    {
        Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(f.p, f.p);
        for (std::int64_t g = 0; g < grid_size; ++g)
        {
            std::int64_t rem = g;
            double phase = 0.0;
            for (int r = d - 1; r >= 0; --r)
            {
                phase += static_cast<double>(k[r]) *
                         (-std::numbers::pi + step * static_cast<double>(rem % q));
                rem /= q;
            }
            acc += samples[static_cast<std::size_t>(g)] * std::polar(1.0, -phase);
        }
        acc *= norm;
        for (auto& v : acc.reshaped())
        {
            if (std::abs(v.real()) < coefficient_drop_tolerance)
                v.real(0.0);
            if (std::abs(v.imag()) < coefficient_drop_tolerance)
                v.imag(0.0);
        }
        if (acc.cwiseAbs().maxCoeff() > 0.0)
            table.coefficients.emplace(k, std::move(acc));

        // odometer over [-kmax, kmax]
        int r = d - 1;
        while (r >= 0 && k[r] == kmax[r])
        {
            k[r] = -kmax[r];
            --r;
        }
        if (r < 0)
            break;
        ++k[r];
    }
    return table;
}

/// Default table for catalog symbols: kmax = (degree, ..., degree).
inline FourierTable fourier_coefficients(const MatrixSymbol& f)
{
    const auto kmax = MultiIndex::constant(static_cast<std::size_t>(f.d), f.degree);
    return fourier_coefficients(f, kmax, static_cast<int>(4 * (f.degree + 1)));
}

namespace detail {

inline std::vector<std::int64_t> strides_of(const MultiIndex& n)
{
    std::vector<std::int64_t> s(n.dim(), 1);
    for (std::size_t r = n.dim(); r-- > 1;)
        s[r - 1] = s[r] * n[r];
    return s;
}

inline MultiIndex cell_of(std::int64_t cell, const MultiIndex& n)
{
    MultiIndex i = MultiIndex::constant(n.dim(), 0);
    for (std::size_t r = n.dim(); r-- > 0;)
    {
        i[r] = cell % n[r];
        cell /= n[r];
    }
    return i;
}

} // namespace detail

//
// Principal submatrix of T_n(f) on the given (0-based) rows. Row index
// follows linearize(): cell-major, block innermost. Entry block (i,j) is
// t_{i-j}. Passing every row yields the full multilevel block Toeplitz matrix.
//
inline HermitianMatrix assemble_toeplitz_rows(const FourierTable& table, const MultiIndex& n,
                                              const std::vector<std::int64_t>& rows)
{
    if (static_cast<int>(n.dim()) != table.d)
        throw Error("assemble_toeplitz: size multi-index does not match table levels");
    for (std::size_t r = 0; r < n.dim(); ++r)
        if (n[r] < 1)
            throw Error("assemble_toeplitz: n must be >= 1 componentwise, got " + n.to_string());

    const std::int64_t p = table.p;
    const std::int64_t total = n.product() * p;
    const auto m = static_cast<Eigen::Index>(rows.size());

    // position of each full row in the restricted list (-1 if absent)
    std::vector<std::int64_t> where(static_cast<std::size_t>(total), -1);
    for (Eigen::Index r = 0; r < m; ++r)
    {
        const auto row = rows[static_cast<std::size_t>(r)];
        if (row < 0 || row >= total)
            throw Error("assemble_toeplitz: row index out of range");
        where[static_cast<std::size_t>(row)] = r;
    }

    const auto strides = detail::strides_of(n);
    bool complex_entries = false;
    for (const auto& [k, c] : table.coefficients)
        complex_entries = complex_entries || c.imag().cwiseAbs().maxCoeff() > 0.0;

    HermitianMatrix out;
    out.re = Eigen::MatrixXd::Zero(m, m);
    if (complex_entries)
        out.im = Eigen::MatrixXd::Zero(m, m);

    for (Eigen::Index r = 0; r < m; ++r)
    {
        const auto row = rows[static_cast<std::size_t>(r)];
        const std::int64_t cell = row / p;
        const std::int64_t a = row % p;
        const MultiIndex i = detail::cell_of(cell, n);
        for (const auto& [k, c] : table.coefficients)
        {
            // j = i - k must be a valid cell
            std::int64_t jcell = 0;
            bool valid = true;
            for (std::size_t lvl = 0; lvl < n.dim(); ++lvl)
            {
                const std::int64_t j = i[lvl] - k[lvl];
                if (j < 0 || j >= n[lvl])
                {
                    valid = false;
                    break;
                }
                jcell += j * strides[lvl];
            }
            if (!valid)
                continue;
            for (std::int64_t b = 0; b < p; ++b)
            {
                const auto col = where[static_cast<std::size_t>(jcell * p + b)];
                if (col < 0)
                    continue;
                const cplx v = c(a, b);
                out.re(r, col) = v.real();
                if (complex_entries)
                    out.im(r, col) = v.imag();
            }
        }
    }
    out.compact();
    return out;
}

/// Full d-level block Toeplitz matrix T_n(f) of size n1...nd p.
inline HermitianMatrix assemble_toeplitz(const FourierTable& table, const MultiIndex& n)
{
    std::vector<std::int64_t> rows(static_cast<std::size_t>(n.product() * table.p));
    for (std::size_t r = 0; r < rows.size(); ++r)
        rows[r] = static_cast<std::int64_t>(r);
    auto out = assemble_toeplitz_rows(table, n, rows);
    out.provenance = "toeplitz n=" + n.to_string() + " p=" + std::to_string(table.p);
    return out;
}

//
// Plain-text dense export: first line "N N", then N rows of N
// space-separated reals. Values use shortest round-trip formatting.
//
inline void write_dense(std::ostream& os, const Eigen::MatrixXd& m)
{
    os << m.rows() << ' ' << m.cols() << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r)
    {
        for (Eigen::Index c = 0; c < m.cols(); ++c)
        {
            if (c)
                os << ' ';
            os << std::setprecision(17) << m(r, c);
        }
        os << '\n';
    }
}

inline void write_dense(std::ostream& os, const HermitianMatrix& m)
{
    if (!m.is_real())
        throw Error("write_dense: the text format holds real matrices only");
    write_dense(os, m.re);
}

inline Eigen::MatrixXd read_dense(std::istream& is)
{
    Eigen::Index rows = 0, cols = 0;
    if (!(is >> rows >> cols) || rows < 0 || cols < 0)
        throw Error("read_dense: malformed header");
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            if (!(is >> m(r, c)))
                throw Error("read_dense: truncated data");
    return m;
}

} // namespace symlab
