#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "symlab/error.hpp"
#include "symlab/multiindex.hpp"

namespace symlab {

// ---------------------------------------------------------------------------
// The unbounded finite-measure domain
//   Omega = { x > 0, 0 < y < g(x) },  g = 1 on (0,1), 1/x^2 beyond,
// and its exhaustion Omega_t = Omega intersected with the sup-norm ball of radius t.
// ---------------------------------------------------------------------------

inline double omega_profile(double x)
{
    return x < 1.0 ? 1.0 : 1.0 / (x * x);
}

/// Open set: boundary points are excluded.
inline bool in_omega(double x, double y)
{
    return x > 0.0 && y > 0.0 && y < omega_profile(x);
}

inline bool in_omega_t(double x, double y, double t)
{
    return in_omega(x, y) && std::abs(x) < t && std::abs(y) < t;
}

inline constexpr double omega_measure = 2.0;

/// mu(Omega_t): t^2 for t <= 1, 2 - 1/t beyond.
inline double measure_omega_t(double t)
{
    if (!(t > 0.0))
        throw Error("measure_omega_t: t must be positive");
    if (std::isinf(t))
        return omega_measure;
    return t <= 1.0 ? t * t : 2.0 - 1.0 / t;
}

// ---------------------------------------------------------------------------
// Parametrizations of Omega / Omega_t by unit squares, used by quadrature and
// symbol sampling. The tail x >= 1 is mapped with x = 1/u, y = u^2 v, whose
// Jacobian is identically 1, so no truncation of the unbounded part is needed.
// ---------------------------------------------------------------------------

struct RegionPiece
{
    std::function<std::array<double, 2>(double, double)> map;  ///< unit square -> (x, y)
    std::function<double(double, double)> jacobian;             ///< |det D map|
    bool in_support = true;  ///< false on Omega \ Omega_t pieces of a split region
};

struct PhysicalRegion
{
    std::vector<RegionPiece> pieces;
    std::string label;

    /// Midpoint-rule measure with g points per side (exact for constant Jacobians).
    double measure(int g = 8) const
    {
        double total = 0.0;
        for (const auto& piece : pieces)
            for (int a = 0; a < g; ++a)
                for (int b = 0; b < g; ++b)
                    total += piece.jacobian((a + 0.5) / g, (b + 0.5) / g);
        return total / (static_cast<double>(g) * g);
    }

    double support_measure(int g = 8) const
    {
        PhysicalRegion sub;
        for (const auto& piece : pieces)
            if (piece.in_support)
                sub.pieces.push_back(piece);
        return sub.measure(g);
    }
};

namespace detail {

inline RegionPiece box_piece(double x0, double x1, double y0, double y1, bool in_support = true)
{
    return {[=](double s1, double s2) {
                return std::array<double, 2>{x0 + (x1 - x0) * s1, y0 + (y1 - y0) * s2};
            },
            [=](double, double) { return (x1 - x0) * (y1 - y0); }, in_support};
}

/// tail x = 1/u for u in (u0, u1], y = u^2 v
inline RegionPiece tail_piece(double u0, double u1, bool in_support = true)
{
    return {[=](double s1, double s2) {
                const double u = u0 + (u1 - u0) * s1;
                return std::array<double, 2>{1.0 / u, u * u * s2};
            },
            [=](double, double) { return u1 - u0; }, in_support};
}

} // namespace detail

/// Omega_t (t = infinity gives Omega).
inline PhysicalRegion omega_t_region(double t)
{
    if (!(t > 0.0))
        throw Error("omega_t_region: t must be positive");
    PhysicalRegion region;
    region.label = std::isinf(t) ? "omega" : "omega_t(" + std::to_string(t) + ")";
    if (t <= 1.0)
    {
        region.pieces.push_back(detail::box_piece(0.0, t, 0.0, t));
        return region;
    }
    region.pieces.push_back(detail::box_piece(0.0, 1.0, 0.0, 1.0));
    region.pieces.push_back(detail::tail_piece(std::isinf(t) ? 0.0 : 1.0 / t, 1.0));
    return region;
}

inline PhysicalRegion omega_region()
{
    return omega_t_region(INFINITY);
}

/// Omega cut along the boundary of Omega_t; pieces outside Omega_t are
/// flagged so that f_t^E is piecewise smooth on every piece.
inline PhysicalRegion omega_split_region(double t)
{
    if (!(t > 0.0))
        throw Error("omega_split_region: t must be positive");
    if (std::isinf(t))
        return omega_region();
    PhysicalRegion region;
    region.label = "omega|t=" + std::to_string(t);
    if (t <= 1.0)
    {
        region.pieces.push_back(detail::box_piece(0.0, t, 0.0, t));
        region.pieces.push_back(detail::box_piece(t, 1.0, 0.0, t, false));
        region.pieces.push_back(detail::box_piece(0.0, 1.0, t, 1.0, false));
        region.pieces.push_back(detail::tail_piece(0.0, 1.0, false));
        return region;
    }
    region.pieces.push_back(detail::box_piece(0.0, 1.0, 0.0, 1.0));
    region.pieces.push_back(detail::tail_piece(1.0 / t, 1.0));
    region.pieces.push_back(detail::tail_piece(0.0, 1.0 / t, false));
    return region;
}

// ---------------------------------------------------------------------------
// Grid cover and masks
// ---------------------------------------------------------------------------

enum class Construction
{
    fd_p1,
    q1,
    p2,
    p1_varcoeff,
};

inline std::string to_string(Construction c)
{
    switch (c)
    {
    case Construction::fd_p1: return "fd_p1";
    case Construction::q1: return "q1";
    case Construction::p2: return "p2";
    case Construction::p1_varcoeff: return "p1_varcoeff";
    }
    return "?";
}

inline Construction construction_from_string(const std::string& s)
{
    if (s == "fd_p1")
        return Construction::fd_p1;
    if (s == "q1")
        return Construction::q1;
    if (s == "p2")
        return Construction::p2;
    if (s == "p1_varcoeff")
        return Construction::p1_varcoeff;
    throw Error("unknown construction '" + s + "'; valid: fd_p1, q1, p2, p1_varcoeff");
}

/// Unknowns per grid cell.
inline int blocks_per_cell(Construction c)
{
    return c == Construction::p2 ? 4 : 1;
}

/// Per-block fractional node offsets within a cell.
inline std::vector<std::array<double, 2>> block_offsets(Construction c)
{
    if (c == Construction::p2)
        return {{0.5, 0.0}, {0.0, 0.5}, {0.5, 0.5}, {0.0, 0.0}};
    return {{0.0, 0.0}};
}

/// floor(sqrt(n+1)): last column index with a node inside Omega.
inline std::int64_t last_column(std::int64_t n)
{
    auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(n + 1)));
    while (r * r > n + 1)
        --r;
    while ((r + 1) * (r + 1) <= n + 1)
        ++r;
    return r;
}

struct Extents
{
    std::int64_t n_x;
    std::int64_t n_y;
};

/// Bounding rectangle of cells: n_x = n * floor(sqrt(n+1)) columns, n_y = n rows.
inline Extents rectangle_extents(std::int64_t n, Construction = Construction::fd_p1)
{
    if (n < 1)
        throw Error("rectangle_extents: n must be >= 1");
    return {n * last_column(n), n};
}

//
// Rectangle cover with step h = 1/(n+1); cell i = (i1, i2) (1-based, i1 along
// x) carries p unknowns, unknown k sitting at ((i1 + o_k1) h, (i2 + o_k2) h).
// Masks are indexed by the 0-based linear row of linearize().
//
struct GridRestriction
{
    std::int64_t n = 0;
    double h = 0.0;
    Construction construction = Construction::fd_p1;
    int p = 1;
    std::vector<std::array<double, 2>> offsets;
    std::int64_t n_x = 0;
    std::int64_t n_y = 0;
    std::vector<bool> mask_omega;
    std::vector<double> t_values;
    std::vector<std::vector<bool>> mask_t;

    MultiIndex size() const { return MultiIndex{n_x, n_y}; }
    std::int64_t total_rows() const { return n_x * n_y * p; }

    std::array<double, 2> position(std::int64_t row) const
    {
        const std::int64_t block = row % p;
        const std::int64_t cell = row / p;
        const std::int64_t i1 = cell / n_y + 1;
        const std::int64_t i2 = cell % n_y + 1;
        const auto& o = offsets[static_cast<std::size_t>(block)];
        return {(static_cast<double>(i1) + o[0]) * h, (static_cast<double>(i2) + o[1]) * h};
    }

    /// strictly increasing enumeration of the set bits of a mask
    static std::vector<std::int64_t> rows_of(const std::vector<bool>& mask)
    {
        std::vector<std::int64_t> rows;
        for (std::size_t r = 0; r < mask.size(); ++r)
            if (mask[r])
                rows.push_back(static_cast<std::int64_t>(r));
        return rows;
    }

    std::vector<std::int64_t> rows_omega() const { return rows_of(mask_omega); }

    std::size_t t_slot(double t) const
    {
        for (std::size_t s = 0; s < t_values.size(); ++s)
            if (t_values[s] == t)
                return s;
        throw Error("GridRestriction: no mask for t=" + std::to_string(t));
    }

    std::vector<std::int64_t> rows_omega_t(double t) const { return rows_of(mask_t[t_slot(t)]); }

    static std::int64_t count(const std::vector<bool>& mask)
    {
        std::int64_t c = 0;
        for (bool b : mask)
            c += b ? 1 : 0;
        return c;
    }

    /// positions (within rows_omega()) of the Omega_t unknowns: the geometric
    /// index map that embeds C_{n,t} into A_n's index set
    std::vector<std::int64_t> embedding_omega_t(double t) const
    {
        const auto& mt = mask_t[t_slot(t)];
        std::vector<std::int64_t> out;
        std::int64_t pos = 0;
        for (std::size_t r = 0; r < mask_omega.size(); ++r)
        {
            if (!mask_omega[r])
                continue;
            if (mt[r])
                out.push_back(pos);
            ++pos;
        }
        return out;
    }

    /// CSV: cell i1, i2, block, x, y, in_omega, in_omega_t per t
    void write_csv(std::ostream& os) const
    {
        os << "i1,i2,block,x,y,in_omega";
        for (double t : t_values)
            os << ",in_omega_t_" << t;
        os << '\n';
        os.precision(17);
        for (std::int64_t r = 0; r < total_rows(); ++r)
        {
            const auto cell = r / p;
            const auto pos = position(r);
            os << cell / n_y + 1 << ',' << cell % n_y + 1 << ',' << r % p + 1 << ',' << pos[0]
               << ',' << pos[1] << ',' << (mask_omega[static_cast<std::size_t>(r)] ? 1 : 0);
            for (const auto& m : mask_t)
                os << ',' << (m[static_cast<std::size_t>(r)] ? 1 : 0);
            os << '\n';
        }
    }
};

inline GridRestriction build_masks(std::int64_t n, Construction construction,
                                   const std::vector<double>& t_values)
{
    if (n < 1)
        throw Error("build_masks: n must be >= 1");
    for (double t : t_values)
        if (!(t > 0.0))
            throw Error("build_masks: t values must be positive");

    GridRestriction g;
    g.n = n;
    g.h = 1.0 / static_cast<double>(n + 1);
    g.construction = construction;
    g.p = blocks_per_cell(construction);
    g.offsets = block_offsets(construction);
    const auto ext = rectangle_extents(n, construction);
    g.n_x = ext.n_x;
    g.n_y = ext.n_y;
    g.t_values = t_values;

    const auto total = static_cast<std::size_t>(g.total_rows());
    g.mask_omega.assign(total, false);
    g.mask_t.assign(t_values.size(), std::vector<bool>(total, false));
    for (std::size_t r = 0; r < total; ++r)
    {
        const auto [x, y] = g.position(static_cast<std::int64_t>(r));
        if (!in_omega(x, y))
            continue;
        g.mask_omega[r] = true;
        for (std::size_t s = 0; s < t_values.size(); ++s)
            g.mask_t[s][r] = in_omega_t(x, y, t_values[s]);
    }
    return g;
}

} // namespace symlab
