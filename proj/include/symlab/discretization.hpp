#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "symlab/domain.hpp"
#include "symlab/error.hpp"
#include "symlab/linalg.hpp"
#include "symlab/symbol_catalog.hpp"
#include "symlab/toeplitz.hpp"

namespace symlab {

enum class Family
{
    p1_1d,
    p1_1d_scaled,
    fd_p1,
    q1,
    p2,
    p1_varcoeff,
};

enum class Restriction
{
    full_rectangle,
    omega,
    omega_t,
};

enum class Padding
{
    none,
    zero_embed,     ///< C_{n,t} placed at its own indices inside A_n's index set
    diag_sandwich,  ///< D(chi_{Omega_t}) A_n D(chi_{Omega_t})
};

inline std::string to_string(Family f)
{
    switch (f)
    {
    case Family::p1_1d: return "p1_1d";
    case Family::p1_1d_scaled: return "p1_1d_scaled";
    case Family::fd_p1: return "fd_p1";
    case Family::q1: return "q1";
    case Family::p2: return "p2";
    case Family::p1_varcoeff: return "p1_varcoeff";
    }
    return "?";
}

inline std::string to_string(Restriction r)
{
    switch (r)
    {
    case Restriction::full_rectangle: return "full_rectangle";
    case Restriction::omega: return "omega";
    case Restriction::omega_t: return "omega_t";
    }
    return "?";
}

inline std::string to_string(Padding p)
{
    switch (p)
    {
    case Padding::none: return "none";
    case Padding::zero_embed: return "zero_embed";
    case Padding::diag_sandwich: return "diag_sandwich";
    }
    return "?";
}

inline Family family_from_string(const std::string& s)
{
    for (auto f : {Family::p1_1d, Family::p1_1d_scaled, Family::fd_p1, Family::q1, Family::p2,
                   Family::p1_varcoeff})
        if (to_string(f) == s)
            return f;
    throw Error("unknown family '" + s +
                "'; valid: p1_1d, p1_1d_scaled, fd_p1, q1, p2, p1_varcoeff");
}

inline bool is_2d(Family f)
{
    return f != Family::p1_1d && f != Family::p1_1d_scaled;
}

inline Construction construction_of(Family f)
{
    switch (f)
    {
    case Family::fd_p1: return Construction::fd_p1;
    case Family::q1: return Construction::q1;
    case Family::p2: return Construction::p2;
    case Family::p1_varcoeff: return Construction::p1_varcoeff;
    default: throw Error("family '" + to_string(f) + "' has no 2D grid construction");
    }
}

/// Catalog symbol that describes a family.
inline std::string symbol_name_of(Family f)
{
    switch (f)
    {
    case Family::p1_1d:
    case Family::p1_1d_scaled: return "p1_1d";
    case Family::fd_p1: return "fd_p1_2d";
    case Family::q1: return "q1_2d";
    case Family::p2: return "p2_2d";
    case Family::p1_varcoeff: return "p1_2d_varcoeff";
    }
    return "?";
}

struct MatrixFamilySpec
{
    Family family = Family::fd_p1;
    std::int64_t n = 8;
    Restriction restriction = Restriction::omega;
    double t = 0.0;  ///< exhaustion parameter (omega_t restriction, p1_1d_scaled)
    Padding padding = Padding::none;

    void validate() const
    {
        if (n < 1)
            throw Error("family spec: n must be >= 1");
        if (padding != Padding::none && restriction != Restriction::omega_t)
            throw Error("family spec: padding requires the omega_t restriction");
        if ((restriction == Restriction::omega_t || family == Family::p1_1d_scaled) && !(t > 0.0))
            throw Error("family spec: t must be positive");
    }

    std::string label() const
    {
        std::string s = to_string(family) + "_n" + std::to_string(n);
        if (!is_2d(family))
            return family == Family::p1_1d_scaled ? s + "_t" + format_t() : s;
        if (restriction == Restriction::full_rectangle)
            return s + "_rect";
        if (restriction == Restriction::omega)
            return s + "_A";
        return s + (padding == Padding::none ? "_C" : "_B") + "_t" + format_t() +
               (padding == Padding::diag_sandwich ? "_sandwich" : "");
    }

    nlohmann::json to_json() const
    {
        return {{"family", to_string(family)},        {"n", n},
                {"restriction", to_string(restriction)}, {"t", t},
                {"padding", to_string(padding)},      {"label", label()}};
    }

private:
    std::string format_t() const
    {
        std::string s = std::to_string(t);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.')
            s.pop_back();
        return s;
    }
};

using Coefficient = std::function<double(double, double)>;

namespace detail {

/// P1 stiffness on the triangulated grid (every square split along its
/// SW-NE diagonal), one-point centroid rule for the coefficient, restricted
/// to the given rows of the (n_x, n_y) node grid. No h scaling.
inline Eigen::MatrixXd p1_stiffness(const GridRestriction& grid,
                                    const std::vector<std::int64_t>& rows,
                                    const Coefficient& a)
{
    const auto m = static_cast<Eigen::Index>(rows.size());
    std::vector<std::int64_t> where(static_cast<std::size_t>(grid.total_rows()), -1);
    for (Eigen::Index r = 0; r < m; ++r)
        where[static_cast<std::size_t>(rows[static_cast<std::size_t>(r)])] = r;

    // restricted position of node (I1, I2) on the extended grid 0..n_x+1, 0..n_y+1
    auto local = [&](std::int64_t i1, std::int64_t i2) -> std::int64_t {
        if (i1 < 1 || i1 > grid.n_x || i2 < 1 || i2 > grid.n_y)
            return -1;
        return where[static_cast<std::size_t>((i1 - 1) * grid.n_y + (i2 - 1))];
    };

    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(m, m);
    const double h = grid.h;

    // reference element matrices: right angle at the second vertex
    static constexpr std::array<std::array<double, 3>, 3> ref{{
        {{0.5, -0.5, 0.0}},
        {{-0.5, 1.0, -0.5}},
        {{0.0, -0.5, 0.5}},
    }};

    auto add = [&](const std::array<std::array<std::int64_t, 2>, 3>& v) {
        const double cx = (static_cast<double>(v[0][0] + v[1][0] + v[2][0]) / 3.0) * h;
        const double cy = (static_cast<double>(v[0][1] + v[1][1] + v[2][1]) / 3.0) * h;
        std::array<std::int64_t, 3> idx{};
        bool any = false;
        for (int q = 0; q < 3; ++q)
        {
            idx[q] = local(v[q][0], v[q][1]);
            any = any || idx[q] >= 0;
        }
        if (!any)
            return;
        const double coef = a(cx, cy);
        for (int q = 0; q < 3; ++q)
        {
            if (idx[q] < 0)
                continue;
            for (int s = 0; s < 3; ++s)
                if (idx[s] >= 0 && ref[q][s] != 0.0)
                    k(idx[q], idx[s]) += coef * ref[q][s];
        }
    };

    for (std::int64_t i1 = 0; i1 <= grid.n_x; ++i1)
    {
        for (std::int64_t i2 = 0; i2 <= grid.n_y; ++i2)
        {
            // lower-right triangle: (i1,i2), (i1+1,i2), (i1+1,i2+1), right angle at (i1+1,i2)
            add({{{i1, i2}, {i1 + 1, i2}, {i1 + 1, i2 + 1}}});
            // upper-left triangle: (i1,i2), (i1,i2+1), (i1+1,i2+1), right angle at (i1,i2+1)
            add({{{i1, i2}, {i1, i2 + 1}, {i1 + 1, i2 + 1}}});
        }
    }
    return k;
}

inline Eigen::MatrixXd embed(const Eigen::MatrixXd& c, const std::vector<std::int64_t>& positions,
                             Eigen::Index size)
{
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
    for (std::size_t r = 0; r < positions.size(); ++r)
        for (std::size_t s = 0; s < positions.size(); ++s)
            out(positions[r], positions[s]) = c(static_cast<Eigen::Index>(r),
                                                static_cast<Eigen::Index>(s));
    return out;
}

} // namespace detail

/// Matrix size a spec will produce, without assembling it.
inline std::int64_t family_size(const MatrixFamilySpec& spec)
{
    spec.validate();
    if (!is_2d(spec.family))
        return spec.n;
    const std::vector<double> ts =
        spec.restriction == Restriction::omega_t ? std::vector<double>{spec.t} : std::vector<double>{};
    const auto grid = build_masks(spec.n, construction_of(spec.family), ts);
    switch (spec.restriction)
    {
    case Restriction::full_rectangle: return grid.total_rows();
    case Restriction::omega: return GridRestriction::count(grid.mask_omega);
    case Restriction::omega_t:
        return spec.padding == Padding::none ? GridRestriction::count(grid.mask_t[0])
                                             : GridRestriction::count(grid.mask_omega);
    }
    return 0;
}

/// Restricted grid rows selected by a spec (omega or omega_t, before padding).
inline std::vector<std::int64_t> family_rows(const GridRestriction& grid,
                                             const MatrixFamilySpec& spec)
{
    switch (spec.restriction)
    {
    case Restriction::full_rectangle: {
        std::vector<std::int64_t> rows(static_cast<std::size_t>(grid.total_rows()));
        for (std::size_t r = 0; r < rows.size(); ++r)
            rows[r] = static_cast<std::int64_t>(r);
        return rows;
    }
    case Restriction::omega: return grid.rows_omega();
    case Restriction::omega_t: return grid.rows_omega_t(spec.t);
    }
    return {};
}

/// Build a restricted (unpadded) matrix on the given grid rows.
inline Eigen::MatrixXd assemble_on_rows(Family family, const GridRestriction& grid,
                                        const std::vector<std::int64_t>& rows,
                                        const Coefficient& coefficient = symbols::diffusion_coefficient)
{
    if (family == Family::p1_varcoeff)
        return detail::p1_stiffness(grid, rows, coefficient);
    const auto table = fourier_coefficients(catalog_get(symbol_name_of(family)));
    auto m = assemble_toeplitz_rows(table, grid.size(), rows);
    if (!m.is_real())
        throw Error("assemble_on_rows: catalog family produced a complex matrix");
    return std::move(m.re);
}

//
// Build A_n (omega), C_{n,t} (omega_t), B_{n,t} (omega_t + padding), the
// Toeplitz cover (full_rectangle) or the 1D pair. `max_size` is the memory
// budget on the matrix dimension.
//
inline HermitianMatrix build_family(const MatrixFamilySpec& spec,
                                    std::int64_t max_size = std::numeric_limits<std::int64_t>::max(),
                                    const Coefficient& coefficient = symbols::diffusion_coefficient)
{
    spec.validate();

    if (!is_2d(spec.family))
    {
        if (spec.n > max_size)
            throw Error("budget exceeded: required N=" + std::to_string(spec.n) + " > budget " +
                        std::to_string(max_size));
        if (spec.n < 2)
            throw Error("build_family: degenerate size n < 2");
        const auto table = fourier_coefficients(catalog_get("p1_1d"));
        auto m = assemble_toeplitz(table, MultiIndex{spec.n});
        if (spec.family == Family::p1_1d_scaled)
            m.re *= (1.0 - 1.0 / spec.t);
        m.provenance = spec.label();
        return m;
    }

    const std::vector<double> ts =
        spec.restriction == Restriction::omega_t ? std::vector<double>{spec.t} : std::vector<double>{};
    const auto grid = build_masks(spec.n, construction_of(spec.family), ts);

    const std::int64_t required = [&] {
        if (spec.restriction == Restriction::omega_t && spec.padding != Padding::none)
            return GridRestriction::count(grid.mask_omega);
        return static_cast<std::int64_t>(family_rows(grid, spec).size());
    }();
    if (required > max_size)
        throw Error("budget exceeded: required N=" + std::to_string(required) + " > budget " +
                    std::to_string(max_size));

    const auto rows = family_rows(grid, spec);
    if (rows.size() < 2)
        throw Error("build_family: restriction '" + spec.label() + "' keeps fewer than 2 nodes");

    HermitianMatrix out;
    out.provenance = spec.label();
    switch (spec.padding)
    {
    case Padding::none:
        out.re = assemble_on_rows(spec.family, grid, rows, coefficient);
        break;
    case Padding::zero_embed: {
        const auto c = assemble_on_rows(spec.family, grid, rows, coefficient);
        out.re = detail::embed(c, grid.embedding_omega_t(spec.t),
                               static_cast<Eigen::Index>(GridRestriction::count(grid.mask_omega)));
        break;
    }
    case Padding::diag_sandwich: {
        const auto omega_rows = grid.rows_omega();
        Eigen::MatrixXd a = assemble_on_rows(spec.family, grid, omega_rows, coefficient);
        Eigen::VectorXd chi = Eigen::VectorXd::Zero(a.rows());
        for (auto pos : grid.embedding_omega_t(spec.t))
            chi(pos) = 1.0;
        out.re = chi.asDiagonal() * a * chi.asDiagonal();
        break;
    }
    }
    return out;
}

/// 1D Q2 stiffness K_n: T_n(f2) without its last row and column (size 2n-1),
/// the Dirichlet node at x = 1 removed.
inline HermitianMatrix q2_stiffness_1d(std::int64_t n)
{
    if (n < 1)
        throw Error("q2_stiffness_1d: n must be >= 1");
    const auto table = fourier_coefficients(catalog_get("q2_1d_stiffness"));
    std::vector<std::int64_t> rows(static_cast<std::size_t>(2 * n - 1));
    for (std::size_t r = 0; r < rows.size(); ++r)
        rows[r] = static_cast<std::int64_t>(r);
    auto m = assemble_toeplitz_rows(table, MultiIndex{n}, rows);
    m.provenance = "q2_1d_n" + std::to_string(n);
    return m;
}

} // namespace symlab
