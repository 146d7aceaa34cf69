#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "symlab/error.hpp"
#include "symlab/linalg.hpp"

namespace symlab {

using SymbolEvaluator =
    std::function<Eigen::MatrixXcd(std::span<const double> theta, std::span<const double> x)>;

//
// Matrix-valued symbol f(theta, x): [-pi,pi]^d x R^phys_dim -> C^{p x p}, Hermitian.
//
// `even_flags[r]` states entrywise evenness in theta_r. `spectral_even[r]`
// is the weaker statement that the eigenvalue functions are even in theta_r,
// which is what allows sampling over [0,pi] instead of [-pi,pi].
//
struct MatrixSymbol
{
    std::string name;
    std::string description;
    int d = 1;
    int p = 1;
    int phys_dim = 0;
    std::vector<bool> even_flags;
    std::vector<bool> spectral_even;
    int degree = 1;  ///< trigonometric degree per coordinate (Fourier support radius)
    SymbolEvaluator evaluator;

    Eigen::MatrixXcd operator()(std::span<const double> theta,
                                std::span<const double> x = {}) const
    {
        return evaluator(theta, x);
    }

    /// Ascending eigenvalues of f(theta, x).
    Eigen::VectorXd eigenvalues(std::span<const double> theta,
                                std::span<const double> x = {}) const
    {
        return small_eigs(evaluator(theta, x));
    }

    bool constant_coefficient() const noexcept { return phys_dim == 0; }
};

namespace symbols {

inline Eigen::MatrixXcd scalar(double v)
{
    return Eigen::MatrixXcd::Constant(1, 1, cplx(v, 0.0));
}

/// Stiffness symbol of 1D quadratic Lagrange elements (2x2 blocks).
inline Eigen::Matrix2cd q2_stiffness(double theta)
{
    const cplx e = std::polar(1.0, theta);
    Eigen::Matrix2cd m;
    m << 16.0, -8.0 - 8.0 * e,
         -8.0 - 8.0 * std::conj(e), 14.0 + 2.0 * std::cos(theta);
    return m / 3.0;
}

/// Mass symbol of 1D quadratic Lagrange elements.
inline Eigen::Matrix2cd q2_mass(double theta)
{
    const cplx e = std::polar(1.0, theta);
    Eigen::Matrix2cd m;
    m << 8.0, 1.0 + e,
         1.0 + std::conj(e), 4.0 - std::cos(theta);
    return m / 15.0;
}

inline constexpr double p2_alpha = 16.0 / 3.0;
inline constexpr double p2_beta = 4.0 / 3.0;
inline constexpr double p2_gamma = 4.0;

/// 4x4 symbol of quadratic triangular elements; components ordered as
/// (horizontal edge midpoint, vertical edge midpoint, diagonal midpoint, vertex).
inline Eigen::Matrix4cd p2_symbol(double t1, double t2)
{
    const cplx e1 = std::polar(1.0, t1);
    const cplx e2 = std::polar(1.0, t2);
    const double a = p2_alpha, b = p2_beta, g = p2_gamma;
    Eigen::Matrix4cd m;
    m << a, -b * (1.0 + e1), -b * (1.0 + e2), 0.0,
         -b * (1.0 + std::conj(e1)), a, 0.0, -b * (1.0 + e2),
         -b * (1.0 + std::conj(e2)), 0.0, a, -b * (1.0 + e1),
         0.0, -b * (1.0 + std::conj(e2)), -b * (1.0 + std::conj(e1)),
         g + 0.5 * b * (std::cos(t1) + std::cos(t2));
    return m;
}

/// 2D biquadratic stiffness symbol f2(t1) (x) h2(t2) + h2(t1) (x) f2(t2).
inline Eigen::Matrix4cd q2_2d_symbol(double t1, double t2)
{
    const Eigen::Matrix2cd f1 = q2_stiffness(t1), h1 = q2_mass(t1);
    const Eigen::Matrix2cd f2 = q2_stiffness(t2), h2 = q2_mass(t2);
    Eigen::Matrix4cd out;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            out.block<2, 2>(2 * i, 2 * j) = f1(i, j) * h2 + h1(i, j) * f2;
    return out;
}

/// Diffusion coefficient of the variable-coefficient model problem.
inline double diffusion_coefficient(double x, double y)
{
    const double s = std::sin(x + y);
    return (10.0 + x * x + 2.0 * y * y + s * s) / (1.0 + x * x + y * y);
}

} // namespace symbols

struct Q2Branches
{
    double f2_hi, f2_lo;  ///< eigenvalues of the stiffness symbol
    double h2_hi, h2_lo;  ///< eigenvalues of the mass symbol
};

/// Closed-form eigenvalue pairs of the 1D Q2 stiffness and mass symbols.
inline Q2Branches q2_eigenvalue_branches(double theta)
{
    const double c = std::cos(theta);
    const double rf = std::sqrt(129.0 + 126.0 * c + c * c) / 3.0;
    const double rh = std::sqrt(24.0 + 16.0 * c + c * c) / 30.0;
    return {5.0 + c / 3.0 + rf, 5.0 + c / 3.0 - rf, 0.4 - c / 30.0 + rh, 0.4 - c / 30.0 - rh};
}

namespace detail {

inline MatrixSymbol make_symbol(std::string name, std::string description, int d, int p,
                                int phys_dim, bool entry_even, SymbolEvaluator ev)
{
    MatrixSymbol s;
    s.name = std::move(name);
    s.description = std::move(description);
    s.d = d;
    s.p = p;
    s.phys_dim = phys_dim;
    s.even_flags.assign(static_cast<std::size_t>(d), entry_even);
    s.spectral_even.assign(static_cast<std::size_t>(d), true);
    s.evaluator = std::move(ev);
    return s;
}

} // namespace detail

inline const std::vector<std::string>& catalog_names()
{
    static const std::vector<std::string> names{
        "p1_1d",           "fd_p1_2d",   "q1_2d", "p2_2d", "q2_1d_stiffness",
        "q2_1d_mass",      "q2_2d",      "p1_2d_varcoeff"};
    return names;
}

/// Look up a catalog symbol by its stable string identifier.
inline MatrixSymbol catalog_get(const std::string& name)
{
    using detail::make_symbol;
    using symbols::scalar;

    if (name == "p1_1d")
        return make_symbol(name, "1 level, scalar, linear elements / 3-point stencil: 2-2cos(t)",
                           1, 1, 0, true, [](auto th, auto) {
                               return scalar(2.0 - 2.0 * std::cos(th[0]));
                           });
    if (name == "fd_p1_2d")
        return make_symbol(
            name, "2 levels, scalar, 5-point finite differences / P1 elements: 4-2cos(t1)-2cos(t2)",
            2, 1, 0, true, [](auto th, auto) {
                return scalar(4.0 - 2.0 * std::cos(th[0]) - 2.0 * std::cos(th[1]));
            });
    if (name == "q1_2d")
        return make_symbol(
            name, "2 levels, scalar, bilinear Q1 elements: (8-2cos t1-2cos t2-4cos t1 cos t2)/3", 2,
            1, 0, true, [](auto th, auto) {
                const double c1 = std::cos(th[0]), c2 = std::cos(th[1]);
                return scalar((8.0 - 2.0 * c1 - 2.0 * c2 - 4.0 * c1 * c2) / 3.0);
            });
    if (name == "p2_2d")
        return make_symbol(name, "2 levels, 4x4 blocks, quadratic triangular P2 elements", 2, 4, 0,
                           false, [](auto th, auto) {
                               return Eigen::MatrixXcd(symbols::p2_symbol(th[0], th[1]));
                           });
    if (name == "q2_1d_stiffness")
        return make_symbol(name, "1 level, 2x2 blocks, quadratic Q2 stiffness", 1, 2, 0, false,
                           [](auto th, auto) {
                               return Eigen::MatrixXcd(symbols::q2_stiffness(th[0]));
                           });
    if (name == "q2_1d_mass")
        return make_symbol(name, "1 level, 2x2 blocks, quadratic Q2 mass", 1, 2, 0, false,
                           [](auto th, auto) { return Eigen::MatrixXcd(symbols::q2_mass(th[0])); });
    if (name == "q2_2d")
        return make_symbol(name,
                           "2 levels, 4x4 blocks, biquadratic Q2 stiffness "
                           "f2(t1) kron h2(t2) + h2(t1) kron f2(t2)",
                           2, 4, 0, false, [](auto th, auto) {
                               return Eigen::MatrixXcd(symbols::q2_2d_symbol(th[0], th[1]));
                           });
    if (name == "p1_2d_varcoeff")
        return make_symbol(name,
                           "2 levels, scalar, P1 elements with diffusion a(x,y): "
                           "(4-2cos t1-2cos t2) a(x,y)",
                           2, 1, 2, true, [](auto th, auto x) {
                               if (x.size() < 2)
                                   throw Error("p1_2d_varcoeff needs a physical point (x,y)");
                               return scalar((4.0 - 2.0 * std::cos(th[0]) - 2.0 * std::cos(th[1])) *
                                             symbols::diffusion_coefficient(x[0], x[1]));
                           });

    std::string valid;
    for (const auto& n : catalog_names())
        valid += (valid.empty() ? "" : ", ") + n;
    throw Error("unknown symbol '" + name + "'; valid names: " + valid);
}

/// c * f
inline MatrixSymbol scale_symbol(const MatrixSymbol& f, double c)
{
    if (!std::isfinite(c))
        throw Error("scale_symbol: non-finite factor");
    MatrixSymbol out = f;
    out.name = f.name + "*" + std::to_string(c);
    out.evaluator = [ev = f.evaluator, c](auto th, auto x) -> Eigen::MatrixXcd { return c * ev(th, x); };
    return out;
}

using SupportPredicate = std::function<bool(std::span<const double> x)>;

//
// f_t^E: the base symbol inside the support set, the zero matrix outside.
// The support is expressed over physical variables, so the extended symbol
// always carries phys_dim >= support_dim.
//
struct ExtendedSymbol
{
    MatrixSymbol base;
    SupportPredicate inside;
    int support_dim = 2;

    Eigen::MatrixXcd operator()(std::span<const double> theta, std::span<const double> x) const
    {
        if (!inside(x))
            return Eigen::MatrixXcd::Zero(base.p, base.p);
        return base(theta, x);
    }

    MatrixSymbol as_symbol() const
    {
        MatrixSymbol out = base;
        out.name = base.name + "^E";
        out.phys_dim = std::max(base.phys_dim, support_dim);
        out.evaluator = [b = base.evaluator, in = inside, p = base.p](auto th, auto x) -> Eigen::MatrixXcd {
            if (!in(x))
                return Eigen::MatrixXcd::Zero(p, p);
            return b(th, x);
        };
        return out;
    }
};

inline ExtendedSymbol extend_symbol(const MatrixSymbol& f, SupportPredicate chi,
                                    int support_dim = 2)
{
    return ExtendedSymbol{f, std::move(chi), support_dim};
}

} // namespace symlab
