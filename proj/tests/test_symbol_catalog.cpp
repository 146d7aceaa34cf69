#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "symlab/symbol_catalog.hpp"

using namespace symlab;

namespace {

constexpr double pi = std::numbers::pi;

std::vector<double> physical_point() { return {0.7, 0.3}; }

} // namespace

TEST(SymbolCatalog, ListsEightStableNames)
{
    EXPECT_EQ(catalog_names().size(), 8u);
    for (const auto& name : catalog_names())
        EXPECT_EQ(catalog_get(name).name, name);
}

TEST(SymbolCatalog, UnknownNameListsValidOnes)
{
    try
    {
        catalog_get("p3_2d");
        FAIL() << "expected an error";
    }
    catch (const Error& e)
    {
        EXPECT_NE(std::string(e.what()).find("fd_p1_2d"), std::string::npos);
    }
}

TEST(SymbolCatalog, EverySymbolIsHermitianOnRandomPoints)
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (const auto& name : catalog_names())
    {
        const auto f = catalog_get(name);
        for (int trial = 0; trial < 50; ++trial)
        {
            std::vector<double> th(static_cast<std::size_t>(f.d));
            for (auto& v : th)
                v = u(rng);
            const auto m = f(th, physical_point());
            ASSERT_EQ(m.rows(), f.p);
            EXPECT_LT((m - m.adjoint()).cwiseAbs().maxCoeff(), 1e-14) << name;
        }
    }
}

TEST(SymbolCatalog, EvennessFlagsHoldNumerically)
{
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> u(-pi, pi);
    for (const auto& name : catalog_names())
    {
        const auto f = catalog_get(name);
        for (int r = 0; r < f.d; ++r)
            for (int trial = 0; trial < 30; ++trial)
            {
                std::vector<double> th(static_cast<std::size_t>(f.d));
                for (auto& v : th)
                    v = u(rng);
                auto reflected = th;
                reflected[static_cast<std::size_t>(r)] = -reflected[static_cast<std::size_t>(r)];
                const auto a = f(th, physical_point());
                const auto b = f(reflected, physical_point());
                if (f.even_flags[static_cast<std::size_t>(r)])
                {
                    EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-14) << name;
                }
                if (f.spectral_even[static_cast<std::size_t>(r)])
                {
                    EXPECT_LT((f.eigenvalues(th, physical_point()) -
                               f.eigenvalues(reflected, physical_point()))
                                  .cwiseAbs()
                                  .maxCoeff(),
                              1e-12)
                        << name << " level " << r;
                }
            }
    }
}

TEST(SymbolCatalog, ScalarClosedForms)
{
    const std::vector<double> th{0.4, 1.1};
    const double c1 = std::cos(0.4), c2 = std::cos(1.1);
    EXPECT_NEAR(catalog_get("p1_1d")(std::vector<double>{0.4})(0, 0).real(), 2 - 2 * c1, 1e-15);
    EXPECT_NEAR(catalog_get("fd_p1_2d")(th)(0, 0).real(), 4 - 2 * c1 - 2 * c2, 1e-15);
    EXPECT_NEAR(catalog_get("q1_2d")(th)(0, 0).real(), (8 - 2 * c1 - 2 * c2 - 4 * c1 * c2) / 3,
                1e-15);
    const double a = symbols::diffusion_coefficient(0.7, 0.3);
    EXPECT_NEAR(catalog_get("p1_2d_varcoeff")(th, physical_point())(0, 0).real(),
                (4 - 2 * c1 - 2 * c2) * a, 1e-14);
    EXPECT_THROW(catalog_get("p1_2d_varcoeff")(th), Error);
}

TEST(SymbolCatalog, DiffusionCoefficientHandValues)
{
    // a(0,0) = 10; a(1,0) = (10 + 1 + sin^2 1)/2
    EXPECT_DOUBLE_EQ(symbols::diffusion_coefficient(0, 0), 10.0);
    EXPECT_NEAR(symbols::diffusion_coefficient(1, 0), (11 + std::pow(std::sin(1.0), 2)) / 2, 1e-15);
}

TEST(SymbolCatalog, Q2BranchesMatchTwoByTwoEigensolve)
{
    // oracle: eigenvalues of [[a, b], [conj b, d]] from trace and determinant
    auto pair = [](const Eigen::Matrix2cd& m) {
        const double a = m(0, 0).real(), d = m(1, 1).real();
        const double b2 = std::norm(m(0, 1));
        const double disc = std::sqrt((a - d) * (a - d) / 4 + b2);
        return std::pair{(a + d) / 2 + disc, (a + d) / 2 - disc};
    };
    for (int k = 0; k <= 64; ++k)
    {
        const double th = pi * k / 64.0;
        const auto br = q2_eigenvalue_branches(th);
        const auto [fh, fl] = pair(symbols::q2_stiffness(th));
        const auto [hh, hl] = pair(symbols::q2_mass(th));
        EXPECT_NEAR(br.f2_hi, fh, 1e-12);
        EXPECT_NEAR(br.f2_lo, fl, 1e-12);
        EXPECT_NEAR(br.h2_hi, hh, 1e-12);
        EXPECT_NEAR(br.h2_lo, hl, 1e-12);
    }
    // f2 at theta = 0: eigenvalues 0 and 32/3 (the constant vector is in the kernel)
    const auto br0 = q2_eigenvalue_branches(0.0);
    EXPECT_NEAR(br0.f2_lo, 0.0, 1e-14);
    EXPECT_NEAR(br0.f2_hi, 32.0 / 3.0, 1e-14);
}

TEST(SymbolCatalog, P2SymbolAtOrigin)
{
    const auto ev = catalog_get("p2_2d").eigenvalues(std::vector<double>{0.0, 0.0});
    EXPECT_NEAR(ev(0), 0.0, 1e-13);
    EXPECT_NEAR(ev(1), 16.0 / 3.0, 1e-13);
    EXPECT_NEAR(ev(2), 16.0 / 3.0, 1e-13);
    EXPECT_NEAR(ev(3), 32.0 / 3.0, 1e-13);
}

TEST(SymbolCatalog, P2IsPositiveSemidefinite)
{
    const auto f = catalog_get("p2_2d");
    for (int a = 0; a <= 20; ++a)
        for (int b = 0; b <= 20; ++b)
            EXPECT_GT(f.eigenvalues(std::vector<double>{pi * a / 20, pi * b / 20})(0), -1e-12);
}

TEST(SymbolCatalog, Q22dIsKroneckerSum)
{
    const double t1 = 0.3, t2 = 2.2;
    const Eigen::Matrix2cd f1 = symbols::q2_stiffness(t1), h1 = symbols::q2_mass(t1);
    const Eigen::Matrix2cd f2 = symbols::q2_stiffness(t2), h2 = symbols::q2_mass(t2);
    const auto m = catalog_get("q2_2d")(std::vector<double>{t1, t2});
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    EXPECT_NEAR(std::abs(m(2 * i + k, 2 * j + l) -
                                         (f1(i, j) * h2(k, l) + h1(i, j) * f2(k, l))),
                                0.0, 1e-15);
    // eigenvalues are pairwise sums lambda(f1) mu(h2) + mu(h1) lambda(f2) only when the
    // factors commute; check the weaker fact that the spectrum is nonnegative
    EXPECT_GT(catalog_get("q2_2d").eigenvalues(std::vector<double>{t1, t2})(0), -1e-12);
}

TEST(SymbolCatalog, ExtendedSymbolVanishesOutsideSupport)
{
    const auto f = catalog_get("fd_p1_2d");
    const auto ext = extend_symbol(f, [](std::span<const double> x) { return x[0] < 1.0; });
    const std::vector<double> th{1.0, 2.0};
    EXPECT_EQ(ext(th, std::vector<double>{1.5, 0.1}).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(ext(th, std::vector<double>{0.5, 0.1}), f(th));
    const auto s = ext.as_symbol();
    EXPECT_EQ(s.phys_dim, 2);
    EXPECT_EQ(s(th, std::vector<double>{1.5, 0.1}).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SymbolCatalog, ScaleSymbol)
{
    const auto f = scale_symbol(catalog_get("p1_1d"), 0.5);
    EXPECT_NEAR(f(std::vector<double>{pi})(0, 0).real(), 2.0, 1e-15);
    EXPECT_THROW(scale_symbol(f, NAN), Error);
}
