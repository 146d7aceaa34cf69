#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <lapacke.h>

#include "symlab/error.hpp"

namespace symlab {

using cplx = std::complex<double>;

//
// Dense Hermitian matrix stored as real and imaginary parts. Every matrix the
// catalog produces is real symmetric, so the imaginary part is usually empty
// and the real LAPACK path is taken.
//
struct HermitianMatrix
{
    Eigen::MatrixXd re;
    Eigen::MatrixXd im;       ///< empty when the matrix is real
    std::string provenance;   ///< which construction and parameters

    Eigen::Index size() const noexcept { return re.rows(); }
    bool is_real() const noexcept { return im.size() == 0; }

    cplx operator()(Eigen::Index r, Eigen::Index c) const
    {
        return {re(r, c), is_real() ? 0.0 : im(r, c)};
    }

    /// Drop an imaginary part that is identically zero.
    void compact()
    {
        if (!is_real() && im.cwiseAbs().maxCoeff() == 0.0)
            im.resize(0, 0);
    }

    static HermitianMatrix real(Eigen::MatrixXd m, std::string provenance = {})
    {
        return HermitianMatrix{std::move(m), Eigen::MatrixXd{}, std::move(provenance)};
    }
};

namespace detail {

inline void require_finite(const Eigen::MatrixXd& m, const char* what)
{
    if (!m.allFinite())
        throw Error(std::string(what) + ": matrix has non-finite entries");
}

} // namespace detail

/// Ascending eigenvalues of a real symmetric matrix (lower triangle is read).
inline std::vector<double> eigs(const Eigen::MatrixXd& a)
{
    if (a.rows() != a.cols())
        throw Error("eigs: matrix is not square");
    detail::require_finite(a, "eigs");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    std::vector<double> w(static_cast<std::size_t>(n));
    if (n == 0)
        return w;
    Eigen::MatrixXd work = a;
    const lapack_int info =
        LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, w.data());
    if (info != 0)
        throw Error("eigs: dsyevd failed with info=" + std::to_string(info));
    return w;
}

inline std::vector<double> eigs(const HermitianMatrix& a)
{
    if (a.is_real())
        return eigs(a.re);
    detail::require_finite(a.re, "eigs");
    detail::require_finite(a.im, "eigs");
    const lapack_int n = static_cast<lapack_int>(a.size());
    Eigen::MatrixXcd work(a.size(), a.size());
    work.real() = a.re;
    work.imag() = a.im;
    std::vector<double> w(static_cast<std::size_t>(n));
    const lapack_int info = LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n,
                                           reinterpret_cast<lapack_complex_double*>(work.data()),
                                           n, w.data());
    if (info != 0)
        throw Error("eigs: zheevd failed with info=" + std::to_string(info));
    return w;
}

/// Ascending eigenvalues and matching eigenvectors (columns) of a real symmetric matrix.
inline std::pair<std::vector<double>, Eigen::MatrixXd> eigh(const Eigen::MatrixXd& a)
{
    detail::require_finite(a, "eigh");
    const lapack_int n = static_cast<lapack_int>(a.rows());
    std::vector<double> w(static_cast<std::size_t>(n));
    Eigen::MatrixXd v = a;
    if (n == 0)
        return {w, v};
    const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, v.data(), n, w.data());
    if (info != 0)
        throw Error("eigh: dsyevd failed with info=" + std::to_string(info));
    return {std::move(w), std::move(v)};
}

/// Ascending singular values of an arbitrary real matrix.
inline std::vector<double> svals(const Eigen::MatrixXd& a)
{
    detail::require_finite(a, "svals");
    const lapack_int m = static_cast<lapack_int>(a.rows());
    const lapack_int n = static_cast<lapack_int>(a.cols());
    std::vector<double> s(static_cast<std::size_t>(std::min(m, n)));
    if (s.empty())
        return s;
    Eigen::MatrixXd work = a;
    const lapack_int info = LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, work.data(), m, s.data(),
                                           nullptr, 1, nullptr, 1);
    if (info != 0)
        throw Error("svals: dgesdd failed with info=" + std::to_string(info));
    std::sort(s.begin(), s.end());
    return s;
}

/// Singular values of a Hermitian matrix are the moduli of its eigenvalues.
inline std::vector<double> svals(const HermitianMatrix& a)
{
    auto s = eigs(a);
    for (auto& v : s)
        v = std::abs(v);
    std::sort(s.begin(), s.end());
    return s;
}

/// Ascending eigenvalues of a small Hermitian matrix (symbol evaluations).
inline Eigen::VectorXd small_eigs(const Eigen::MatrixXcd& m)
{
    if (m.rows() == 1)
        return Eigen::VectorXd::Constant(1, m(0, 0).real());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues();
}

} // namespace symlab
