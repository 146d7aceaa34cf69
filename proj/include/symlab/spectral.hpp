#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "symlab/domain.hpp"
#include "symlab/error.hpp"
#include "symlab/linalg.hpp"
#include "symlab/symbol_catalog.hpp"

namespace symlab {

// ---------------------------------------------------------------------------
// Test functions
// ---------------------------------------------------------------------------

struct TestFunction
{
    enum class Kind
    {
        hat,
        constant_one,
        piecewise_linear,
    };

    Kind kind = Kind::constant_one;
    double center = 0.0;
    double half_width = 1.0;
    std::vector<std::pair<double, double>> knots;  ///< piecewise_linear, zero outside

    static TestFunction hat(double c, double w)
    {
        if (!(w > 0.0))
            throw Error("hat test function needs a positive half-width");
        return {Kind::hat, c, w, {}};
    }

    static TestFunction one() { return {Kind::constant_one, 0.0, 1.0, {}}; }

    static TestFunction piecewise(std::vector<std::pair<double, double>> knots)
    {
        if (knots.size() < 2)
            throw Error("piecewise-linear test function needs at least two knots");
        for (std::size_t k = 1; k < knots.size(); ++k)
            if (!(knots[k].first > knots[k - 1].first))
                throw Error("piecewise-linear knots must be strictly increasing");
        for (const auto& [x, y] : knots)
            if (y < 0.0)
                throw Error("piecewise-linear test function must be nonnegative");
        if (knots.front().second != 0.0 || knots.back().second != 0.0)
            throw Error("piecewise-linear test function must vanish at its end knots");
        return {Kind::piecewise_linear, 0.0, 1.0, std::move(knots)};
    }

    double operator()(double x) const
    {
        switch (kind)
        {
        case Kind::constant_one: return 1.0;
        case Kind::hat: return std::max(0.0, 1.0 - std::abs(x - center) / half_width);
        case Kind::piecewise_linear: {
            if (x <= knots.front().first || x >= knots.back().first)
                return 0.0;
            auto it = std::upper_bound(knots.begin(), knots.end(), x,
                                       [](double v, const auto& k) { return v < k.first; });
            const auto& [x1, y1] = *it;
            const auto& [x0, y0] = *(it - 1);
            return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
        }
        }
        return 0.0;
    }

    double sup_norm() const
    {
        if (kind != Kind::piecewise_linear)
            return 1.0;
        double m = 0.0;
        for (const auto& k : knots)
            m = std::max(m, k.second);
        return m;
    }

    std::string id() const
    {
        switch (kind)
        {
        case Kind::constant_one: return "one";
        case Kind::hat: {
            char buf[64];
            std::snprintf(buf, sizeof buf, "hat(c=%g,w=%g)", center, half_width);
            return buf;
        }
        case Kind::piecewise_linear: return "pl" + std::to_string(knots.size());
        }
        return "?";
    }
};

/// Hats of half-width 1 centred at 0, 1, ..., ceil(range_max), then the
/// constant-one normalization sentinel.
inline std::vector<TestFunction> standard_bank(double range_max)
{
    std::vector<TestFunction> bank;
    const auto top = static_cast<int>(std::ceil(range_max - 1e-12));
    for (int c = 0; c <= std::max(top, 0); ++c)
        bank.push_back(TestFunction::hat(c, 1.0));
    bank.push_back(TestFunction::one());
    return bank;
}

// ---------------------------------------------------------------------------
// Domains of the distribution: Fourier box x optional physical region
// ---------------------------------------------------------------------------

struct DistributionDomain
{
    std::optional<PhysicalRegion> region;  ///< physical variables; none for the Fourier box only
    SupportPredicate support;              ///< chi of f_t^E; empty = whole region

    static DistributionDomain fourier_box() { return {}; }

    static DistributionDomain over(PhysicalRegion r, SupportPredicate chi = {})
    {
        return {std::move(r), std::move(chi)};
    }
};

struct Resolution
{
    int fourier = 16;   ///< midpoints per Fourier coordinate on [0,pi]
    int physical = 8;   ///< midpoints per side of each region piece
};

// ---------------------------------------------------------------------------
// Weighted samples of all eigenvalue branches of a symbol
// ---------------------------------------------------------------------------

struct SymbolSample
{
    double value;
    double weight;
    int branch;  ///< 0-based ascending eigenvalue index at the sample point
};

//
// Pooled, sorted, weighted samples; total weight 1. The monotone
// rearrangement is the weighted quantile function of this multiset.
//
struct SampleSet
{
    std::vector<SymbolSample> samples;
    int p = 1;

    std::size_t size() const noexcept { return samples.size(); }

    std::vector<double> values() const
    {
        std::vector<double> v(samples.size());
        for (std::size_t s = 0; s < samples.size(); ++s)
            v[s] = samples[s].value;
        return v;
    }

    void finalize()
    {
        std::stable_sort(samples.begin(), samples.end(),
                         [](const auto& a, const auto& b) { return a.value < b.value; });
        double total = 0.0;
        for (const auto& s : samples)
            total += s.weight;
        if (!(total > 0.0))
            throw Error("symbol sampling produced zero total weight");
        for (auto& s : samples)
            s.weight /= total;
        cumulative_.resize(samples.size());
        double acc = 0.0;
        for (std::size_t s = 0; s < samples.size(); ++s)
        {
            acc += samples[s].weight;
            cumulative_[s] = acc;
        }
    }

    /// Index of the sample at weighted quantile q in (0, 1].
    std::size_t quantile_index(double q) const
    {
        auto it = std::lower_bound(cumulative_.begin(), cumulative_.end(), q - 1e-15);
        if (it == cumulative_.end())
            return samples.size() - 1;
        return static_cast<std::size_t>(it - cumulative_.begin());
    }

    double quantile(double q) const { return samples[quantile_index(q)].value; }

    /// sum_s w_s F(v_s): the quadrature of (1/mu(D)) int (1/p) sum_k F(lambda_k)
    template <class Fn>
    double average(const Fn& fn) const
    {
        double acc = 0.0;
        for (const auto& s : samples)
            acc += s.weight * fn(s.value);
        return acc;
    }

    double min_value() const { return samples.front().value; }
    double max_value() const { return samples.back().value; }

private:
    std::vector<double> cumulative_;
};

namespace detail {

struct FourierGrid
{
    std::vector<std::vector<double>> points;
};

inline FourierGrid fourier_grid(const MatrixSymbol& f, int g)
{
    // [0,pi] when the eigenvalue functions are even in that coordinate, else [-pi,pi]
    std::vector<std::vector<double>> axes(static_cast<std::size_t>(f.d));
    for (int r = 0; r < f.d; ++r)
    {
        const bool even = r < static_cast<int>(f.spectral_even.size()) && f.spectral_even[r];
        const double lo = even ? 0.0 : -std::numbers::pi;
        const int count = even ? g : 2 * g;
        const double step = (std::numbers::pi - lo) / count;
        for (int a = 0; a < count; ++a)
            axes[static_cast<std::size_t>(r)].push_back(lo + (a + 0.5) * step);
    }
    FourierGrid grid;
    std::vector<std::size_t> idx(axes.size(), 0);
    while (true)
    {
        std::vector<double> pt(axes.size());
        for (std::size_t r = 0; r < axes.size(); ++r)
            pt[r] = axes[r][idx[r]];
        grid.points.push_back(std::move(pt));
        std::size_t r = axes.size();
        while (r > 0 && idx[r - 1] + 1 == axes[r - 1].size())
        {
            idx[r - 1] = 0;
            --r;
        }
        if (r == 0)
            break;
        ++idx[r - 1];
    }
    return grid;
}

struct PhysicalPoint
{
    std::array<double, 2> x;
    double weight;
};

inline std::vector<PhysicalPoint> physical_grid(const PhysicalRegion& region, int g)
{
    std::vector<PhysicalPoint> pts;
    const double cell = 1.0 / (static_cast<double>(g) * g);
    for (const auto& piece : region.pieces)
        for (int a = 0; a < g; ++a)
            for (int b = 0; b < g; ++b)
            {
                const double s1 = (a + 0.5) / g, s2 = (b + 0.5) / g;
                pts.push_back({piece.map(s1, s2), piece.jacobian(s1, s2) * cell});
            }
    return pts;
}

} // namespace detail

/// Evaluate every eigenvalue branch of f on a tensor midpoint grid over the
/// (evenness-reduced) Fourier box times the physical region, pool and sort.
inline SampleSet symbol_rearrangement(const MatrixSymbol& f, const DistributionDomain& domain,
                                      Resolution res)
{
    if (res.fourier < 1 || res.physical < 1)
        throw Error("symbol_rearrangement: grid must have at least one point per dimension");
    if (f.phys_dim > 0 && !domain.region)
        throw Error("symbol_rearrangement: symbol '" + f.name +
                    "' needs a physical region to be sampled");

    SampleSet set;
    set.p = f.p;
    const auto fgrid = detail::fourier_grid(f, res.fourier);
    const double wf = 1.0 / static_cast<double>(fgrid.points.size());
    const double branch_share = 1.0 / f.p;

    if (f.phys_dim == 0)
    {
        // x-independent symbol: the region only contributes the support fraction
        double inside = 1.0, outside = 0.0;
        if (domain.region && domain.support)
        {
            inside = outside = 0.0;
            for (const auto& pt : detail::physical_grid(*domain.region, res.physical))
                (domain.support(pt.x) ? inside : outside) += pt.weight;
        }
        set.samples.reserve(fgrid.points.size() * static_cast<std::size_t>(f.p) + f.p);
        if (inside > 0.0)
            for (const auto& th : fgrid.points)
            {
                const auto ev = f.eigenvalues(th);
                for (int k = 0; k < f.p; ++k)
                    set.samples.push_back({ev(k), inside * wf * branch_share, k});
            }
        if (outside > 0.0)
            for (int k = 0; k < f.p; ++k)
                set.samples.push_back({0.0, outside * branch_share, k});
        set.finalize();
        return set;
    }

    const auto pgrid = detail::physical_grid(*domain.region, res.physical);
    set.samples.reserve(pgrid.size() * fgrid.points.size() * static_cast<std::size_t>(f.p));
    double outside = 0.0;
    for (const auto& pt : pgrid)
    {
        if (domain.support && !domain.support(pt.x))
        {
            outside += pt.weight;
            continue;
        }
        for (const auto& th : fgrid.points)
        {
            const auto ev = f.eigenvalues(th, pt.x);
            for (int k = 0; k < f.p; ++k)
                set.samples.push_back({ev(k), pt.weight * wf * branch_share, k});
        }
    }
    if (outside > 0.0)
        for (int k = 0; k < f.p; ++k)
            set.samples.push_back({0.0, outside * branch_share, k});
    set.finalize();
    return set;
}

/// Resolution giving at least `min_samples` pooled samples.
inline Resolution resolution_for(const MatrixSymbol& f, const DistributionDomain& domain,
                                 std::int64_t min_samples)
{
    const bool physical = f.phys_dim > 0 && domain.region.has_value();
    const double pieces = physical ? static_cast<double>(domain.region->pieces.size()) : 1.0;
    // fourier grid has prod(count_r) points where count_r = g or 2g
    double fourier_factor = 1.0;
    for (int r = 0; r < f.d; ++r)
        fourier_factor *= (r < static_cast<int>(f.spectral_even.size()) && f.spectral_even[r]) ? 1.0 : 2.0;
    const int dims = f.d + (physical ? 2 : 0);
    const double per_point = static_cast<double>(f.p) * fourier_factor * pieces;
    const double needed = static_cast<double>(min_samples) / per_point;
    int g = std::max(2, static_cast<int>(std::ceil(std::pow(needed, 1.0 / dims) - 1e-9)));
    while (std::pow(static_cast<double>(g), dims) * per_point < static_cast<double>(min_samples))
        ++g;
    return {g, g};
}

// ---------------------------------------------------------------------------
// Per-eigenvalue errors
// ---------------------------------------------------------------------------

struct DistanceResult
{
    std::vector<double> nearest;
    std::vector<double> distance;

    double max() const
    {
        return distance.empty() ? 0.0 : *std::max_element(distance.begin(), distance.end());
    }
};

/// For each eigenvalue, the distance to the nearest symbol sample.
inline DistanceResult min_distance_errors(const std::vector<double>& eigs,
                                          const std::vector<double>& sorted_samples)
{
    if (eigs.empty() || sorted_samples.empty())
        throw Error("min_distance_errors: empty input");
    DistanceResult out;
    out.nearest.reserve(eigs.size());
    out.distance.reserve(eigs.size());
    for (double lambda : eigs)
    {
        auto it = std::lower_bound(sorted_samples.begin(), sorted_samples.end(), lambda);
        double best = std::numeric_limits<double>::infinity();
        double nearest = 0.0;
        if (it != sorted_samples.end() && std::abs(*it - lambda) < best)
        {
            best = std::abs(*it - lambda);
            nearest = *it;
        }
        if (it != sorted_samples.begin() && std::abs(*(it - 1) - lambda) <= best)
        {
            best = std::abs(*(it - 1) - lambda);
            nearest = *(it - 1);
        }
        out.nearest.push_back(nearest);
        out.distance.push_back(best);
    }
    return out;
}

/// |lambda_j - Q((j - 1/2)/N)| with Q the weighted quantile function of the
/// rearrangement; unlike min-distance this sees multiplicity mismatches.
inline std::vector<double> quantile_errors(const std::vector<double>& sorted_eigs,
                                           const SampleSet& set)
{
    const auto n = static_cast<double>(sorted_eigs.size());
    std::vector<double> err(sorted_eigs.size());
    for (std::size_t j = 0; j < sorted_eigs.size(); ++j)
        err[j] = std::abs(sorted_eigs[j] - set.quantile((static_cast<double>(j) + 0.5) / n));
    return err;
}

/// Branch multiplicities of the rearrangement read at the N quantile points
/// (j - 1/2)/N that pair with the sorted spectrum.
inline std::vector<std::int64_t> branch_counts(std::size_t n, const SampleSet& set)
{
    std::vector<std::int64_t> counts(static_cast<std::size_t>(set.p), 0);
    for (std::size_t j = 0; j < n; ++j)
    {
        const auto s = set.quantile_index((static_cast<double>(j) + 0.5) / static_cast<double>(n));
        ++counts[static_cast<std::size_t>(set.samples[s].branch)];
    }
    return counts;
}

// ---------------------------------------------------------------------------
// Weak-* functionals
// ---------------------------------------------------------------------------

enum class Mode
{
    eigen,
    singular,
};

struct FunctionalValue
{
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    bool converged = true;   ///< rhs change below the target at the final doubling
    bool flagged = false;    ///< cap hit with change >= 1e-3
    Resolution resolution;
};

struct QuadratureControl
{
    Resolution start{16, 8};
    double target_change = 1e-4;
    double flag_change = 1e-3;
    std::int64_t max_evaluations = std::int64_t{1} << 20;
};

namespace detail {

inline std::int64_t evaluation_count(const MatrixSymbol& f, const DistributionDomain& domain,
                                     Resolution res)
{
    double count = 1.0;
    for (int r = 0; r < f.d; ++r)
        count *= (r < static_cast<int>(f.spectral_even.size()) && f.spectral_even[r]) ? res.fourier
                                                                                     : 2.0 * res.fourier;
    if (f.phys_dim > 0 && domain.region)
        count *= static_cast<double>(domain.region->pieces.size()) * res.physical * res.physical;
    return static_cast<std::int64_t>(count);
}

} // namespace detail

/// rhs values (1/mu(D)) int_D (1/p) sum_k F(lambda_k(f)) for a bank of test
/// functions, doubling the midpoint resolution until every value moves by
/// less than the target or the evaluation cap is reached.
inline std::vector<FunctionalValue> symbol_functionals(const MatrixSymbol& f,
                                                       const DistributionDomain& domain,
                                                       const std::vector<TestFunction>& bank,
                                                       Mode mode = Mode::eigen,
                                                       const QuadratureControl& ctl = {})
{
    if (bank.empty())
        throw Error("weak-* functional needs at least one test function");
    auto evaluate = [&](Resolution res) {
        const auto set = symbol_rearrangement(f, domain, res);
        std::vector<double> out;
        for (const auto& F : bank)
            out.push_back(set.average([&](double v) { return F(mode == Mode::singular ? std::abs(v) : v); }));
        return out;
    };

    Resolution res = ctl.start;
    if (f.phys_dim == 0)
        res.physical = std::max(res.physical, 64);  // only the support fraction depends on it
    auto current = evaluate(res);
    std::vector<double> change(bank.size(), INFINITY);
    while (true)
    {
        Resolution next{res.fourier * 2, f.phys_dim > 0 ? res.physical * 2 : res.physical};
        if (detail::evaluation_count(f, domain, next) > ctl.max_evaluations)
            break;
        auto refined = evaluate(next);
        double worst = 0.0;
        for (std::size_t k = 0; k < bank.size(); ++k)
        {
            change[k] = std::abs(refined[k] - current[k]);
            worst = std::max(worst, change[k]);
        }
        current = std::move(refined);
        res = next;
        if (worst < ctl.target_change)
            break;
    }

    std::vector<FunctionalValue> out;
    for (std::size_t k = 0; k < bank.size(); ++k)
    {
        FunctionalValue v;
        v.id = bank[k].id();
        v.rhs = current[k];
        v.converged = change[k] < ctl.target_change;
        v.flagged = !(change[k] < ctl.flag_change);
        v.resolution = res;
        out.push_back(v);
    }
    return out;
}

/// (1/N) sum_j F(lambda_j), or of singular values in singular mode.
inline double spectral_average(const std::vector<double>& spectrum, const TestFunction& F,
                               Mode mode = Mode::eigen)
{
    double acc = 0.0;
    for (double v : spectrum)
        acc += F(mode == Mode::singular ? std::abs(v) : v);
    return acc / static_cast<double>(spectrum.size());
}

/// lhs/rhs/gap of the distribution identity for a given spectrum.
/// Fill lhs and gap of precomputed symbol integrals for a given spectrum.
inline std::vector<FunctionalValue> attach_spectrum(const std::vector<double>& spectrum,
                                                    const std::vector<TestFunction>& bank,
                                                    std::vector<FunctionalValue> values,
                                                    Mode mode = Mode::eigen)
{
    if (spectrum.empty())
        throw Error("weak_star_gap: empty spectrum");
    if (values.size() != bank.size())
        throw Error("weak_star_gap: symbol integrals do not match the test-function bank");
    for (std::size_t k = 0; k < bank.size(); ++k)
    {
        values[k].lhs = spectral_average(spectrum, bank[k], mode);
        values[k].gap = std::abs(values[k].lhs - values[k].rhs);
    }
    return values;
}

inline std::vector<FunctionalValue> weak_star_gap(const std::vector<double>& spectrum,
                                                  const MatrixSymbol& f,
                                                  const DistributionDomain& domain,
                                                  const std::vector<TestFunction>& bank,
                                                  Mode mode = Mode::eigen,
                                                  const QuadratureControl& ctl = {})
{
    if (spectrum.empty())
        throw Error("weak_star_gap: empty spectrum");
    return attach_spectrum(spectrum, bank, symbol_functionals(f, domain, bank, mode, ctl), mode);
}

inline std::vector<FunctionalValue> weak_star_gap(const HermitianMatrix& a, const MatrixSymbol& f,
                                                  const DistributionDomain& domain,
                                                  const std::vector<TestFunction>& bank,
                                                  Mode mode = Mode::eigen,
                                                  const QuadratureControl& ctl = {})
{
    const auto spectrum = mode == Mode::eigen ? eigs(a) : svals(a);
    return weak_star_gap(spectrum, f, domain, bank, mode, ctl);
}

struct AlphaProbe
{
    double t_max = 0.0;
    double alpha_t_max = 0.0;
    double tail_bound = 0.0;  ///< bound on |alpha(F) - alpha_{t_max}(F)|
};

/// Rigorous tail bound 2 ||F|| mu(Omega \ Omega_t) / mu(Omega_t) on the exhaustion of Omega.
inline double exhaustion_tail_bound(double t, double sup_norm)
{
    const double mt = measure_omega_t(t);
    return 2.0 * sup_norm * (omega_measure - mt) / mt;
}

/// Take the largest-t value of alpha_t(F) and attach the tail bound.
inline AlphaProbe alpha_limit_probe(const std::vector<double>& t_values,
                                    const std::vector<double>& alpha_values, double sup_norm)
{
    if (t_values.size() < 3 || t_values.size() != alpha_values.size())
        throw Error("alpha_limit_probe: need at least 3 (t, alpha_t) pairs");
    for (std::size_t k = 1; k < t_values.size(); ++k)
        if (!(t_values[k] > t_values[k - 1]))
            throw Error("alpha_limit_probe: t grid must be strictly increasing");
    AlphaProbe out;
    out.t_max = t_values.back();
    out.alpha_t_max = alpha_values.back();
    out.tail_bound = exhaustion_tail_bound(out.t_max, sup_norm);
    return out;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct SpectralReport
{
    std::string label;
    std::vector<double> eigenvalues;  ///< ascending (or singular values)
    DistanceResult distances;
    std::vector<double> quantile_error;
    std::vector<FunctionalValue> functionals;
    nlohmann::json metadata;

    /// columns: j, lambda_j, nearest_sample, min_dist
    void write_spectral_csv(std::ostream& os) const
    {
        os << "j,lambda_j,nearest_sample,min_dist\n";
        os.precision(17);
        for (std::size_t j = 0; j < eigenvalues.size(); ++j)
            os << j + 1 << ',' << eigenvalues[j] << ',' << distances.nearest[j] << ','
               << distances.distance[j] << '\n';
    }

    /// columns: F_id, lhs, rhs, gap
    void write_functional_csv(std::ostream& os) const
    {
        os << "F_id,lhs,rhs,gap\n";
        os.precision(17);
        for (const auto& f : functionals)
            os << f.id << ',' << f.lhs << ',' << f.rhs << ',' << f.gap << '\n';
    }
};

/// Sorted spectrum, min-distance and quantile errors against a rearrangement
/// sampled with at least `sample_factor` x N points. `integrals` are the
/// symbol sides of the functional bank (see symbol_functionals), reusable
/// across matrix sizes; pass an empty bank to skip the functionals.
inline SpectralReport spectral_report(std::string label, std::vector<double> spectrum,
                                      const MatrixSymbol& f, const DistributionDomain& domain,
                                      const std::vector<TestFunction>& bank,
                                      const std::vector<FunctionalValue>& integrals,
                                      std::int64_t sample_factor = 10, Mode mode = Mode::eigen)
{
    if (spectrum.empty())
        throw Error("spectral_report: empty spectrum");
    if (mode == Mode::singular)
        for (auto& v : spectrum)
            v = std::abs(v);
    std::sort(spectrum.begin(), spectrum.end());
    SpectralReport r;
    r.label = std::move(label);
    const auto res =
        resolution_for(f, domain, sample_factor * static_cast<std::int64_t>(spectrum.size()));
    auto samples = symbol_rearrangement(f, domain, res);
    if (mode == Mode::singular)
    {
        for (auto& s : samples.samples)
            s.value = std::abs(s.value);
        samples.finalize();
    }
    r.distances = min_distance_errors(spectrum, samples.values());
    r.quantile_error = quantile_errors(spectrum, samples);
    if (!bank.empty())
        r.functionals = attach_spectrum(spectrum, bank, integrals, mode);
    r.metadata = {{"label", r.label},
                  {"N", spectrum.size()},
                  {"symbol", f.name},
                  {"samples", samples.size()},
                  {"fourier_resolution", res.fourier},
                  {"physical_resolution", res.physical},
                  {"max_min_dist", r.distances.max()},
                  {"max_quantile_error",
                   *std::max_element(r.quantile_error.begin(), r.quantile_error.end())}};
    r.eigenvalues = std::move(spectrum);
    return r;
}

inline SpectralReport spectral_report(std::string label, std::vector<double> spectrum,
                                      const MatrixSymbol& f, const DistributionDomain& domain,
                                      const std::vector<TestFunction>& bank,
                                      std::int64_t sample_factor = 10, Mode mode = Mode::eigen,
                                      const QuadratureControl& ctl = {})
{
    const auto integrals = bank.empty() ? std::vector<FunctionalValue>{}
                                        : symbol_functionals(f, domain, bank, mode, ctl);
    return spectral_report(std::move(label), std::move(spectrum), f, domain, bank, integrals,
                           sample_factor, mode);
}

} // namespace symlab
