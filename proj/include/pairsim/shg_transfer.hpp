#ifndef PAIRSIM_SHG_TRANSFER_HPP
#define PAIRSIM_SHG_TRANSFER_HPP

// Second-harmonic spectral transfer.
//
// Coherent pumping convolves field amplitudes, E(W) = int A(w) A(W - w) dw.
// Temporally incoherent pumping (uncorrelated spectral phases) reduces to the
// self-convolution of |A|^2; the output amplitude is its square root with
// zero phase, since an ensemble-averaged field carries no defined phase.

#include <pairsim/spectral_core.hpp>

#include <cstdint>
#include <random>
#include <vector>

namespace pairsim
{
enum class ShgRegime
{
    Coherent,
    Incoherent
};

struct ShgResult
{
    AmplitudeSpectrum amplitude; // on input.grid().doubled()
    IntensitySpectrum intensity;
    ShgRegime regime;
};

namespace detail
{
// Linear self-convolution scaled by the step; out has 2N-1 samples.
template <typename T>
std::vector<T> self_convolve(std::span<const T> a, double step)
{
    const std::size_t n = a.size();
    std::vector<T> out(2 * n - 1, T{});
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::size_t lo = k >= n ? k - (n - 1) : 0;
        const std::size_t hi = k - lo; // lo + hi == k, hi <= n - 1
        T acc{};
        std::size_t i = lo, j = hi;
        for (; i < j; ++i, --j)
            acc += a[i] * a[j];
        acc *= 2.0;
        if (i == j)
            acc += a[i] * a[i];
        out[k] = acc * step;
    }
    return out;
}
} // namespace detail

inline ShgResult coherent_shg(const AmplitudeSpectrum& a)
{
    auto field = detail::self_convolve(a.values(), a.grid().step());
    const auto grid = a.grid().doubled();
    std::vector<double> power(field.size());
    for (std::size_t k = 0; k < field.size(); ++k)
        power[k] = std::norm(field[k]);
    return {AmplitudeSpectrum(grid, std::move(field)), IntensitySpectrum(grid, std::move(power)),
            ShgRegime::Coherent};
}

inline ShgResult incoherent_shg(const AmplitudeSpectrum& a)
{
    std::vector<double> p(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        p[i] = std::norm(a[i]);
    auto power = detail::self_convolve<double>(p, a.grid().step());
    std::vector<complex> field(power.size());
    for (std::size_t k = 0; k < power.size(); ++k)
        field[k] = std::sqrt(power[k]);
    const auto grid = a.grid().doubled();
    return {AmplitudeSpectrum(grid, std::move(field)), IntensitySpectrum(grid, std::move(power)),
            ShgRegime::Incoherent};
}

// ---------------------------------------------------------------------------
// Monte-Carlo random-phase oracle

// Independent uniform phase on [0, 2pi) per grid sample. Each realization
// draws from its own substream keyed by (seed, realization), so results do
// not depend on evaluation order.
struct UniformRandomPhase
{
    void operator()(std::uint64_t seed, std::uint64_t realization, std::span<double> phases) const
    {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(realization),
                          static_cast<std::uint32_t>(realization >> 32)};
        std::mt19937_64 engine(seq);
        constexpr double two_pi = 2.0 * std::numbers::pi;
        for (double& phi : phases)
            phi = static_cast<double>(engine() >> 11) * 0x1.0p-53 * two_pi;
    }
};

// Test hook: no randomization.
struct ZeroPhase
{
    void operator()(std::uint64_t, std::uint64_t, std::span<double> phases) const
    {
        std::fill(phases.begin(), phases.end(), 0.0);
    }
};

// Ensemble averages of |coherent_shg(A e^{i phi_m})|^2 after each checkpoint
// number of realizations (checkpoints strictly increasing, all >= 1). Nested
// prefixes of one seeded sequence.
template <typename PhaseSource = UniformRandomPhase>
std::vector<IntensitySpectrum> monte_carlo_checkpoints(const AmplitudeSpectrum& a,
                                                       const std::vector<std::size_t>& checkpoints,
                                                       std::uint64_t seed, PhaseSource source = {})
{
    if (checkpoints.empty() || checkpoints.front() < 1)
        throw std::invalid_argument("monte_carlo: realizations must be >= 1");
    for (std::size_t c = 1; c < checkpoints.size(); ++c)
        if (checkpoints[c] <= checkpoints[c - 1])
            throw std::invalid_argument("monte_carlo: checkpoints must be strictly increasing");

    const auto grid = a.grid().doubled();
    const double step = a.grid().step();
    std::vector<double> phases(a.size());
    std::vector<complex> phased(a.size());
    std::vector<double> accum(grid.count(), 0.0);
    std::vector<IntensitySpectrum> out;
    out.reserve(checkpoints.size());

    std::size_t next = 0;
    for (std::size_t m = 1; m <= checkpoints.back(); ++m) {
        source(seed, m - 1, phases);
        for (std::size_t i = 0; i < a.size(); ++i)
            phased[i] = a[i] * std::polar(1.0, phases[i]);
        const auto field = detail::self_convolve<complex>(phased, step);
        for (std::size_t k = 0; k < field.size(); ++k)
            accum[k] += std::norm(field[k]);
        if (m == checkpoints[next]) {
            std::vector<double> mean(accum);
            for (double& v : mean)
                v /= static_cast<double>(m);
            out.emplace_back(grid, std::move(mean));
            ++next;
        }
    }
    return out;
}

template <typename PhaseSource = UniformRandomPhase>
IntensitySpectrum monte_carlo_incoherent_shg(const AmplitudeSpectrum& a, std::size_t realizations,
                                             std::uint64_t seed, PhaseSource source = {})
{
    if (realizations < 1)
        throw std::invalid_argument("monte_carlo_incoherent_shg: realizations must be >= 1");
    return monte_carlo_checkpoints(a, {realizations}, seed, source).front();
}

// Relative L2 distance between area-normalized spectra on a common grid.
// The random-phase ensemble carries about twice the power of the intensity
// convolution (pairs w, W-w share a phase sum), so shapes are compared.
inline double relative_l2_shape_distance(const IntensitySpectrum& estimate,
                                         const IntensitySpectrum& reference)
{
    if (!(estimate.grid() == reference.grid()))
        throw std::invalid_argument("relative_l2_shape_distance: grids differ");
    const auto e = area_normalize(estimate);
    const auto r = area_normalize(reference);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < e.size(); ++i) {
        num += (e[i] - r[i]) * (e[i] - r[i]);
        den += r[i] * r[i];
    }
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------

// sinc^2((W - center) / bandwidth), peak 1.
inline IntensitySpectrum phase_matching_envelope(const FrequencyGrid& grid, double center,
                                                 double bandwidth)
{
    if (!(bandwidth > 0.0))
        throw std::invalid_argument("phase_matching_envelope: bandwidth must be positive");
    std::vector<double> v(grid.count());
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double x = (grid[k] - center) / bandwidth;
        const double s = x == 0.0 ? 1.0 : std::sin(x) / x;
        v[k] = s * s;
    }
    return {grid, std::move(v)};
}

inline ShgResult apply_envelope(const ShgResult& r, const IntensitySpectrum& envelope)
{
    if (!(r.amplitude.grid() == envelope.grid()))
        throw std::invalid_argument("apply_envelope: grid mismatch");
    std::vector<complex> field(r.amplitude.values().begin(), r.amplitude.values().end());
    std::vector<double> power(r.intensity.values().begin(), r.intensity.values().end());
    for (std::size_t k = 0; k < field.size(); ++k) {
        field[k] *= std::sqrt(envelope[k]);
        power[k] *= envelope[k];
    }
    const auto& g = envelope.grid();
    return {AmplitudeSpectrum(g, std::move(field)), IntensitySpectrum(g, std::move(power)), r.regime};
}

struct SensitivityRatios
{
    double coherent = 0.0;
    double incoherent = 0.0;
};

// First-order ratio of perturbation to symmetric term at W = 2 w0:
// R_coh = 2 eps h0 C1, R_inc = 2 eps h0 C2.
inline SensitivityRatios sensitivity_ratios(const AmplitudeSpectrum& a0, double epsilon, double h0 = 1.0)
{
    const auto c = lineshape_coefficients(a0);
    return {2.0 * epsilon * h0 * c.c1, 2.0 * epsilon * h0 * c.c2};
}

// ---------------------------------------------------------------------------
// Asymmetry sweeps

enum class LineshapeKind
{
    Gaussian,
    Lorentzian,
    Voigt
};

inline const char* to_string(LineshapeKind k)
{
    switch (k) {
    case LineshapeKind::Gaussian: return "gaussian";
    case LineshapeKind::Lorentzian: return "lorentzian";
    case LineshapeKind::Voigt: return "voigt";
    }
    return "?";
}

struct LineshapeSpec
{
    LineshapeKind kind = LineshapeKind::Gaussian;
    double omega0 = 0.0;
    double width = 1.0;   // Gaussian sigma, or Lorentzian half-width
    double gamma_l = 1.0; // Voigt Lorentzian half-width; width is then the Gaussian sigma
    FrequencyGrid grid{0.0, 16.0, 1025};

    AmplitudeSpectrum build() const
    {
        switch (kind) {
        case LineshapeKind::Gaussian: return gaussian_profile(grid, omega0, width);
        case LineshapeKind::Lorentzian: return lorentzian_profile(grid, omega0, width);
        case LineshapeKind::Voigt: return voigt_profile(grid, omega0, width, gamma_l);
        }
        throw std::logic_error("unknown lineshape");
    }
};

struct SweepRecord
{
    double epsilon = 0.0;
    double offset_b = 0.0;
    double tvd_pump = 0.0;
    double tvd_coherent = 0.0;
    double tvd_incoherent = 0.0;
};

struct SweepPoint
{
    AmplitudeSpectrum pump;
    ShgResult coherent;
    ShgResult incoherent;
};

inline SweepPoint sweep_point(const LineshapeSpec& base, const PerturbationSpec& p)
{
    auto pump = apply_perturbation(base.build(), p, base.omega0, base.width);
    auto coh = coherent_shg(pump);
    auto inc = incoherent_shg(pump);
    return {std::move(pump), std::move(coh), std::move(inc)};
}

// One record per epsilon (LinearTilt) or per (epsilon, b) pair (OffsetGaussian),
// epsilon-major.
inline std::vector<SweepRecord> asymmetry_sweep(const LineshapeSpec& base, PerturbationKind kind,
                                                const std::vector<double>& epsilons,
                                                const std::vector<double>& offsets = {})
{
    if (epsilons.empty())
        throw std::invalid_argument("asymmetry_sweep: epsilon list is empty");
    std::vector<double> bs = offsets;
    if (kind == PerturbationKind::LinearTilt || bs.empty())
        bs = {0.0};

    const auto base_pump = base.build();
    std::vector<SweepRecord> out;
    out.reserve(epsilons.size() * bs.size());
    for (double eps : epsilons) {
        for (double b : bs) {
            const PerturbationSpec p{kind, eps, b};
            const auto pump = apply_perturbation(base_pump, p, base.omega0, base.width);
            out.push_back({eps, b, tvd_asymmetry(intensity_of(pump)),
                           tvd_asymmetry(coherent_shg(pump).intensity),
                           tvd_asymmetry(incoherent_shg(pump).intensity)});
        }
    }
    return out;
}

} // namespace pairsim

#endif // PAIRSIM_SHG_TRANSFER_HPP
