#ifndef PAIRSIM_HOM_INTERFERENCE_HPP
#define PAIRSIM_HOM_INTERFERENCE_HPP

// Hong-Ou-Mandel coincidence probability
//   P(tau) = 1/4 sum |f(w1, w2) - f(w2, w1) exp(-i (w1 - w2) tau)|^2 dw1 dw2,
// visibility, delay-estimation Fisher information and Cramer-Rao bounds.

#include <pairsim/detail/parallel.hpp>
#include <pairsim/spdc_jsa.hpp>

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pairsim
{
struct WindowTooNarrow : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

inline constexpr double normalization_tolerance = 1e-10;
inline constexpr double probability_clamp_tolerance = 1e-10;

inline void require_hom_input(const JointSpectralAmplitude& jsa)
{
    if (!jsa.is_square())
        throw std::invalid_argument("coincidence_probability: signal and idler grids must be identical");
    const double w = jsa.weight();
    if (std::abs(w - 1.0) > normalization_tolerance)
        throw NumericalError("coincidence_probability: normalization violated (weight " +
                             std::to_string(w) + ")");
}

namespace detail
{
inline double coincidence_unchecked(const JointSpectralAmplitude& jsa, double tau)
{
    const auto& f = jsa.values();
    const auto& grid = jsa.grid_s();
    const std::size_t n = grid.count();
    // exp(-i (w1 - w2) tau) = u[w1] conj(u[w2]); offsets from the center keep the
    // phase arguments small.
    std::vector<complex> u(n);
    for (std::size_t k = 0; k < n; ++k)
        u[k] = std::polar(1.0, -(grid[k] - grid.center()) * tau);

    double sum = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        const complex uc = std::conj(u[c]);
        for (std::size_t r = 0; r < n; ++r)
            sum += std::norm(f(r, c) - f(c, r) * (u[r] * uc));
    }
    const double p = 0.25 * sum * jsa.cell_area();
    if (p < -probability_clamp_tolerance || p > 1.0 + probability_clamp_tolerance)
        throw NumericalError("coincidence_probability: P = " + std::to_string(p) +
                             " outside [0, 1]; normalization is broken");
    return std::clamp(p, 0.0, 1.0);
}
} // namespace detail

inline double coincidence_probability(const JointSpectralAmplitude& jsa, double tau)
{
    require_hom_input(jsa);
    return detail::coincidence_unchecked(jsa, tau);
}

struct HomCurve
{
    std::vector<double> delays;
    std::vector<double> probabilities;
    double baseline = 0.5;

    void validate() const
    {
        if (delays.size() != probabilities.size() || delays.size() < 2)
            throw std::invalid_argument("HomCurve: need >= 2 samples with matching lengths");
        for (std::size_t k = 1; k < delays.size(); ++k)
            if (!(delays[k] > delays[k - 1]))
                throw std::invalid_argument("HomCurve: delays must be strictly increasing");
        for (double p : probabilities)
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("HomCurve: probabilities must lie in [0, 1]");
    }
};

inline std::vector<double> uniform_delays(double tau_min, double tau_max, std::size_t n_points)
{
    if (n_points < 2 || !(tau_max > tau_min))
        throw std::invalid_argument("delay schedule: need n_points >= 2 and tau_max > tau_min");
    std::vector<double> t(n_points);
    const double dt = (tau_max - tau_min) / static_cast<double>(n_points - 1);
    for (std::size_t k = 0; k < n_points; ++k)
        t[k] = tau_min + static_cast<double>(k) * dt;
    return t;
}

inline HomCurve hom_curve(const JointSpectralAmplitude& jsa, double tau_min, double tau_max, std::size_t n_points)
{
    require_hom_input(jsa);
    HomCurve curve;
    curve.delays = uniform_delays(tau_min, tau_max, n_points);
    curve.probabilities.resize(n_points);
    detail::parallel_for(n_points, [&](std::size_t k) {
        curve.probabilities[k] = detail::coincidence_unchecked(jsa, curve.delays[k]);
    });
    return curve;
}

// V = 1 - min P / baseline = 1 - 2 min P. The dip must not sit at a window edge.
inline double visibility(const HomCurve& curve)
{
    curve.validate();
    const auto& p = curve.probabilities;
    if (p.size() < 3)
        throw std::invalid_argument("visibility: need >= 3 samples");
    const double interior = *std::min_element(p.begin() + 1, p.end() - 1);
    if (std::min(p.front(), p.back()) < interior)
        throw WindowTooNarrow("visibility: dip minimum at the delay window edge; widen the delay window");
    return std::clamp(1.0 - interior / curve.baseline, 0.0, 1.0);
}

// Full width of the dip at half depth, with linear interpolation of the crossings.
inline double dip_fwhm(const HomCurve& curve)
{
    curve.validate();
    const auto& p = curve.probabilities;
    const auto& t = curve.delays;
    const auto imin = static_cast<std::size_t>(std::min_element(p.begin(), p.end()) - p.begin());
    const double half = 0.5 * (p[imin] + curve.baseline);
    auto crossing = [&](std::size_t inside, std::size_t outside) {
        return t[inside] + (half - p[inside]) * (t[outside] - t[inside]) / (p[outside] - p[inside]);
    };
    std::optional<double> left, right;
    for (std::size_t k = imin; k + 1 < p.size(); ++k)
        if (p[k + 1] >= half) {
            right = crossing(k, k + 1);
            break;
        }
    for (std::size_t k = imin; k > 0; --k)
        if (p[k - 1] >= half) {
            left = crossing(k, k - 1);
            break;
        }
    if (!left || !right)
        throw WindowTooNarrow("dip_fwhm: half-depth crossing outside the delay window");
    return *right - *left;
}

struct FisherCurve
{
    std::vector<double> delays;
    std::vector<double> information;
    std::vector<double> crb_single; // 1 / I; +infinity where I == 0
    bool degenerate = false;        // P constant at 0 or 1; information set to 0
};

inline constexpr double fisher_edge_delta = 1e-12;

// I = (dP/dtau)^2 / (P (1 - P)) with central differences (one-sided at the ends).
// Where P is within delta of 0 or 1 the 0/0 limit is taken from a local
// quadratic: P ~ a (tau - tau0)^2 gives I -> 4a.
inline FisherCurve fisher_information(const HomCurve& curve)
{
    curve.validate();
    const auto& p = curve.probabilities;
    const auto& t = curve.delays;
    const std::size_t n = p.size();
    if (n < 3)
        throw std::invalid_argument("fisher_information: need >= 3 samples");
    const double dt = (t.back() - t.front()) / static_cast<double>(n - 1);
    for (std::size_t k = 1; k < n; ++k)
        if (std::abs((t[k] - t[k - 1]) - dt) > 1e-9 * std::abs(dt))
            throw std::invalid_argument("fisher_information: delays must be uniformly spaced");

    FisherCurve out;
    out.delays = t;
    out.information.assign(n, 0.0);
    out.crb_single.assign(n, std::numeric_limits<double>::infinity());

    const bool constant = std::all_of(p.begin(), p.end(), [&](double v) { return v == p.front(); });
    if (constant && (p.front() == 0.0 || p.front() == 1.0)) {
        out.degenerate = true;
        return out;
    }

    for (std::size_t k = 0; k < n; ++k) {
        double info = 0.0;
        if (p[k] < fisher_edge_delta || p[k] > 1.0 - fisher_edge_delta) {
            const std::size_t c = std::clamp<std::size_t>(k, 1, n - 2);
            const double curvature = (p[c + 1] - 2.0 * p[c] + p[c - 1]) / (dt * dt);
            info = std::max(0.0, p[k] < 0.5 ? 2.0 * curvature : -2.0 * curvature);
        } else {
            double dp;
            if (k == 0)
                dp = (p[1] - p[0]) / dt;
            else if (k == n - 1)
                dp = (p[n - 1] - p[n - 2]) / dt;
            else
                dp = (p[k + 1] - p[k - 1]) / (2.0 * dt);
            info = dp * dp / (p[k] * (1.0 - p[k]));
        }
        out.information[k] = info;
        if (info > 0.0)
            out.crb_single[k] = 1.0 / info;
    }
    return out;
}

// Per-delay variance bound 1 / (N I); +infinity where I == 0.
inline std::vector<double> cramer_rao_bound(const FisherCurve& fisher, std::uint64_t n_events)
{
    if (n_events < 1)
        throw std::invalid_argument("cramer_rao_bound: n_events must be >= 1");
    std::vector<double> out(fisher.information.size(), std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < out.size(); ++k)
        if (fisher.information[k] > 0.0)
            out[k] = 1.0 / (static_cast<double>(n_events) * fisher.information[k]);
    return out;
}

// rms width of the signal marginal; the natural delay unit is its inverse.
inline double marginal_bandwidth(const JointSpectralAmplitude& jsa)
{
    return rms_width(signal_marginal(jsa));
}

} // namespace pairsim

#endif // PAIRSIM_HOM_INTERFERENCE_HPP
