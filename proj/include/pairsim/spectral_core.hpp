#ifndef PAIRSIM_SPECTRAL_CORE_HPP
#define PAIRSIM_SPECTRAL_CORE_HPP

// Frequency grids, pump lineshapes, perturbation models, normalization,
// centroid and the total-variation asymmetry metric.
//
// Units are dimensionless by default: frequencies in units of the pump
// width, centered at zero. Nothing here depends on that choice.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace pairsim
{
using complex = std::complex<double>;

// Uniform 1-D frequency axis with an exact center sample.
class FrequencyGrid
{
public:
    FrequencyGrid(double center, double span, std::size_t count)
        : center_(center), span_(span), count_(count)
    {
        if (count < 3 || count % 2 == 0)
            throw std::invalid_argument("FrequencyGrid: count must be odd and >= 3, got " +
                                        std::to_string(count));
        if (!(span > 0.0) || !std::isfinite(span))
            throw std::invalid_argument("FrequencyGrid: span must be positive and finite");
        if (!std::isfinite(center))
            throw std::invalid_argument("FrequencyGrid: center must be finite");
        step_ = span / static_cast<double>(count - 1);
    }

    double center() const { return center_; }
    double span() const { return span_; }
    double step() const { return step_; }
    std::size_t count() const { return count_; }
    std::size_t mid() const { return (count_ - 1) / 2; }
    double front() const { return (*this)[0]; }
    double back() const { return (*this)[count_ - 1]; }

    double operator[](std::size_t i) const
    {
        return center_ + (static_cast<double>(i) - static_cast<double>(mid())) * step_;
    }

    std::vector<double> samples() const
    {
        std::vector<double> out(count_);
        for (std::size_t i = 0; i < count_; ++i)
            out[i] = (*this)[i];
        return out;
    }

    // Position of omega in units of samples from the first node.
    double fractional_index(double omega) const { return (omega - front()) / step_; }

    // Grid on which the linear self-convolution of this grid lands exactly:
    // center 2c, span 2w, same step, 2N-1 samples.
    FrequencyGrid doubled() const { return {2.0 * center_, 2.0 * span_, 2 * count_ - 1}; }

    // Same sample count and relative layout, stretched by factor about the center.
    FrequencyGrid scaled(double factor) const { return {center_ * factor, span_ * factor, count_}; }

    friend bool operator==(const FrequencyGrid& a, const FrequencyGrid& b)
    {
        return a.center_ == b.center_ && a.span_ == b.span_ && a.count_ == b.count_;
    }

private:
    double center_;
    double span_;
    std::size_t count_;
    double step_;
};

inline FrequencyGrid make_grid(double center, double span, std::size_t count)
{
    return {center, span, count};
}

namespace detail
{
inline double trapezoid(std::span<const double> values, double step)
{
    if (values.empty())
        return 0.0;
    double sum = 0.5 * (values.front() + values.back());
    for (std::size_t i = 1; i + 1 < values.size(); ++i)
        sum += values[i];
    return sum * step;
}

// Linear interpolation on a uniform grid, zero outside [front, back].
template <typename T>
T sample_linear(const FrequencyGrid& grid, std::span<const T> values, double omega)
{
    const double x = grid.fractional_index(omega);
    const double last = static_cast<double>(grid.count() - 1);
    if (!(x >= 0.0) || x > last)
        return T{};
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 1e-9)
        return values[static_cast<std::size_t>(nearest)];
    const auto lo = static_cast<std::size_t>(std::floor(x));
    const double t = x - static_cast<double>(lo);
    return values[lo] * (1.0 - t) + values[lo + 1] * t;
}
} // namespace detail

// Complex field amplitude A(omega) sampled on a grid.
class AmplitudeSpectrum
{
public:
    AmplitudeSpectrum(FrequencyGrid grid, std::vector<complex> values)
        : grid_(grid), values_(std::move(values))
    {
        if (values_.size() != grid_.count())
            throw std::invalid_argument("AmplitudeSpectrum: value count does not match grid");
        for (const auto& v : values_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
                throw std::invalid_argument("AmplitudeSpectrum: non-finite amplitude");
    }

    AmplitudeSpectrum(FrequencyGrid grid, const std::vector<double>& real_values)
        : AmplitudeSpectrum(grid, std::vector<complex>(real_values.begin(), real_values.end()))
    {
    }

    const FrequencyGrid& grid() const { return grid_; }
    std::span<const complex> values() const { return values_; }
    complex operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double max_abs() const
    {
        double m = 0.0;
        for (const auto& v : values_)
            m = std::max(m, std::abs(v));
        return m;
    }

private:
    FrequencyGrid grid_;
    std::vector<complex> values_;
};

// Real nonnegative spectral intensity on a grid.
class IntensitySpectrum
{
public:
    IntensitySpectrum(FrequencyGrid grid, std::vector<double> values)
        : grid_(grid), values_(std::move(values))
    {
        if (values_.size() != grid_.count())
            throw std::invalid_argument("IntensitySpectrum: value count does not match grid");
        for (double v : values_)
            if (!std::isfinite(v) || v < 0.0)
                throw std::invalid_argument("IntensitySpectrum: values must be finite and >= 0");
    }

    const FrequencyGrid& grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }
    std::size_t size() const { return values_.size(); }

    double integral() const { return detail::trapezoid(values_, grid_.step()); }

private:
    FrequencyGrid grid_;
    std::vector<double> values_;
};

inline IntensitySpectrum intensity_of(const AmplitudeSpectrum& a)
{
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        out[i] = std::norm(a[i]);
    return {a.grid(), std::move(out)};
}

// ---------------------------------------------------------------------------
// Lineshapes. All amplitudes are real and peak-normalized.

inline double gaussian_value(double omega, double omega0, double sigma)
{
    const double x = (omega - omega0) / sigma;
    return std::exp(-0.5 * x * x);
}

inline double lorentzian_value(double omega, double omega0, double gamma)
{
    const double x = (omega - omega0) / gamma;
    return 1.0 / (1.0 + x * x);
}

// Gaussian (std sigma_g) convolved with Lorentzian (half-width gamma_l),
// evaluated pointwise by quadrature and scaled to peak 1 at omega0.
class VoigtShape
{
public:
    VoigtShape(double omega0, double sigma_g, double gamma_l, std::size_t nodes = 4001)
        : omega0_(omega0), sigma_(sigma_g), gamma_(gamma_l), nodes_(nodes)
    {
        if (!(sigma_g > 0.0) || !(gamma_l > 0.0))
            throw std::invalid_argument("voigt: widths must be positive");
        peak_ = raw(0.0);
    }

    double operator()(double omega) const { return raw(omega - omega0_) / peak_; }

private:
    // Unnormalized convolution at offset x. Integrates over the natural variable
    // of the narrower kernel so the quadrature resolves it.
    double raw(double x) const
    {
        const std::size_t n = nodes_;
        double sum = 0.0;
        if (gamma_ >= 0.05 * sigma_) {
            // Gaussian measure, t in [-12 sigma, 12 sigma]; Lorentzian is smooth on this step.
            const double h = 24.0 * sigma_ / static_cast<double>(n - 1);
            for (std::size_t j = 0; j < n; ++j) {
                const double t = -12.0 * sigma_ + static_cast<double>(j) * h;
                const double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
                const double u = t / sigma_;
                const double d = (x - t) / gamma_;
                sum += w * std::exp(-0.5 * u * u) / (1.0 + d * d);
            }
            return sum * h;
        }
        // Lorentzian measure: t = gamma tan(theta), L(t) dt = gamma dtheta.
        const double h = std::numbers::pi / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double theta = -0.5 * std::numbers::pi + (static_cast<double>(j) + 0.5) * h;
            const double u = (x - gamma_ * std::tan(theta)) / sigma_;
            sum += std::exp(-0.5 * u * u);
        }
        return sum * h;
    }

    double omega0_;
    double sigma_;
    double gamma_;
    std::size_t nodes_;
    double peak_ = 1.0;
};

template <typename Fn>
AmplitudeSpectrum sample_profile(const FrequencyGrid& grid, Fn&& fn)
{
    std::vector<complex> values(grid.count());
    for (std::size_t i = 0; i < grid.count(); ++i)
        values[i] = fn(grid[i]);
    return {grid, std::move(values)};
}

inline AmplitudeSpectrum gaussian_profile(const FrequencyGrid& grid, double omega0, double sigma)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument("gaussian_profile: sigma must be positive");
    return sample_profile(grid, [&](double w) { return gaussian_value(w, omega0, sigma); });
}

inline AmplitudeSpectrum lorentzian_profile(const FrequencyGrid& grid, double omega0, double gamma)
{
    if (!(gamma > 0.0))
        throw std::invalid_argument("lorentzian_profile: gamma must be positive");
    return sample_profile(grid, [&](double w) { return lorentzian_value(w, omega0, gamma); });
}

inline AmplitudeSpectrum voigt_profile(const FrequencyGrid& grid, double omega0, double sigma_g,
                                       double gamma_l)
{
    const VoigtShape shape(omega0, sigma_g, gamma_l);
    return sample_profile(grid, shape);
}

// ---------------------------------------------------------------------------
// Perturbations

enum class PerturbationKind
{
    LinearTilt,
    OffsetGaussian
};

struct PerturbationSpec
{
    PerturbationKind kind = PerturbationKind::LinearTilt;
    double epsilon = 0.0;
    double offset_b = 0.0; // satellite offset in units of sigma, OffsetGaussian only

    void validate() const
    {
        if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
            throw std::invalid_argument("perturbation: epsilon must be finite and >= 0");
        if (!std::isfinite(offset_b))
            throw std::invalid_argument("perturbation: offset_b must be finite");
    }
};

inline const char* to_string(PerturbationKind k)
{
    return k == PerturbationKind::LinearTilt ? "tilt" : "offset";
}

// LinearTilt:     A(w) (1 + eps (w - w0)/sigma)
// OffsetGaussian: A(w) + eps max|A| exp(-(w - w0 - b sigma)^2 / 2 sigma^2)
// Negative amplitudes are kept; they carry a pi phase.
inline AmplitudeSpectrum apply_perturbation(const AmplitudeSpectrum& spec, const PerturbationSpec& p,
                                            double omega0, double sigma)
{
    p.validate();
    if (!(sigma > 0.0))
        throw std::invalid_argument("apply_perturbation: sigma must be positive");
    if (p.epsilon == 0.0)
        return spec;

    const auto& grid = spec.grid();
    std::vector<complex> out(spec.values().begin(), spec.values().end());
    if (p.kind == PerturbationKind::LinearTilt) {
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] *= 1.0 + p.epsilon * (grid[i] - omega0) / sigma;
    } else {
        const double scale = p.epsilon * spec.max_abs();
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] += scale * gaussian_value(grid[i], omega0 + p.offset_b * sigma, sigma);
    }
    return {grid, std::move(out)};
}

// ---------------------------------------------------------------------------
// Normalization, centroid, asymmetry

inline IntensitySpectrum area_normalize(const IntensitySpectrum& s)
{
    const double area = s.integral();
    if (!(area > 0.0))
        throw std::invalid_argument("area_normalize: spectrum has zero integral");
    std::vector<double> out(s.values().begin(), s.values().end());
    for (double& v : out)
        v /= area;
    return {s.grid(), std::move(out)};
}

inline double centroid(const IntensitySpectrum& s)
{
    const auto n = area_normalize(s);
    const auto& grid = n.grid();
    std::vector<double> weighted(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
        weighted[i] = grid[i] * n[i];
    return detail::trapezoid(weighted, grid.step());
}

// T = 1/2 * integral |S(w) - S(2 mu - w)| dw with S area-normalized. The mirror
// is resampled linearly with zero fill outside the grid.
inline double tvd_asymmetry(const IntensitySpectrum& s)
{
    const auto n = area_normalize(s);
    const auto& grid = n.grid();
    const double mu = centroid(n);
    std::vector<double> diff(n.size());
    for (std::size_t i = 0; i < n.size(); ++i) {
        const double mirrored = detail::sample_linear(grid, n.values(), 2.0 * mu - grid[i]);
        diff[i] = std::abs(n[i] - mirrored);
    }
    return std::clamp(0.5 * detail::trapezoid(diff, grid.step()), 0.0, 1.0);
}

// rms width about the centroid
inline double rms_width(const IntensitySpectrum& s)
{
    const auto n = area_normalize(s);
    const double mu = centroid(n);
    const auto& grid = n.grid();
    std::vector<double> m2(n.size());
    for (std::size_t i = 0; i < n.size(); ++i)
        m2[i] = (grid[i] - mu) * (grid[i] - mu) * n[i];
    return std::sqrt(detail::trapezoid(m2, grid.step()));
}

// ---------------------------------------------------------------------------
// Sensitivity coefficients C1 = int A / int A^2, C2 = int A^3 / int A^4

struct LineshapeCoefficients
{
    double c1 = 0.0;
    double c2 = 0.0;
    double ratio() const { return c2 / c1; }
};

namespace detail
{
inline LineshapeCoefficients coefficients_from_moments(double m1, double m2, double m3, double m4)
{
    for (double m : {m1, m2, m3, m4})
        if (!(m > 0.0) || !std::isfinite(m))
            throw std::invalid_argument("lineshape_coefficients: integrals must be finite and positive");
    return {m1 / m2, m3 / m4};
}
} // namespace detail

inline LineshapeCoefficients lineshape_coefficients(const AmplitudeSpectrum& a)
{
    std::vector<double> p1(a.size()), p2(a.size()), p3(a.size()), p4(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double v = a[i].real();
        if (a[i].imag() != 0.0 || v < 0.0)
            throw std::invalid_argument(
                "lineshape_coefficients: amplitude must be real and nonnegative");
        p1[i] = v;
        p2[i] = v * v;
        p3[i] = p2[i] * v;
        p4[i] = p2[i] * p2[i];
    }
    const double h = a.grid().step();
    return detail::coefficients_from_moments(detail::trapezoid(p1, h), detail::trapezoid(p2, h),
                                             detail::trapezoid(p3, h), detail::trapezoid(p4, h));
}

// Coefficients over the whole real line for an analytic profile, using the
// substitution w = center + scale * tan(theta) and a midpoint rule in theta.
// Heavy-tailed shapes (Lorentzian, Voigt) need this; a finite grid truncates them.
template <typename Profile>
LineshapeCoefficients full_line_coefficients(Profile&& profile, double center, double scale,
                                             std::size_t nodes = 8192)
{
    if (!(scale > 0.0) || nodes < 2)
        throw std::invalid_argument("full_line_coefficients: invalid quadrature setup");
    const double h = std::numbers::pi / static_cast<double>(nodes);
    double m[4] = {0.0, 0.0, 0.0, 0.0};
    for (std::size_t j = 0; j < nodes; ++j) {
        const double theta = -0.5 * std::numbers::pi + (static_cast<double>(j) + 0.5) * h;
        const double c = std::cos(theta);
        const double jac = scale / (c * c);
        const double v = profile(center + scale * std::tan(theta));
        if (v < 0.0)
            throw std::invalid_argument("full_line_coefficients: negative amplitude");
        double p = v;
        for (double& mk : m) {
            mk += p * jac;
            p *= v;
        }
    }
    return detail::coefficients_from_moments(m[0] * h, m[1] * h, m[2] * h, m[3] * h);
}

} // namespace pairsim

#endif // PAIRSIM_SPECTRAL_CORE_HPP
