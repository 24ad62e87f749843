#ifndef PAIRSIM_SPDC_JSA_HPP
#define PAIRSIM_SPDC_JSA_HPP

// Two-photon joint spectral amplitude f(ws, wi) = E_p(ws + wi) * sinc(dk L / 2),
// its exchange decomposition and Schmidt purity.

#include <pairsim/shg_transfer.hpp>
#include <pairsim/spectral_core.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>

namespace pairsim
{
struct NumericalError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

// First-order expansion of the phase mismatch about the phase-matched point:
//   dk L / 2 = (kappa_s (ws - center_s) + kappa_i (wi - center_i)) * L / 2
// With center_s == center_i, kappa_s == kappa_i or kappa_s == -kappa_i gives an
// exchange-symmetric sinc.
struct PhaseMatchingModel
{
    double kappa_s = 1.0;
    double kappa_i = -1.0;
    double length_scale = 2.0;
    double center_s = 0.0;
    double center_i = 0.0;

    void validate() const
    {
        if (!(length_scale > 0.0) || !std::isfinite(length_scale))
            throw std::invalid_argument("PhaseMatchingModel: length_scale must be positive");
        if (!std::isfinite(kappa_s) || !std::isfinite(kappa_i) || !std::isfinite(center_s) ||
            !std::isfinite(center_i))
            throw std::invalid_argument("PhaseMatchingModel: coefficients must be finite");
    }

    double argument(double ws, double wi) const
    {
        return (kappa_s * (ws - center_s) + kappa_i * (wi - center_i)) * 0.5 * length_scale;
    }

    double operator()(double ws, double wi) const
    {
        const double x = argument(ws, wi);
        return x == 0.0 ? 1.0 : std::sin(x) / x;
    }
};

// f on a signal x idler grid; row index = signal. Always L2-normalized:
// sum |f|^2 step_s step_i = 1.
class JointSpectralAmplitude
{
public:
    using Matrix = Eigen::MatrixXcd;

    JointSpectralAmplitude(FrequencyGrid grid_s, FrequencyGrid grid_i, Matrix values)
        : grid_s_(grid_s), grid_i_(grid_i), values_(std::move(values))
    {
        check_shape();
        const double w = weight();
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::invalid_argument("JointSpectralAmplitude: cannot normalize a zero or non-finite JSA");
        values_ /= std::sqrt(w);
    }

    // Test hook: keeps the values as given, so normalization checks downstream can fire.
    static JointSpectralAmplitude unnormalized(FrequencyGrid grid_s, FrequencyGrid grid_i, Matrix values)
    {
        JointSpectralAmplitude j(grid_s, grid_i, Matrix::Ones(grid_s.count(), grid_i.count()));
        j.values_ = std::move(values);
        j.check_shape();
        return j;
    }

    const FrequencyGrid& grid_s() const { return grid_s_; }
    const FrequencyGrid& grid_i() const { return grid_i_; }
    const Matrix& values() const { return values_; }
    double cell_area() const { return grid_s_.step() * grid_i_.step(); }
    bool is_square() const { return grid_s_ == grid_i_; }

    // sum |f|^2 dws dwi
    double weight() const { return values_.squaredNorm() * cell_area(); }

private:
    void check_shape() const
    {
        if (static_cast<std::size_t>(values_.rows()) != grid_s_.count() ||
            static_cast<std::size_t>(values_.cols()) != grid_i_.count())
            throw std::invalid_argument("JointSpectralAmplitude: dimensions do not match grids");
    }

    FrequencyGrid grid_s_;
    FrequencyGrid grid_i_;
    Matrix values_;
};

// Pump sampled at ws + wi (linear, zero outside its grid) times the sinc.
inline JointSpectralAmplitude build_jsa(const AmplitudeSpectrum& pump, const PhaseMatchingModel& pm,
                                        const FrequencyGrid& grid_s, const FrequencyGrid& grid_i)
{
    pm.validate();
    JointSpectralAmplitude::Matrix f(grid_s.count(), grid_i.count());
    bool any = false;
    for (std::size_t r = 0; r < grid_s.count(); ++r) {
        for (std::size_t c = 0; c < grid_i.count(); ++c) {
            const complex e = detail::sample_linear(pump.grid(), pump.values(), grid_s[r] + grid_i[c]);
            f(r, c) = e * pm(grid_s[r], grid_i[c]);
            any = any || f(r, c) != complex{};
        }
    }
    if (!any)
        throw std::invalid_argument("build_jsa: sum-frequency range lies outside the pump support");
    return {grid_s, grid_i, std::move(f)};
}

inline AmplitudeSpectrum phase_pump(const AmplitudeSpectrum& pump, const std::function<double(double)>& phase)
{
    std::vector<complex> v(pump.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = pump[i] * std::polar(1.0, phase(pump.grid()[i]));
    return {pump.grid(), std::move(v)};
}

// Independent uniform phase per pump sample, drawn from the seeded substream.
inline AmplitudeSpectrum random_phase_pump(const AmplitudeSpectrum& pump, std::uint64_t seed)
{
    std::vector<double> phi(pump.size());
    UniformRandomPhase{}(seed, 0, phi);
    std::vector<complex> v(pump.size());
    for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = pump[i] * std::polar(1.0, phi[i]);
    return {pump.grid(), std::move(v)};
}

// The JSA inherits the pump phase as exp(i phi(ws + wi)).
inline JointSpectralAmplitude apply_pump_phase(const AmplitudeSpectrum& pump, const PhaseMatchingModel& pm,
                                               const FrequencyGrid& grid_s, const FrequencyGrid& grid_i,
                                               const std::function<double(double)>& phase)
{
    return build_jsa(phase_pump(pump, phase), pm, grid_s, grid_i);
}

inline JointSpectralAmplitude apply_pump_phase(const AmplitudeSpectrum& pump, const PhaseMatchingModel& pm,
                                               const FrequencyGrid& grid_s, const FrequencyGrid& grid_i,
                                               std::uint64_t seed)
{
    return build_jsa(random_phase_pump(pump, seed), pm, grid_s, grid_i);
}

// Test hook for exchange-asymmetric intrinsic phase phi(ws, wi).
inline JointSpectralAmplitude with_intrinsic_phase(const JointSpectralAmplitude& jsa,
                                                   const std::function<double(double, double)>& phase)
{
    auto f = jsa.values();
    for (Eigen::Index r = 0; r < f.rows(); ++r)
        for (Eigen::Index c = 0; c < f.cols(); ++c)
            f(r, c) *= std::polar(1.0, phase(jsa.grid_s()[r], jsa.grid_i()[c]));
    return {jsa.grid_s(), jsa.grid_i(), std::move(f)};
}

// g(ws) h(wi), normalized.
template <typename G, typename H>
JointSpectralAmplitude separable_jsa(const FrequencyGrid& grid_s, const FrequencyGrid& grid_i, G&& g, H&& h)
{
    JointSpectralAmplitude::Matrix f(grid_s.count(), grid_i.count());
    for (std::size_t r = 0; r < grid_s.count(); ++r)
        for (std::size_t c = 0; c < grid_i.count(); ++c)
            f(r, c) = complex(g(grid_s[r])) * complex(h(grid_i[c]));
    return {grid_s, grid_i, std::move(f)};
}

inline Eigen::MatrixXd jsi(const JointSpectralAmplitude& jsa)
{
    return jsa.values().cwiseAbs2();
}

inline IntensitySpectrum signal_marginal(const JointSpectralAmplitude& jsa)
{
    const Eigen::VectorXd m = jsi(jsa).rowwise().sum() * jsa.grid_i().step();
    return {jsa.grid_s(), std::vector<double>(m.data(), m.data() + m.size())};
}

inline IntensitySpectrum idler_marginal(const JointSpectralAmplitude& jsa)
{
    const Eigen::VectorXd m = jsi(jsa).colwise().sum().transpose() * jsa.grid_s().step();
    return {jsa.grid_i(), std::vector<double>(m.data(), m.data() + m.size())};
}

// ---------------------------------------------------------------------------

struct JsaDecomposition
{
    JointSpectralAmplitude::Matrix symmetric_part;
    JointSpectralAmplitude::Matrix antisymmetric_part;
    double gamma = 0.0;            // weight of the antisymmetric part
    double symmetric_weight = 0.0; // weight of the symmetric part
};

inline JsaDecomposition decompose(const JointSpectralAmplitude& jsa)
{
    if (!jsa.is_square())
        throw std::invalid_argument("decompose: signal and idler grids must be identical");
    const auto& f = jsa.values();
    const JointSpectralAmplitude::Matrix ft = f.transpose();
    JsaDecomposition d;
    d.symmetric_part = 0.5 * (f + ft);
    d.antisymmetric_part = 0.5 * (f - ft);
    d.gamma = d.antisymmetric_part.squaredNorm() * jsa.cell_area();
    d.symmetric_weight = d.symmetric_part.squaredNorm() * jsa.cell_area();
    return d;
}

// sqrt(1 - gamma) f_s/|f_s| + sqrt(gamma) f_a/|f_a|. Both parts must be nonzero
// unless the corresponding weight is 0 or 1.
inline JointSpectralAmplitude mix_exchange_parts(const JointSpectralAmplitude& jsa, double gamma)
{
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw std::invalid_argument("mix_exchange_parts: gamma must lie in [0, 1]");
    const auto d = decompose(jsa);
    JointSpectralAmplitude::Matrix f = JointSpectralAmplitude::Matrix::Zero(d.symmetric_part.rows(),
                                                                            d.symmetric_part.cols());
    if (gamma < 1.0) {
        if (!(d.symmetric_weight > 0.0))
            throw std::invalid_argument("mix_exchange_parts: JSA has no symmetric part");
        f += std::sqrt((1.0 - gamma) / d.symmetric_weight) * d.symmetric_part;
    }
    if (gamma > 0.0) {
        if (!(d.gamma > 0.0))
            throw std::invalid_argument("mix_exchange_parts: JSA has no antisymmetric part");
        f += std::sqrt(gamma / d.gamma) * d.antisymmetric_part;
    }
    return {jsa.grid_s(), jsa.grid_i(), std::move(f)};
}

// Gaussian ground mode mixed with the exchange-antisymmetric combination of
// ground and first Hermite-Gauss modes; the antisymmetric weight is gamma.
// sigma is the rms width of the single-mode intensity.
inline JointSpectralAmplitude hermite_gauss_mixture(const FrequencyGrid& grid, double sigma, double gamma)
{
    if (!(sigma > 0.0))
        throw std::invalid_argument("hermite_gauss_mixture: sigma must be positive");
    auto g = [&](double w) { return std::exp(-w * w / (4.0 * sigma * sigma)); };
    auto h = [&](double w) { return w / sigma * std::exp(-w * w / (4.0 * sigma * sigma)); };
    const std::size_t n = grid.count();
    JointSpectralAmplitude::Matrix f(n, n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c)
            f(r, c) = g(grid[r]) * g(grid[c]) + (g(grid[r]) * h(grid[c]) - h(grid[r]) * g(grid[c]));
    return mix_exchange_parts({grid, grid, std::move(f)}, gamma);
}

// Normalized Schmidt coefficients, descending; they sum to 1.
inline Eigen::VectorXd schmidt_coefficients(const JointSpectralAmplitude& jsa)
{
    const JointSpectralAmplitude::Matrix kernel = jsa.values() * std::sqrt(jsa.cell_area());
    Eigen::BDCSVD<JointSpectralAmplitude::Matrix> svd(kernel);
    if (svd.info() != Eigen::Success)
        throw NumericalError("schmidt_coefficients: singular value decomposition failed");
    Eigen::VectorXd lambda = svd.singularValues().array().square();
    const double total = lambda.sum();
    if (!(total > 0.0) || !std::isfinite(total))
        throw NumericalError("schmidt_coefficients: degenerate kernel");
    return lambda / total;
}

inline double schmidt_purity(const JointSpectralAmplitude& jsa)
{
    return schmidt_coefficients(jsa).squaredNorm();
}

} // namespace pairsim

#endif // PAIRSIM_SPDC_JSA_HPP
