#include <pairsim/spectral_core.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace pairsim;

namespace
{
IntensitySpectrum gaussian_intensity(const FrequencyGrid& g, double w0, double sigma)
{
    return intensity_of(gaussian_profile(g, w0, sigma));
}

// Sum of a few random Gaussians; always strictly positive somewhere.
IntensitySpectrum random_spectrum(std::mt19937_64& rng, const FrequencyGrid& g)
{
    std::uniform_real_distribution<double> center(-3.0, 3.0), width(0.3, 1.5), weight(0.1, 1.0);
    std::vector<double> v(g.count(), 0.0);
    const int peaks = 1 + static_cast<int>(rng() % 3);
    for (int p = 0; p < peaks; ++p) {
        const double c = center(rng), s = width(rng), a = weight(rng);
        for (std::size_t i = 0; i < g.count(); ++i)
            v[i] += a * gaussian_value(g[i], c, s);
    }
    return {g, v};
}

IntensitySpectrum reversed(const IntensitySpectrum& s)
{
    std::vector<double> v(s.values().rbegin(), s.values().rend());
    return {s.grid(), v};
}
} // namespace

TEST(FrequencyGrid, MakeGridExamples)
{
    const auto g = make_grid(0.0, 10.0, 5);
    const std::vector<double> expected{-5.0, -2.5, 0.0, 2.5, 5.0};
    EXPECT_EQ(g.samples(), expected);

    const auto h = make_grid(2.4, 4.0, 3);
    EXPECT_NEAR(h[0], 0.4, 1e-15);
    EXPECT_EQ(h[1], 2.4);
    EXPECT_NEAR(h[2], 4.4, 1e-15);
}

TEST(FrequencyGrid, RejectsBadArguments)
{
    EXPECT_THROW(make_grid(0.0, 10.0, 4), std::invalid_argument);
    EXPECT_THROW(make_grid(0.0, 10.0, 1), std::invalid_argument);
    EXPECT_THROW(make_grid(0.0, 0.0, 5), std::invalid_argument);
    EXPECT_THROW(make_grid(0.0, -1.0, 5), std::invalid_argument);
}

TEST(FrequencyGrid, CenterSampleIsExactAndSamplesIncrease)
{
    const auto g = make_grid(0.123456789, 7.77, 1025);
    EXPECT_EQ(g[g.mid()], 0.123456789);
    for (std::size_t i = 1; i < g.count(); ++i)
        EXPECT_GT(g[i], g[i - 1]);
    const auto d = g.doubled();
    EXPECT_EQ(d.count(), 2049u);
    EXPECT_EQ(d.step(), g.step());
    EXPECT_EQ(d.center(), 2.0 * g.center());
}

TEST(Lineshapes, GaussianValues)
{
    const auto g = make_grid(0.0, 16.0, 1025);
    const auto a = gaussian_profile(g, 0.0, 1.0);
    EXPECT_EQ(a[g.mid()].real(), 1.0);
    const auto b = gaussian_profile(make_grid(0.0, 4.0, 5), 0.0, 1.0);
    EXPECT_NEAR(b[3].real(), 0.60653065971263342, 1e-15);
    for (std::size_t i = 0; i < g.count(); ++i)
        EXPECT_EQ(a[i], a[g.count() - 1 - i]);
    EXPECT_THROW(gaussian_profile(g, 0.0, 0.0), std::invalid_argument);
}

TEST(Lineshapes, LorentzianValues)
{
    const auto g = make_grid(0.0, 4.0, 5);
    const auto a = lorentzian_profile(g, 0.0, 1.0);
    EXPECT_EQ(a[2].real(), 1.0);
    EXPECT_EQ(a[3].real(), 0.5);
    EXPECT_THROW(lorentzian_profile(g, 0.0, -1.0), std::invalid_argument);
}

TEST(Lineshapes, VoigtMatchesHighPrecisionConvolution)
{
    // Reference values from arbitrary-precision quadrature of the convolution.
    const VoigtShape v(0.0, 1.0, 1.0);
    EXPECT_NEAR(v(0.0), 1.0, 1e-14);
    EXPECT_NEAR(v(0.3), 0.978914882108256607, 1e-9);
    EXPECT_NEAR(v(2.0), 0.434648613612668948, 1e-9);
    EXPECT_NEAR(v(5.0), 0.066527570091528511, 1e-9);
}

TEST(Lineshapes, VoigtDegenerateLimits)
{
    const auto g = make_grid(0.0, 16.0, 1025);
    const auto gauss = gaussian_profile(g, 0.0, 1.0);
    const auto lor = lorentzian_profile(g, 0.0, 1.0);
    const auto v_g = voigt_profile(g, 0.0, 1.0, 1e-5);
    const auto v_l = voigt_profile(g, 0.0, 1e-5, 1.0);
    double err_g = 0.0, err_l = 0.0;
    for (std::size_t i = 0; i < g.count(); ++i) {
        err_g = std::max(err_g, std::abs(v_g[i] - gauss[i]));
        err_l = std::max(err_l, std::abs(v_l[i] - lor[i]));
    }
    EXPECT_LT(err_g, 1e-3);
    EXPECT_LT(err_l, 1e-3);
    EXPECT_THROW(voigt_profile(g, 0.0, 0.0, 1.0), std::invalid_argument);
    EXPECT_THROW(voigt_profile(g, 0.0, 1.0, 0.0), std::invalid_argument);
}

TEST(Perturbation, ZeroEpsilonIsBitExactIdentity)
{
    const auto g = make_grid(0.0, 16.0, 257);
    const auto a = gaussian_profile(g, 0.0, 1.0);
    for (auto kind : {PerturbationKind::LinearTilt, PerturbationKind::OffsetGaussian}) {
        const auto b = apply_perturbation(a, {kind, 0.0, 3.0}, 0.0, 1.0);
        for (std::size_t i = 0; i < g.count(); ++i)
            EXPECT_EQ(a[i], b[i]);
    }
}

TEST(Perturbation, OffsetGaussianAddsSatellite)
{
    const auto g = make_grid(0.0, 16.0, 257); // step 1/16, so 3 sigma is a node
    const auto a = apply_perturbation(gaussian_profile(g, 0.0, 1.0),
                                      {PerturbationKind::OffsetGaussian, 0.15, 3.0}, 0.0, 1.0);
    const std::size_t at3 = g.mid() + 48;
    ASSERT_DOUBLE_EQ(g[at3], 3.0);
    EXPECT_NEAR(a[at3].real(), std::exp(-4.5) + 0.15, 1e-15);
    EXPECT_NEAR(a[g.mid()].real(), 1.0 + 0.15 * std::exp(-4.5), 1e-15);
}

TEST(Perturbation, TiltIsRelativeToCenterAndKeepsSign)
{
    const auto g = make_grid(5.0, 16.0, 257);
    const auto a = apply_perturbation(gaussian_profile(g, 5.0, 2.0), {PerturbationKind::LinearTilt, 0.3, 0.0},
                                      5.0, 2.0);
    EXPECT_EQ(a[g.mid()].real(), 1.0);
    // (w - w0)/sigma = -4 at the first node: factor 1 - 1.2 < 0
    EXPECT_LT(a[0].real(), 0.0);
    EXPECT_GT(tvd_asymmetry(intensity_of(apply_perturbation(gaussian_profile(g, 5.0, 2.0),
                                                            {PerturbationKind::LinearTilt, 0.1, 0.0}, 5.0, 2.0))),
              0.0);
}

TEST(Perturbation, RejectsNegativeEpsilon)
{
    const auto a = gaussian_profile(make_grid(0.0, 16.0, 33), 0.0, 1.0);
    EXPECT_THROW(apply_perturbation(a, {PerturbationKind::LinearTilt, -0.1, 0.0}, 0.0, 1.0),
                 std::invalid_argument);
}

TEST(AreaNormalize, Examples)
{
    const auto g = make_grid(1.0, 4.0, 9);
    const IntensitySpectrum flat(g, std::vector<double>(9, 3.7));
    const auto flat_n = area_normalize(flat);
    for (double v : flat_n.values())
        EXPECT_NEAR(v, 0.25, 1e-15);

    const auto s = gaussian_intensity(make_grid(0.0, 16.0, 1025), 0.0, 1.0);
    const auto n1 = area_normalize(s);
    EXPECT_NEAR(n1.integral(), 1.0, 1e-12);
    const auto n2 = area_normalize(n1);
    std::vector<double> scaled(s.values().begin(), s.values().end());
    for (double& v : scaled)
        v *= 42.0;
    const auto n3 = area_normalize(IntensitySpectrum(s.grid(), scaled));
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_NEAR(n2[i], n1[i], 1e-12 * n1[i] + 1e-300);
        EXPECT_NEAR(n3[i], n1[i], 1e-12 * n1[i] + 1e-300);
    }
    EXPECT_THROW(area_normalize(IntensitySpectrum(g, std::vector<double>(9, 0.0))), std::invalid_argument);
}

TEST(Centroid, SymmetricCases)
{
    const auto g = make_grid(3.0, 16.0, 1025);
    EXPECT_NEAR(centroid(gaussian_intensity(g, 3.0, 1.0)), 3.0, g.step() * 1e-10);

    std::vector<double> deltas(g.count(), 0.0);
    deltas[g.mid() - 100] = 1.0;
    deltas[g.mid() + 100] = 1.0;
    EXPECT_NEAR(centroid(IntensitySpectrum(g, deltas)), 3.0, 1e-12);
    EXPECT_THROW(centroid(IntensitySpectrum(g, std::vector<double>(g.count(), 0.0))), std::invalid_argument);
}

TEST(Centroid, TiltedGaussianMatchesClosedForm)
{
    // |A|^2 = exp(-x^2) (1 + eps x)^2 has centroid eps / (1 + eps^2 / 2).
    const double eps = 0.2;
    const auto g = make_grid(0.0, 16.0, 1025);
    const auto a = apply_perturbation(gaussian_profile(g, 0.0, 1.0), {PerturbationKind::LinearTilt, eps, 0.0}, 0.0, 1.0);
    const double mu = centroid(intensity_of(a));
    EXPECT_GT(mu, 0.0);
    EXPECT_NEAR(mu, eps / (1.0 + 0.5 * eps * eps), 1e-12);
}

TEST(Tvd, SymmetricSpectrumIsZero)
{
    const auto g = make_grid(0.0, 16.0, 1025);
    EXPECT_LT(tvd_asymmetry(gaussian_intensity(g, 0.0, 1.0)), 1e-10);
    EXPECT_LT(tvd_asymmetry(intensity_of(lorentzian_profile(g, 0.0, 1.0))), 1e-10);
}

TEST(Tvd, DisjointPeaksStayBounded)
{
    // Two narrow peaks of unequal mass: the mirror about the centroid misses both.
    const auto g = make_grid(0.0, 20.0, 2001);
    std::vector<double> v(g.count(), 0.0);
    for (std::size_t i = 0; i < g.count(); ++i)
        v[i] = gaussian_value(g[i], -6.0, 0.05) + 0.5 * gaussian_value(g[i], 5.0, 0.05);
    const double t = tvd_asymmetry(IntensitySpectrum(g, v));
    EXPECT_GT(t, 0.99);
    EXPECT_LE(t, 1.0);
}

TEST(Tvd, TiltSequenceIncreasesAndConvergesUnderRefinement)
{
    const auto coarse = make_grid(0.0, 16.0, 1025);
    const auto fine = make_grid(0.0, 16.0, 4097);
    double previous = 0.0;
    for (double eps : {0.05, 0.1, 0.2, 0.3}) {
        const PerturbationSpec p{PerturbationKind::LinearTilt, eps, 0.0};
        const double t = tvd_asymmetry(intensity_of(apply_perturbation(gaussian_profile(coarse, 0.0, 1.0), p, 0.0, 1.0)));
        const double t_fine = tvd_asymmetry(intensity_of(apply_perturbation(gaussian_profile(fine, 0.0, 1.0), p, 0.0, 1.0)));
        EXPECT_GT(t, previous);
        EXPECT_NEAR(t, t_fine, 1e-4);
        previous = t;
    }
}

TEST(Tvd, PropertyInvariances)
{
    std::mt19937_64 rng(7);
    const auto g = make_grid(0.0, 16.0, 801);
    for (int trial = 0; trial < 40; ++trial) {
        const auto s = random_spectrum(rng, g);
        const double t = tvd_asymmetry(s);
        ASSERT_GE(t, 0.0);
        ASSERT_LE(t, 1.0);

        std::vector<double> scaled(s.values().begin(), s.values().end());
        for (double& v : scaled)
            v *= 1e3;
        EXPECT_NEAR(tvd_asymmetry(IntensitySpectrum(g, scaled)), t, 1e-10);

        const IntensitySpectrum shifted(make_grid(17.25, 16.0, 801), std::vector<double>(s.values().begin(), s.values().end()));
        EXPECT_NEAR(tvd_asymmetry(shifted), t, 1e-10);

        EXPECT_NEAR(tvd_asymmetry(reversed(s)), t, 1e-10);
    }
}

TEST(LineshapeCoefficients, GaussianOnDefaultGrid)
{
    const auto c = lineshape_coefficients(gaussian_profile(make_grid(0.0, 16.0, 1025), 0.0, 1.0));
    EXPECT_NEAR(c.c1, std::numbers::sqrt2, 1e-6);
    EXPECT_NEAR(c.c2, 2.0 / std::sqrt(3.0), 1e-6);
    EXPECT_NEAR(c.ratio(), 0.816497, 1e-6);

    const auto fine = lineshape_coefficients(gaussian_profile(make_grid(0.0, 16.0, 4097), 0.0, 1.0));
    EXPECT_NEAR(fine.c1, std::numbers::sqrt2, 1e-6);
    EXPECT_NEAR(fine.c2, 2.0 / std::sqrt(3.0), 1e-6);
}

TEST(LineshapeCoefficients, LorentzianOnGridMatchesTruncatedIntegrals)
{
    // Truncation at +-8 gamma: integrals of (1+x^2)^-k over [-8, 8], k = 1..4.
    const double m1 = 2.8928826644962704, m2 = 1.5695182553250583, m3 = 1.1780854370559239,
                 m4 = 0.98174757442416354;
    const auto c = lineshape_coefficients(lorentzian_profile(make_grid(0.0, 16.0, 4097), 0.0, 1.0));
    EXPECT_NEAR(c.c1, m1 / m2, 1e-6);
    EXPECT_NEAR(c.c2, m3 / m4, 1e-6);
}

TEST(LineshapeCoefficients, FullLineQuadratureReproducesClosedForms)
{
    const auto gauss = full_line_coefficients([](double w) { return gaussian_value(w, 0.0, 1.0); }, 0.0, 1.0);
    EXPECT_NEAR(gauss.c1, std::numbers::sqrt2, 1e-9);
    EXPECT_NEAR(gauss.c2, 2.0 / std::sqrt(3.0), 1e-9);
    const auto lor = full_line_coefficients([](double w) { return lorentzian_value(w, 0.0, 1.0); }, 0.0, 1.0);
    EXPECT_NEAR(lor.c1, 2.0, 1e-9);
    EXPECT_NEAR(lor.c2, 1.2, 1e-9);
    EXPECT_NEAR(lor.ratio(), 0.6, 1e-9);
}

TEST(LineshapeCoefficients, VoigtRatioLiesBetweenLorentzianAndGaussian)
{
    const VoigtShape v(0.0, 1.0, 1.0);
    const auto c = full_line_coefficients(v, 0.0, 1.0, 2048);
    EXPECT_GT(c.c1, 1.0);
    EXPECT_GT(c.ratio(), 0.6);
    EXPECT_LT(c.ratio(), 2.0 / std::sqrt(6.0));
}

TEST(LineshapeCoefficients, FlatTopIsUnity)
{
    const auto g = make_grid(0.0, 4.0, 101);
    const auto c = lineshape_coefficients(AmplitudeSpectrum(g, std::vector<double>(101, 1.0)));
    EXPECT_NEAR(c.c1, 1.0, 1e-15);
    EXPECT_NEAR(c.c2, 1.0, 1e-15);
}

// Both coefficients are ratios of integrals that each pick up the stretch
// factor k, so they are invariant under a frequency-axis stretch.
TEST(LineshapeCoefficients, InvariantUnderFrequencyStretch)
{
    for (double k : {0.5, 2.0, 3.0}) {
        const auto g = make_grid(0.0, 16.0, 4097);
        const auto base = lineshape_coefficients(gaussian_profile(g, 0.0, 1.0));
        const auto stretched = lineshape_coefficients(gaussian_profile(g.scaled(k), 0.0, k));
        EXPECT_NEAR(stretched.c1, base.c1, 1e-8);
        EXPECT_NEAR(stretched.c2, base.c2, 1e-8);
    }
}

TEST(LineshapeCoefficients, RejectsNegativeOrComplexAmplitude)
{
    const auto g = make_grid(0.0, 16.0, 257);
    const auto tilted = apply_perturbation(gaussian_profile(g, 0.0, 1.0), {PerturbationKind::LinearTilt, 0.3, 0.0}, 0.0, 1.0);
    EXPECT_THROW(lineshape_coefficients(tilted), std::invalid_argument);
    std::vector<complex> v(g.count(), complex(1.0, 0.5));
    EXPECT_THROW(lineshape_coefficients(AmplitudeSpectrum(g, v)), std::invalid_argument);
}
