#include <doctest.h>

#include <cmath>

#include "nli/link.hpp"
#include "nli/rng.hpp"

using namespace nli;

TEST_CASE("unit conversions") {
    CHECK(alpha_from_db_per_km(0.2) == doctest::Approx(0.0460517018598).epsilon(1e-9));
    CHECK(beta2_from_dispersion(17.0, 1550.0) == doctest::Approx(-21.68).epsilon(2.5e-3));
    const double b3 = beta3_from_slope(0.067, 17.0, 1550.0);
    CHECK(b3 > 0.13);
    CHECK(b3 < 0.15);
}

TEST_CASE("effective length") {
    const double alpha = alpha_from_db_per_km(0.2);
    CHECK(effective_length(alpha, 0.0) == 0.0);
    // alpha -> 0 limit handled by the series branch
    CHECK(effective_length(1e-9, 50.0) == doctest::Approx(50.0).epsilon(1e-7));
    // direct evaluation of (1 - exp(-alpha z)) / alpha at the reference span
    const double expected = (1.0 - std::exp(-alpha * 100.0)) / alpha; // = 21.4976 km
    CHECK(effective_length(alpha, 100.0) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(effective_length(alpha, 100.0) == doctest::Approx(21.4976).epsilon(1e-4));
}

TEST_CASE("phase mismatch") {
    CHECK(phase_mismatch(0.1, 0.2, 0.1, -21.7, 0.1) == 0.0);
    CHECK(phase_mismatch(0.2, 0.1, 0.1, -21.7, 0.1) == 0.0);
    // symmetry under exchange of the first two frequencies
    const double a = phase_mismatch(0.11, 0.31, 0.05, -21.7, 0.14);
    const double b = phase_mismatch(0.31, 0.11, 0.05, -21.7, 0.14);
    CHECK(a == doctest::Approx(b).epsilon(1e-15));
    // f1 - fi = f2 - fi = 23 GHz, beta3 = 0
    const double phi = phase_mismatch(0.023, 0.023, 0.0, -21.7, 0.0);
    CHECK(phi == doctest::Approx(4.0 * M_PI * M_PI * 0.023 * 0.023 * (-21.7)).epsilon(1e-12));
    CHECK(phi == doctest::Approx(-0.4533).epsilon(2e-4));
}

namespace {

LinkSpec paper_link(double cr) {
    LinkSpec link;
    link.fiber.alpha = alpha_from_db_per_km(0.2);
    link.fiber.beta2 = beta2_from_dispersion(17.0);
    link.fiber.beta3 = beta3_from_slope(0.067, 17.0);
    link.fiber.gamma_nl = 1.2;
    link.fiber.cr = cr;
    link.fiber.span_length = 100.0;
    link.fiber.num_spans = 1;
    link.grid = WdmGrid::uniform(23, 0.045, 0.046, 1e-3);
    return link;
}

} // namespace

TEST_CASE("isrs power profile basics") {
    const LinkSpec link = paper_link(1.12);
    const IsrsProfile prof(link.fiber, link.grid);

    SUBCASE("z = 0 is unity for every frequency") {
        for (double f : {-0.506, -0.2, 0.0, 0.3, 0.506})
            CHECK(prof.rho(0.0, f) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("Cr = 0 reduces to flat loss") {
        const LinkSpec l0 = paper_link(0.0);
        const IsrsProfile p0(l0.fiber, l0.grid);
        for (double z : {10.0, 55.0, 100.0})
            for (double f : {-0.5, 0.0, 0.5})
                CHECK(p0.rho(z, f) == doctest::Approx(std::exp(-l0.fiber.alpha * z)).epsilon(1e-12));
    }
    SUBCASE("edge channel tilt at the span end is about +1.2 dB") {
        const double f1 = link.grid.channel_freq(1); // lowest frequency
        const double gain_db = 10.0 * std::log10(prof.rho(100.0, f1) / std::exp(-link.fiber.alpha * 100.0));
        CHECK(gain_db > 1.0);
        CHECK(gain_db < 1.35);
    }
    SUBCASE("monotone tilt in frequency") {
        for (double f = -0.45; f < 0.45; f += 0.1)
            CHECK(prof.rho(80.0, f) > prof.rho(80.0, f + 0.05));
    }
    SUBCASE("total power conservation against independent quadrature") {
        // integral of G_Tx(v) rho(z, v) dv must equal P_tot exp(-alpha z)
        Rng rng(7);
        for (int zi = 0; zi < 10; ++zi) {
            const double z = 100.0 * rng.uniform();
            double integral = 0.0;
            // Riemann sum over each channel rectangle, 2000 points per channel
            const double rs = link.grid.symbol_rate;
            for (int k = 1; k <= link.grid.num_channels; ++k) {
                const double fk = link.grid.channel_freq(k);
                const double h = rs / 2000.0;
                double acc = 0.0;
                for (int j = 0; j < 2000; ++j) {
                    const double f = fk - rs / 2.0 + (j + 0.5) * h;
                    acc += prof.rho(z, f);
                }
                integral += (link.grid.power_w[static_cast<std::size_t>(k - 1)] / rs) * acc * h;
            }
            const double expected = link.grid.total_power() * std::exp(-link.fiber.alpha * z);
            CHECK(integral == doctest::Approx(expected).epsilon(1e-7));
        }
    }
    SUBCASE("log-derivative matches finite differences") {
        const double z = 42.0, f = -0.3, h = 1e-4;
        const double fd = (std::log(prof.rho(z + h, f)) - std::log(prof.rho(z - h, f))) / (2.0 * h);
        CHECK(prof.dlnrho_dz(z, f) == doctest::Approx(fd).epsilon(1e-6));
    }
}

TEST_CASE("fwm efficiency") {
    const LinkSpec link0 = paper_link(0.0);
    SUBCASE("closed form at Cr = 0 over random triples") {
        Rng rng(11);
        for (int t = 0; t < 1000; ++t) {
            const double f1 = -0.52 + 1.04 * rng.uniform();
            const double f2 = -0.52 + 1.04 * rng.uniform();
            const double fi = -0.52 + 1.04 * rng.uniform();
            const cdouble mu = fwm_efficiency(f1, f2, fi, link0.fiber, link0.grid);
            const double phi = phase_mismatch(f1, f2, fi, link0.fiber.beta2, link0.fiber.beta3);
            const cdouble s(link0.fiber.alpha, phi);
            const cdouble expected = (1.0 - std::exp(-s * link0.fiber.span_length)) / s;
            CHECK(std::abs(mu - expected) <= 1e-8 * std::abs(expected));
        }
    }
    SUBCASE("phi = 0 gives the effective length") {
        const cdouble mu = fwm_efficiency(0.1, 0.2, 0.2, link0.fiber, link0.grid);
        CHECK(mu.real() == doctest::Approx(effective_length(link0.fiber.alpha, 100.0)).epsilon(1e-8));
        CHECK(std::abs(mu.imag()) < 1e-8);
    }
    SUBCASE("symmetry in the first two arguments") {
        const LinkSpec link = paper_link(1.12);
        const cdouble a = fwm_efficiency(0.11, -0.23, 0.046, link.fiber, link.grid);
        const cdouble b = fwm_efficiency(-0.23, 0.11, 0.046, link.fiber, link.grid);
        CHECK(std::abs(a - b) < 1e-12);
    }
    SUBCASE("center-channel value with ISRS is real and between L_eff and L_s") {
        const LinkSpec link = paper_link(1.12);
        const cdouble mu = fwm_efficiency(0.0, 0.0, 0.0, link.fiber, link.grid);
        CHECK(std::abs(mu.imag()) < 1e-10);
        CHECK(mu.real() > effective_length(link.fiber.alpha, 100.0) * 0.5);
        CHECK(mu.real() < 100.0);
    }
    SUBCASE("magnitude bounded by the z-integral of the profile") {
        const LinkSpec link = paper_link(1.12);
        const IsrsProfile prof(link.fiber, link.grid);
        Rng rng(13);
        for (int t = 0; t < 50; ++t) {
            const double f1 = -0.5 + rng.uniform();
            const double f2 = -0.5 + rng.uniform();
            const double fi = -0.5 + rng.uniform();
            const cdouble mu = fwm_efficiency(f1, f2, fi, link.fiber, link.grid);
            double bound = 0.0;
            const int np = 4000;
            for (int j = 0; j < np; ++j) {
                const double z = (j + 0.5) * link.fiber.span_length / np;
                bound += prof.rho(z, f1 + f2 - fi);
            }
            bound *= link.fiber.span_length / np;
            CHECK(std::abs(mu) <= bound * (1.0 + 1e-6));
        }
    }
    SUBCASE("multi-span accumulation options") {
        LinkSpec link = paper_link(0.0);
        link.fiber.num_spans = 3;
        link.fiber.span_sum = SpanSum::Plain;
        const cdouble plain = fwm_efficiency(0.1, 0.15, 0.05, link.fiber, link.grid);
        link.fiber.span_sum = SpanSum::Incoherent;
        const cdouble inc = fwm_efficiency(0.1, 0.15, 0.05, link.fiber, link.grid);
        link.fiber.span_sum = SpanSum::Coherent;
        const cdouble coh = fwm_efficiency(0.1, 0.15, 0.05, link.fiber, link.grid);
        CHECK(std::abs(plain) == doctest::Approx(3.0 * std::abs(inc)).epsilon(1e-12));
        CHECK(std::abs(coh) <= std::abs(plain) * (1.0 + 1e-12));
    }
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(WdmGrid::uniform(0, 0.045, 0.046, 1e-3), ConfigError);
    CHECK_THROWS_AS(WdmGrid::uniform(3, 0.045, 0.044, 1e-3), ConfigError);
    FiberParams bad;
    bad.span_length = -5.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
