#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>

#include "mpqkd/source_stats.hpp"
#include "oracles.hpp"

using namespace mpqkd;

TEST_CASE("PhaseConfig validation") {
    CHECK_NOTHROW(PhaseConfig(2));
    CHECK_NOTHROW(PhaseConfig(20, 1e-12));
    CHECK_THROWS_AS(PhaseConfig(0), std::domain_error);
    CHECK_THROWS_AS(PhaseConfig(3), std::domain_error);
    CHECK_THROWS_AS(PhaseConfig(-4), std::domain_error);
    CHECK_THROWS_AS(PhaseConfig(4, 0.0), std::domain_error);
    CHECK_THROWS_AS(PhaseConfig(4, 1e-3), std::domain_error);
}

TEST_CASE("pseudo photon probabilities at zero intensity") {
    PhaseConfig cfg(4);
    CHECK(pseudo_photon_prob(0.0, 0, cfg) == 1.0);
    CHECK(pseudo_photon_prob(0.0, 2, cfg) == 0.0);
}

TEST_CASE("pseudo photon probability closed form at D=2") {
    // For D=2, k=0 the series collapses to e^{-mu} cosh(mu).
    PhaseConfig cfg(2);
    CHECK(pseudo_photon_prob(0.5, 0, cfg) ==
          doctest::Approx(0.6839397205857212).epsilon(1e-14));
    CHECK(pseudo_photon_prob(0.5, 0, cfg) ==
          doctest::Approx(std::exp(-0.5) * std::cosh(0.5)).epsilon(1e-14));
    CHECK(pseudo_photon_prob(0.5, 1, cfg) ==
          doctest::Approx(std::exp(-0.5) * std::sinh(0.5)).epsilon(1e-14));
}

TEST_CASE("pseudo photon probabilities match the direct-series oracle") {
    for (int d : {2, 4, 8, 12}) {
        PhaseConfig cfg(d);
        for (double mu : {0.05, 0.3, 1.0, 2.5}) {
            for (int k = 0; k < d; ++k) {
                const double expect = static_cast<double>(oracle::pseudo_prob(mu, k, d));
                CHECK(pseudo_photon_prob(mu, k, cfg) == doctest::Approx(expect).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("pseudo photon probabilities are normalized") {
    for (int d = 2; d <= 20; d += 2) {
        PhaseConfig cfg(d);
        for (double mu : {0.01, 0.1, 0.3, 0.5, 1.0}) {
            double sum = 0.0;
            for (int k = 0; k < d; ++k) sum += pseudo_photon_prob(mu, k, cfg);
            CHECK(std::fabs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("pseudo photon probabilities approach Poisson monotonically in D") {
    for (double mu : {0.1, 0.5}) {
        for (int k = 0; k <= 3; ++k) {
            double prev = 1.0;
            for (int d : {4, 8, 12, 16, 20}) {
                PhaseConfig cfg(d);
                const double gap = std::fabs(pseudo_photon_prob(mu, k, cfg) -
                                             static_cast<double>(oracle::poisson(mu, k)));
                CHECK(gap <= prev);
                prev = gap;
                if (d == 20) CHECK(gap < 1e-10);
            }
        }
    }
}

TEST_CASE("pseudo photon probability rejects bad arguments") {
    PhaseConfig cfg(4);
    CHECK_THROWS_AS(pseudo_photon_prob(-0.1, 0, cfg), std::domain_error);
    CHECK_THROWS_AS(pseudo_photon_prob(0.1, 4, cfg), std::domain_error);
    CHECK_THROWS_AS(pseudo_photon_prob(0.1, -1, cfg), std::domain_error);
}

TEST_CASE("coherent phase sum at alpha = 0") {
    PhaseConfig cfg(6);
    CHECK(std::abs(coherent_phase_sum(0.0, 0, cfg) - 6.0) < 1e-14);
    CHECK(std::abs(coherent_phase_sum(0.0, 3, cfg)) < 1e-14);
}

TEST_CASE("coherent phase sum satisfies the Fock-expansion identity") {
    // S_k(alpha) = D * sum_m alpha^(m*D+k)/(m*D+k)! to relative 1e-10.
    std::uint64_t rng = 7;
    auto unit = [&rng] {
        rng = rng * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(rng >> 11) * 0x1.0p-53;
    };
    for (int d : {2, 6, 12}) {
        PhaseConfig cfg(d);
        for (int rep = 0; rep < 20; ++rep) {
            const double r = 2.0 * unit();
            const double phi = 2.0 * M_PI * unit();
            const std::complex<double> alpha = std::polar(r, phi);
            for (int k = 0; k < d; ++k) {
                const std::complex<double> lhs = coherent_phase_sum(alpha, k, cfg);
                const auto rhs_l = oracle::fock_series(alpha, k, d);
                const std::complex<double> rhs(
                    static_cast<double>(d) * static_cast<double>(rhs_l.real()),
                    static_cast<double>(d) * static_cast<double>(rhs_l.imag()));
                const double scale = std::max(std::abs(rhs), 1e-30);
                CHECK(std::abs(lhs - rhs) / scale < 1e-10);
            }
        }
    }
}

TEST_CASE("intensity fidelity basics") {
    PhaseConfig d10(10), d4(4);
    CHECK(intensity_fidelity(0.3, 0.3, d10) == 1.0);
    // With a vacuum partner only the mu-sum deviates from 1; the value is
    // 1/sqrt(sum_m mu^(mD)/(mD)!), just below 1.
    CHECK(intensity_fidelity(0.2, 0.0, d4) ==
          doctest::Approx(0.9999666683014979).epsilon(1e-13));
    CHECK(intensity_fidelity(0.2, 0.0, d4) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK_THROWS_AS(intensity_fidelity(-0.2, 0.1, d4), std::domain_error);
}

TEST_CASE("intensity fidelity against oracle, monotone in D") {
    double prev = 0.0;
    for (int d : {4, 8, 12}) {
        PhaseConfig cfg(d);
        const double f = intensity_fidelity(0.4, 0.1, cfg);
        const long double num = oracle::mod_series(std::sqrt(0.4L * 0.1L), 0, 0, d);
        const long double den = std::sqrt(oracle::mod_series(0.4L, 0, 0, d) *
                                          oracle::mod_series(0.1L, 0, 0, d));
        CHECK(f == doctest::Approx(static_cast<double>(num / den)).epsilon(1e-12));
        CHECK(f > 0.0);
        CHECK(f <= 1.0);
        CHECK(f > prev);
        prev = f;
    }
    CHECK(intensity_fidelity(0.4, 0.1, PhaseConfig(4)) ==
          doctest::Approx(0.9995316336873346).epsilon(1e-13));
}

TEST_CASE("intensity fidelity is exactly symmetric") {
    PhaseConfig cfg(8);
    std::uint64_t rng = 99;
    auto unit = [&rng] {
        rng = rng * 6364136223846793005ull + 1442695040888963407ull;
        return static_cast<double>(rng >> 11) * 0x1.0p-53;
    };
    for (int rep = 0; rep < 50; ++rep) {
        const double a = 0.5 * unit(), b = 0.5 * unit();
        CHECK(intensity_fidelity(a, b, cfg) == intensity_fidelity(b, a, cfg));
    }
}

TEST_CASE("pseudo single-photon fidelity") {
    CHECK(pseudo_single_fidelity(0.0, PhaseConfig(8)) == 1.0);
    // First correction term is (2*mu)^D/(D+1)!; tiny at mu=0.25, D=12.
    CHECK(1.0 - pseudo_single_fidelity(0.25, PhaseConfig(12)) < 1e-7);
    CHECK(1.0 - pseudo_single_fidelity(0.25, PhaseConfig(12)) > 0.0);
    // Closed form at D=2: sum_m (2mu)^(2m)/(2m+1)! = sinh(2mu)/(2mu).
    CHECK(pseudo_single_fidelity(0.5, PhaseConfig(2)) ==
          doctest::Approx(1.0 / std::sqrt(std::sinh(1.0))).epsilon(1e-14));
    CHECK(pseudo_single_fidelity(0.5, PhaseConfig(2)) ==
          doctest::Approx(0.9224522362915717).epsilon(1e-13));
}

TEST_CASE("expected photon number") {
    PhaseConfig d4(4), d10(10);
    CHECK(expected_photon_number(0.0, 1, d4) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(expected_photon_number(0.0, 0, d4) == 0.0);

    // Exact ratio vs oracle.
    for (double mu : {0.05, 0.3, 0.5}) {
        for (int k = 0; k < 4; ++k) {
            const long double num = oracle::mod_series(mu, k, -1, 4);
            const long double den = oracle::mod_series(mu, k, 0, 4);
            CHECK(expected_photon_number(mu, k, d4) ==
                  doctest::Approx(static_cast<double>(num / den)).epsilon(1e-12));
        }
    }

    // The printed first-order approximation k + mu^D/((D+k)!/(D k!) + mu^D/D)
    // agrees to 1e-6 at small mu.
    const double mu = 0.3;
    const double mu_d = std::pow(mu, 10);
    const double approx = 1.0 + mu_d / (39916800.0 / 10.0 + mu_d / 10.0);
    CHECK(std::fabs(expected_photon_number(mu, 1, d10) - approx) < 1e-6);
    CHECK(expected_photon_number(mu, 1, d10) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("binary entropy") {
    CHECK(binary_entropy(0.5) == 1.0);
    CHECK(binary_entropy(0.0) == 0.0);
    CHECK(binary_entropy(1.0) == 0.0);
    CHECK(binary_entropy(0.11) == doctest::Approx(0.499915958164528).epsilon(1e-13));
    CHECK_THROWS_AS(binary_entropy(-0.01), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.01), std::domain_error);
}

TEST_CASE("series truncation stays under 200 terms up to |x| = 4") {
    for (int d : {2, 4, 8, 20}) {
        for (double x : {0.1, 1.0, 2.0, 4.0}) {
            for (int k : {0, 1, d - 1}) {
                int terms = 0;
                (void)detail::mod_factorial_series(x, k, k, d, 1e-15, &terms);
                CHECK(terms < 200);
            }
        }
    }
    // Complex arguments converge too.
    int terms = 0;
    (void)detail::mod_factorial_series(std::complex<double>(2.0, -3.46), 1, 1, 6, 1e-15, &terms);
    CHECK(terms < 200);
}

TEST_CASE("PhotonStats dispatch") {
    const auto cont = PhotonStats::continuous_limit();
    const auto disc = PhotonStats::discrete(PhaseConfig(12));
    CHECK(cont.continuous());
    CHECK(!disc.continuous());
    CHECK(cont.prob(0.2, 1) == doctest::Approx(0.2 * std::exp(-0.2)).epsilon(1e-14));
    CHECK(cont.mean_photon_number(0.2, 3) == 3.0);
    CHECK(cont.single_photon_fidelity(0.4) == 1.0);
    CHECK(disc.prob(0.2, 1) == pseudo_photon_prob(0.2, 1, PhaseConfig(12)));
    CHECK(disc.mean_photon_number(0.2, 1) == expected_photon_number(0.2, 1, PhaseConfig(12)));
}
