#include "oracles.hpp"
#include "wg/basis.hpp"
#include "wg/interaction.hpp"

#include <cmath>
#include <doctest.h>

using namespace wg;

TEST_CASE("free particle has zero scattering length")
{
    auto s = free_radial_scattering_length(0.0, 0.1);
    CHECK(s.a == 0.0);
    CHECK_FALSE(s.divergent);
    CHECK(count_free_bound_states(0.0, 0.1) == 0);
}

TEST_CASE("sign structure around the first bound state")
{
    const auto w = one_bound_state_window(0.1);
    const auto above = free_radial_scattering_length(w.lower * (1 + 1e-6), 0.1);
    const auto below = free_radial_scattering_length(w.lower * (1 - 1e-6), 0.1);
    CHECK(above.a > 1e3);
    CHECK(below.a < -1e3);
    const auto at = free_radial_scattering_length(w.lower, 0.1);
    CHECK(at.divergent);
    CHECK(std::isfinite(at.inverse));
    CHECK(count_free_bound_states(w.lower * (1 - 1e-6), 0.1) == 0);
    CHECK(count_free_bound_states(w.lower * (1 + 1e-6), 0.1) == 1);
    CHECK(count_free_bound_states(w.upper * (1 - 1e-6), 0.1) == 1);
    CHECK(count_free_bound_states(w.upper * (1 + 1e-6), 0.1) == 2);
    // Gaussian well: first bound state at 2 V0 r0^2 ~ 2.684
    CHECK(2 * w.lower * 0.01 == doctest::Approx(2.684).epsilon(1e-3));
}

TEST_CASE("calibration at the free-space resonance ratio")
{
    const double V0 = calibrate_depth(1.4603, 0.1);
    const auto w = one_bound_state_window(0.1);
    CHECK(V0 > w.lower);
    CHECK(V0 < w.upper);
    const auto s = free_radial_scattering_length(V0, 0.1);
    CHECK(s.a == doctest::Approx(0.68480).epsilon(1e-5));
    CHECK(oracle::scattering_length(V0, 0.1) == doctest::Approx(1.0 / 1.4603).epsilon(1e-8));
    CHECK(count_free_bound_states(V0, 0.1) == 1);
}

TEST_CASE("matching radius independence")
{
    const double V0 = calibrate_depth(1.4603, 0.1);
    const double a15 = free_radial_scattering_length(V0, 0.1).a;
    for (double R : {10.0, 12.0, 20.0}) {
        RadialOptions o;
        o.match_radius_in_r0 = R;
        CHECK(std::abs(free_radial_scattering_length(V0, 0.1, o).a - a15) < 1e-8 * std::abs(a15));
    }
}

TEST_CASE("negative and unitarity targets")
{
    const auto w = one_bound_state_window(0.1);
    const double Vneg = calibrate_depth(-2.0, 0.1);
    CHECK(Vneg > w.lower);
    CHECK(Vneg < w.upper);
    CHECK(free_radial_scattering_length(Vneg, 0.1).a == doctest::Approx(-0.5).epsilon(1e-6));
    CHECK(oracle::scattering_length(Vneg, 0.1) == doctest::Approx(-0.5).epsilon(1e-7));
    CHECK(Vneg > calibrate_depth(3.0, 0.1));

    const double Vres = calibrate_depth(std::nullopt, 0.1);
    CHECK(std::abs(free_radial_scattering_length(Vres, 0.1).inverse) < 1e-6);
}

TEST_CASE("calibration round trip")
{
    for (double r0 : {0.05, 0.1, 0.2})
        for (double t : {-3.0, -0.5, 0.3, 1.0, 1.4603, 2.2, 4.0}) {
            const double V0 = calibrate_depth(t, r0);
            CHECK(std::abs(free_radial_scattering_length(V0, r0).inverse - t) <= 1e-6);
            CHECK(count_free_bound_states(V0, r0) == 1);
        }
    CHECK_THROWS_AS(calibrate_depth(0.0, 0.1), CalibrationError);
    CHECK_THROWS_AS(calibrate_depth(NAN, 0.1), CalibrationError);
    try {
        calibrate_depth(0.0, 0.1);
    } catch (const CalibrationError& e) {
        CHECK(std::string(e.what()).find("achievable") != std::string::npos);
    }
}

TEST_CASE("inverse scattering length increases across the window")
{
    const auto w = one_bound_state_window(0.1);
    const double Vpole = calibrate_depth(1e6, 0.1);
    double prev = -INFINITY;
    for (int i = 1; i < 40; ++i) {
        const double V = w.lower + (Vpole - w.lower) * i / 40.0;
        const double inv = free_radial_scattering_length(V, 0.1).inverse;
        CHECK(inv > prev);
        prev = inv;
    }
    prev = -INFINITY;
    for (int i = 1; i < 40; ++i) {
        const double V = Vpole + (w.upper - Vpole) * i / 40.0;
        const double inv = free_radial_scattering_length(V, 0.1).inverse;
        CHECK(inv > prev);
        CHECK(inv < 0);
        prev = inv;
    }
}

TEST_CASE("energy-dependent scattering length")
{
    const double V0 = calibrate_depth(1.4603, 0.1);
    const GaussianPotential pot{V0, 0.1};
    for (double E : {0.01, 0.5, 1.0, 3.0}) {
        const double got = energy_scattering_length(pot, E).inverse;
        CHECK(got == doctest::Approx(-oracle::k_cot_delta(V0, 0.1, E)).epsilon(1e-8));
    }
    // continuous through zero energy
    const double z = energy_scattering_length(pot, 0.0).inverse;
    CHECK(energy_scattering_length(pot, 1e-7).inverse == doctest::Approx(z).epsilon(1e-6));
    CHECK(energy_scattering_length(pot, -1e-7).inverse == doctest::Approx(z).epsilon(1e-6));
    // below threshold a pole of the amplitude sits where 1/a(E) = kappa
    const double Eb = oracle::radial_bound_energy(V0, 0.1);
    CHECK(energy_scattering_length(pot, Eb).inverse == doctest::Approx(std::sqrt(-2 * Eb)).epsilon(1e-7));
}

TEST_CASE("coupling matrix")
{
    const double V0 = calibrate_depth(1.4603, 0.1);
    const GaussianPotential pot{V0, 0.1};
    const auto cs = enumerate_channels(20, 1.0);

    auto far = coupling_matrix(20 * 0.1, cs, pot, 1.0);
    CHECK(far.entries.cwiseAbs().maxCoeff() == 0.0);

    auto W0 = coupling_matrix(0.0, cs, pot, 1.0);
    const double g = 0.1 / std::sqrt(1 + 0.01);
    CHECK(W0.entries(0, 0) == doctest::Approx(-V0 * g * g).epsilon(1e-14));
    CHECK((W0.entries - W0.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);

    for (double z : {0.03, 0.1, 0.25}) {
        auto Wz = coupling_matrix(z, cs, pot, 1.0);
        const double e = std::exp(-z * z / 0.01);
        CHECK((Wz.entries - e * W0.entries).cwiseAbs().maxCoeff() <= 1e-15 * W0.entries.cwiseAbs().maxCoeff());
        CHECK((Wz.entries - Wz.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }

    // full product-state matrix element without the separable shortcut
    auto c4 = enumerate_channels(4, 1.05);
    REQUIRE(c4.size() == 6);
    auto W = coupling_matrix(0.05, c4, pot, 1.05);
    double worst = 0.0;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) {
            const double ref = oracle::coupling_2d(c4[i].n1, c4[i].n2, c4[j].n1, c4[j].n2, 0.05, V0, 0.1, 1.05);
            worst = std::max(worst, std::abs(W.entries(i, j) - ref));
        }
    CHECK(worst < 1e-10 * W.entries.cwiseAbs().maxCoeff());
}

TEST_CASE("calibration records")
{
    auto r = calibration_record(1.4603, 0.1);
    CHECK(r.bound_count == 1);
    CHECK(r.a_s == doctest::Approx(1 / 1.4603).epsilon(1e-6));
    CHECK(calibration_csv_header() == "target_ratio,V0,a_s,bound_count");
    CHECK(calibration_csv_row(r).find(",1") != std::string::npos);
}
