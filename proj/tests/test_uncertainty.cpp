#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "helios/rng.hpp"
#include "helios/uncertainty.hpp"

using namespace helios;

TEST_CASE("derived streams are reproducible") {
    RngStream a = derive_stream(1234, 5, 77);
    RngStream b = derive_stream(1234, 5, 77);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct triples give distinct streams") {
    RngStream base = derive_stream(9, 0, 0);
    RngStream env = derive_stream(9, 1, 0);
    RngStream episode = derive_stream(9, 0, 1);
    RngStream domain = derive_stream(9, 0, 0, 1);
    const std::uint64_t x = base.next_u64();
    CHECK(x != env.next_u64());
    CHECK(x != episode.next_u64());
    CHECK(x != domain.next_u64());
}

TEST_CASE("parallel streams pass an independence sanity check") {
    RngStream a = derive_stream(2024, 0, 0);
    RngStream b = derive_stream(2024, 1, 0);
    const int n = 10000;
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.uniform01();
        const double y = b.uniform01();
        sa += x; sb += y; saa += x * x; sbb += y * y; sab += x * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - sa / n * sa / n) *
                                        (sbb / n - sb / n * sb / n));
    CHECK(std::abs(corr) < 0.02);
}

TEST_CASE("uniform01 stays in [0, 1)") {
    RngStream s(5);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("gaussian sampler moments at n = 1e6") {
    RngStream s(17);
    const int n = 1000000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
        const double x = s.gaussian();
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    CHECK(std::abs(mean) < 3.0 / std::sqrt(double(n)));
    CHECK(std::abs(var - 1.0) < 0.01);
}

TEST_CASE("state noise reproduces the configured sigmas") {
    RngStream s(23);
    const double sigma_r = 1.0, sigma_v = 0.05;
    const int n = 1000000;
    Eigen::Vector3d r_sq = Eigen::Vector3d::Zero(), v_sq = Eigen::Vector3d::Zero();
    Eigen::Vector3d r_sum = Eigen::Vector3d::Zero();
    for (int i = 0; i < n; ++i) {
        const StateNoise noise = sample_state_noise(s, sigma_r, sigma_v);
        r_sum += noise.dr;
        r_sq += noise.dr.cwiseAbs2();
        v_sq += noise.dv.cwiseAbs2();
    }
    for (int i = 0; i < 3; ++i) {
        CHECK(std::abs(r_sum[i] / n) < 3.0 * sigma_r / std::sqrt(double(n)));
        CHECK(std::abs(r_sq[i] / n - sigma_r * sigma_r) < 0.01 * sigma_r * sigma_r);
        CHECK(std::abs(v_sq[i] / n - sigma_v * sigma_v) < 0.01 * sigma_v * sigma_v);
    }
}

TEST_CASE("zero sigmas produce zero noise") {
    RngStream s(1);
    const StateNoise noise = sample_state_noise(s, 0.0, 0.0);
    CHECK(noise.dr.isZero(0.0));
    CHECK(noise.dv.isZero(0.0));
}

TEST_CASE("small-angle rotation matrix") {
    CHECK(small_angle_rotation(0, 0, 0).isIdentity(0.0));

    const Eigen::Matrix3d a = small_angle_rotation(0, 0, 0.01);
    CHECK(a(0, 0) == 1.0);
    CHECK(a(0, 1) == -0.01);
    CHECK(a(0, 2) == 0.0);
    CHECK(a(1, 0) == 0.01);
    CHECK(a(1, 1) == 1.0);
    CHECK(a(2, 2) == 1.0);

    RngStream s(2);
    for (int i = 0; i < 50; ++i) {
        const Eigen::Matrix3d m = small_angle_rotation(
            s.gaussian(), s.gaussian(), s.gaussian());
        const Eigen::Matrix3d skew = m - Eigen::Matrix3d::Identity();
        CHECK((skew + skew.transpose()).isZero(0.0));
    }
}

TEST_CASE("control execution with zero sigmas is exact") {
    RngStream s(3);
    const Vec3 a(0.1, -0.2, 0.05);
    CHECK(control_execution(a, s, ControlSigmas{}) == a);
}

TEST_CASE("control execution of a zero command is zero") {
    RngStream s(4);
    ControlSigmas sig{0.017, 0.017, 0.017, 0.05};
    CHECK(control_execution(Vec3::Zero(), s, sig).isZero(0.0));
}

TEST_CASE("control execution preserves expected magnitude to first order") {
    // du is zero-mean and the small rotation perturbs direction at second
    // order, so E[|u|] / |a| stays near 1.
    RngStream s(31);
    constexpr double deg = M_PI / 180.0;
    const ControlSigmas sig{1.0 * deg, 1.0 * deg, 1.0 * deg, 0.05};
    const Vec3 a(0.3, -0.1, 0.2);
    const int n = 1000000;
    double mag = 0.0;
    for (int i = 0; i < n; ++i) mag += control_execution(a, s, sig).norm();
    CHECK(std::abs(mag / n / a.norm() - 1.0) < 0.005);
}

TEST_CASE("mte schedule without persistence blocks exactly one step") {
    RngStream s(6);
    for (int i = 0; i < 200; ++i) {
        const MteSchedule m = mte_schedule(s, 40, 0.0, 3, true);
        CHECK(m.duration == 1);
        CHECK(m.blocked.size() == 1);
        CHECK(m.blocked[0] >= 0);
        CHECK(m.blocked[0] < 40);
        CHECK(m.blocks(m.blocked[0]));
    }
}

TEST_CASE("mte duration follows the truncated geometric law") {
    // p = 0.1, cap 3: P(1) = 0.9, P(2) = 0.09, P(3) = 0.01, mean 1.11.
    RngStream s(8);
    const int n = 100000;
    int counts[4] = {0, 0, 0, 0};
    double mean = 0.0;
    for (int i = 0; i < n; ++i) {
        const MteSchedule m = mte_schedule(s, 40, 0.1, 3, true);
        REQUIRE(m.duration >= 1);
        REQUIRE(m.duration <= 3);
        ++counts[m.duration];
        mean += m.duration;
    }
    const double expected[4] = {0.0, 0.9 * n, 0.09 * n, 0.01 * n};
    double chi2 = 0.0;
    for (int d = 1; d <= 3; ++d) {
        chi2 += (counts[d] - expected[d]) * (counts[d] - expected[d]) / expected[d];
    }
    CHECK(chi2 < 13.82);  // chi-square 0.999 quantile, 2 dof
    CHECK(std::abs(mean / n - 1.11) < 0.01);
}

TEST_CASE("mte start is uniform over the horizon") {
    RngStream s(9);
    const int n = 100000, N = 40;
    std::vector<int> counts(N, 0);
    for (int i = 0; i < n; ++i) ++counts[size_t(mte_schedule(s, N, 0.1, 3, true).start)];
    const double expected = double(n) / N;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - expected) * (c - expected) / expected;
    CHECK(chi2 < 78.0);  // chi-square ~0.999 quantile, 39 dof
}

TEST_CASE("optional mte occurrence when not forced") {
    RngStream s(10);
    int occurred = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        if (!mte_schedule(s, 40, 0.1, 3, false).empty()) ++occurred;
    }
    CHECK(std::abs(double(occurred) / n - 0.1) < 0.01);
}

TEST_CASE("mode labels round-trip") {
    for (auto mode : {UncertaintyMode::kUnperturbed, UncertaintyMode::kState,
                      UncertaintyMode::kObservation, UncertaintyMode::kControl,
                      UncertaintyMode::kSingleMte, UncertaintyMode::kMultiMte}) {
        CHECK(parse_mode(to_string(mode)) == mode);
    }
    CHECK_THROWS_AS(parse_mode("bogus"), std::invalid_argument);
}

TEST_CASE("uncertainty configuration defaults") {
    const UncertaintyConfig u;
    CHECK(u.sigma_r_km == 1.0);
    CHECK(u.sigma_v_kms == 0.05);
    CHECK(u.sigma_phi_deg == 1.0);
    CHECK(u.sigma_theta_deg == 1.0);
    CHECK(u.sigma_psi_deg == 1.0);
    CHECK(u.sigma_u == 0.05);
    CHECK(u.p_mte == 0.1);
    CHECK(u.n_mte == 3);
    CHECK(u.force_one_mte);
    CHECK_FALSE(u.mte_recurrence);

    UncertaintyConfig bad;
    bad.p_mte = 1.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
    bad = UncertaintyConfig{};
    bad.sigma_u = -0.1;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}
