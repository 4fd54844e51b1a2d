#include "simcav/core_model.hpp"
#include "simcav/errors.hpp"

#include <catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace simcav;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SystemParams params(double detuning, double coupling, int n, double omega = 0.0) {
    return SystemParams(1.0, detuning, omega, coupling, n);
}

// Upper eigenvector of the real sector matrix, read back as an angle.
double eigen_mixing_angle(double detuning, double g) {
    Eigen::Matrix2d h;
    h << detuning / 2, g, g, -detuning / 2;
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(h);
    Eigen::Vector2d v = es.eigenvectors().col(1);
    if (v(1) < 0 || (v(1) == 0 && v(0) < 0)) v = -v;
    return std::atan2(v(0), v(1));
}

double central_first(auto&& fn, double z, double h) { return (fn(z + h) - fn(z - h)) / (2 * h); }
double central_second(auto&& fn, double z, double h) { return (fn(z + h) - 2 * fn(z) + fn(z - h)) / (h * h); }

}  // namespace

TEST_CASE("system params reject unphysical values") {
    CHECK_THROWS_AS(SystemParams(0.0, 0.0, 0.0, 1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(SystemParams(1.0, 0.0, 0.0, -1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(SystemParams(1.0, 0.0, -1.0, 1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(SystemParams(1.0, 0.0, 0.0, 1.0, -1), InvalidArgument);
    CHECK_THROWS_AS(SystemParams(1.0, std::nan(""), 0.0, 1.0, 0), InvalidArgument);
    CHECK_NOTHROW(SystemParams(1.0, -3.0, 0.0, 1.0, 0));
}

TEST_CASE("rabi radical examples") {
    CHECK_THAT(rabi_radical(params(0.0, 0.1, 0), 1.0), WithinRel(0.1, 1e-15));
    CHECK_THAT(rabi_radical(params(0.4, 0.3, 0), 1.0), WithinRel(std::sqrt(0.13), 1e-15));
    CHECK_THAT(rabi_radical(params(0.4, 0.3, 7), 0.0), WithinRel(0.2, 1e-15));
    CHECK_THAT(rabi_radical(params(-0.4, 0.3, 7), 0.0), WithinRel(0.2, 1e-15));
    CHECK_THROWS_AS(rabi_radical(params(0.4, 0.3, 0), -0.1), InvalidArgument);
}

TEST_CASE("eigenvalue examples") {
    auto e = eigenvalues(params(0.0, 0.1, 0, 1.0), 1.0);
    CHECK_THAT(e.plus, WithinAbs(0.6, 1e-15));
    CHECK_THAT(e.minus, WithinAbs(0.4, 1e-15));
    e = eigenvalues(params(0.4, 0.3, 0, 1.0), 1.0);
    CHECK_THAT(e.plus, WithinAbs(0.5 + std::sqrt(0.13), 1e-15));
    CHECK_THAT(e.minus, WithinAbs(0.5 - std::sqrt(0.13), 1e-15));
    e = eigenvalues(params(0.4, 0.3, 0, 1.0), 0.0);
    CHECK_THAT(e.plus, WithinAbs(0.7, 1e-15));
    CHECK_THAT(e.minus, WithinAbs(0.3, 1e-15));
}

TEST_CASE("mixing angle examples") {
    CHECK_THAT(mixing_angle(params(0.0, 0.37, 2), 0.8), WithinAbs(std::numbers::pi / 4, 1e-15));
    CHECK_THAT(std::tan(mixing_angle(params(2.0, 1.0, 0), 1.0)), WithinRel(std::sqrt(2.0) + 1, 1e-14));
    const double theta = mixing_angle(params(1e4, 1.0, 0), 1.0);
    CHECK(std::abs(theta - std::numbers::pi / 2) < 2e-4);
    CHECK(theta < std::numbers::pi / 2);
    CHECK_THAT(mixing_angle(params(-1e4, 1.0, 0), 1.0), WithinAbs(0.0, 2e-4));
    CHECK_THROWS_AS(mixing_angle(params(0.0, 1.0, 0), 0.0), DegenerateFrame);
    CHECK_THAT(mixing_angle(params(0.5, 1.0, 0), 0.0), WithinAbs(std::numbers::pi / 2, 0.0));
    CHECK_THAT(mixing_angle(params(-0.5, 1.0, 0), 0.0), WithinAbs(0.0, 0.0));
}

TEST_CASE("tan forms examples") {
    auto t = identity_tan_forms(params(2.0, 1.0, 0), 1.0);
    CHECK_THAT(t.via_difference, WithinRel(std::sqrt(2.0) + 1, 1e-15));
    CHECK_THAT(t.via_sum, WithinRel(std::sqrt(2.0) + 1, 1e-15));
    t = identity_tan_forms(params(0.0, 0.7, 4), 1.0);
    CHECK_THAT(t.via_difference, WithinRel(1.0, 1e-15));
    CHECK_THAT(t.via_sum, WithinRel(1.0, 1e-15));
    t = identity_tan_forms(params(-2.0, 1.0, 0), 1.0);
    CHECK_THAT(t.via_difference, WithinRel(std::sqrt(2.0) - 1, 1e-14));
    CHECK_THAT(t.via_sum, WithinRel(std::sqrt(2.0) - 1, 1e-14));
    CHECK_THROWS_AS(identity_tan_forms(params(1.0, 1.0, 0), 0.0), DegenerateFrame);
}

TEST_CASE("double angle examples") {
    auto d = double_angle(params(0.0, 0.3, 0), 1.0);
    CHECK(d.cos2 == 0.0);
    CHECK_THAT(d.sin2, WithinAbs(1.0, 1e-15));
    CHECK(std::isinf(d.tan2));
    CHECK(d.tan2 > 0);
    d = double_angle(params(0.4, 0.3, 0), 1.0);
    CHECK_THAT(d.cos2, WithinAbs(-0.2 / std::sqrt(0.13), 1e-15));
    CHECK_THAT(d.sin2, WithinAbs(0.3 / std::sqrt(0.13), 1e-15));
    CHECK_THAT(d.cos2, WithinAbs(-0.5547002, 1e-7));
    CHECK_THAT(d.sin2, WithinAbs(0.8320503, 1e-7));
    CHECK_THAT(d.tan2, WithinRel(-1.5, 1e-14));
    d = double_angle(params(0.4, 0.3, 0), 0.0);
    CHECK(d.cos2 == -1.0);
    CHECK(d.sin2 == 0.0);
}

TEST_CASE("mixing angle agrees with eigenvector of the sector matrix") {
    std::mt19937_64 rng(20240611);
    std::uniform_real_distribution<double> log_ratio(-3.0, 3.0);
    std::uniform_int_distribution<int> photons(0, 50);
    std::uniform_real_distribution<double> fval(0.05, 1.0);
    for (int trial = 0; trial < 2000; ++trial) {
        const double lambda = 0.5;
        const double sign = trial % 2 ? 1.0 : -1.0;
        const double detuning = sign * lambda * std::pow(10.0, log_ratio(rng));
        const int n = photons(rng);
        const double f = fval(rng);
        const SystemParams p = params(detuning, lambda, n);
        const double g = p.sector_coupling(f);
        CHECK_THAT(mixing_angle(p, f), WithinAbs(eigen_mixing_angle(detuning, g), 1e-12));
    }
}

TEST_CASE("closed-form identities hold at random points") {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> log_ratio(-3.0, 3.0);
    std::uniform_int_distribution<int> photons(0, 50);
    for (int trial = 0; trial < 2000; ++trial) {
        const double sign = trial % 2 ? 1.0 : -1.0;
        const SystemParams p = params(sign * std::pow(10.0, log_ratio(rng)), 1.0, photons(rng));
        const auto t = identity_tan_forms(p, 1.0);
        CHECK_THAT(t.via_difference, WithinRel(t.via_sum, 1e-12));
        const auto d = double_angle(p, 1.0);
        CHECK_THAT(d.cos2 * d.cos2 + d.sin2 * d.sin2, WithinAbs(1.0, 1e-14));
        const double theta = mixing_angle(p, 1.0);
        CHECK_THAT(std::cos(2 * theta), WithinAbs(d.cos2, 1e-12));
        CHECK_THAT(std::sin(2 * theta), WithinAbs(d.sin2, 1e-12));
        CHECK(theta >= 0.0);
        CHECK(theta <= std::numbers::pi / 2);
        const auto e = eigenvalues(p, 1.0);
        CHECK_THAT(e.plus - e.minus, WithinRel(2 * rabi_radical(p, 1.0), 1e-15));
    }
}

TEST_CASE("mixing angle is monotone in detuning") {
    double prev = -1.0;
    for (double d = -50.0; d <= 50.0; d += 0.25) {
        const double theta = mixing_angle(params(d, 1.0, 2), 0.6);
        CHECK(theta > prev);
        prev = theta;
    }
}

TEST_CASE("profiles: values and analytic derivatives") {
    const auto mesa = ModeProfile::mesa();
    CHECK(mesa.value(-1e6) == 1.0);
    CHECK(mesa.slope(3.0) == 0.0);
    CHECK(mesa.curvature(3.0) == 0.0);
    CHECK(mesa.is_uniform());
    CHECK_FALSE(mesa.is_compact());

    const auto zero = ModeProfile::zero(-5, 5);
    CHECK(zero.value(0.0) == 0.0);
    CHECK(zero.is_uniform());

    const auto sine = ModeProfile::sine_squared(-4.0, 6.0, 2);
    CHECK_THAT(sine.value(-1.5), WithinAbs(1.0, 1e-15));
    CHECK(sine.value(-4.5) == 0.0);
    CHECK(sine.value(6.5) == 0.0);
    CHECK_THAT(sine.value(1.0), WithinAbs(0.0, 1e-15));

    const auto gauss = ModeProfile::gaussian(-10.0, 10.0, 2.0);
    CHECK(gauss.value(0.0) == 1.0);
    CHECK_THAT(gauss.value(2.0), WithinRel(std::exp(-0.5), 1e-15));

    CHECK_THROWS_AS(ModeProfile::sine_squared(1.0, 1.0, 1), InvalidArgument);
    CHECK_THROWS_AS(ModeProfile::sine_squared(0.0, 1.0, 0), InvalidArgument);
    CHECK_THROWS_AS(ModeProfile::gaussian(0.0, 1.0, 0.0), InvalidArgument);
    CHECK(profile_kind_from_string("sine-squared") == ProfileKind::SineSquared);
    CHECK_THROWS_AS(profile_kind_from_string("box"), InvalidArgument);

    for (const auto& prof : {sine, gauss}) {
        for (double z : {-3.3, -1.0, 0.4, 2.7, 5.1}) {
            const auto f = [&](double x) { return prof.value(x); };
            const auto fp = [&](double x) { return prof.slope(x); };
            const double slope = prof.slope(z);
            const double curv = prof.curvature(z);
            CHECK_THAT(slope, WithinRel(central_first(f, z, 1e-5), 1e-6) || WithinAbs(central_first(f, z, 1e-5), 1e-10));
            CHECK_THAT(curv, WithinRel(central_first(fp, z, 1e-5), 1e-6) || WithinAbs(central_first(fp, z, 1e-5), 1e-10));
        }
    }
}

TEST_CASE("dtheta/dz vanishes for a mesa and at zero detuning") {
    const DressedFrame mesa(params(0.4, 0.3, 0), ModeProfile::mesa());
    const DressedFrame flat(params(0.0, 0.3, 0), ModeProfile::gaussian(-5, 5, 1.5));
    for (double z = -8.0; z <= 8.0; z += 0.37) {
        CHECK(dtheta_dz(mesa, z) == 0.0);
        CHECK(d2theta_dz2(mesa, z) == 0.0);
        CHECK(dtheta_dz(flat, z) == 0.0);
        CHECK(d2theta_dz2(flat, z) == 0.0);
        CHECK_THAT(flat.theta(z), WithinAbs(std::numbers::pi / 4, 1e-15));
    }
}

TEST_CASE("dtheta/dz matches finite differences of the mixing angle") {
    const SystemParams p = params(0.4, 0.3, 0);
    const ModeProfile gauss = ModeProfile::gaussian(-6.0, 6.0, 1.5);
    const DressedFrame frame(p, gauss);
    const auto theta = [&](double z) { return mixing_angle(p, gauss.value(z)); };
    const double inflection = 1.5;  // centre + width
    for (double z : {inflection, -inflection, 0.7, -2.9, 3.6}) {
        CHECK_THAT(dtheta_dz(frame, z), WithinRel(central_first(theta, z, 1e-5), 1e-6));
    }

    const SystemParams q = params(-0.8, 0.6, 3);
    const ModeProfile sine = ModeProfile::sine_squared(-5.0, 5.0, 1);
    const DressedFrame sframe(q, sine);
    const auto stheta = [&](double z) { return mixing_angle(q, sine.value(z)); };
    for (double z : {0.3, -1.7, 2.2, 3.9}) {
        CHECK_THAT(dtheta_dz(sframe, z), WithinRel(central_first(stheta, z, 1e-5), 1e-6));
        CHECK_THAT(d2theta_dz2(sframe, z), WithinRel(central_second(stheta, z, 1e-4), 1e-4));
    }
}

TEST_CASE("frame derivative relations hold for the dressed vectors") {
    // d/dz Phi+ = theta' Phi- and d/dz Phi- = -theta' Phi+ in (e, g) components.
    const DressedFrame frame(params(0.9, 0.5, 1), ModeProfile::gaussian(-6.0, 6.0, 2.0));
    const auto phi_plus = [&](double z) {
        const auto r = frame.rotation(z);
        return Eigen::Vector2d(r.sin_theta, r.cos_theta);
    };
    const auto phi_minus = [&](double z) {
        const auto r = frame.rotation(z);
        return Eigen::Vector2d(r.cos_theta, -r.sin_theta);
    };
    const double h = 1e-5;
    for (double z : {-2.5, -0.4, 1.1, 3.0}) {
        const Eigen::Vector2d dplus = (phi_plus(z + h) - phi_plus(z - h)) / (2 * h);
        const Eigen::Vector2d dminus = (phi_minus(z + h) - phi_minus(z - h)) / (2 * h);
        const double tp = frame.dtheta_dz(z);
        CHECK((dplus - tp * phi_minus(z)).norm() < 1e-8);
        CHECK((dminus + tp * phi_plus(z)).norm() < 1e-8);
    }
}

TEST_CASE("dressed frame potentials and degeneracy") {
    const DressedFrame frame(params(0.0, 1.0, 0, 1.0), ModeProfile::sine_squared(-2, 2, 1));
    CHECK_NOTHROW(frame.theta(0.0));
    CHECK_THROWS_AS(frame.theta(-3.0), DegenerateFrame);
    CHECK_THROWS_AS(frame.dtheta_dz(3.0), DegenerateFrame);
    const auto v = frame.potentials(0.0);
    CHECK_THAT(v.plus, WithinAbs(1.5, 1e-15));
    CHECK_THAT(v.minus, WithinAbs(-0.5, 1e-15));
}
