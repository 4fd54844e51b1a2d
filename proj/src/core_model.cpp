#include "simcav/core_model.hpp"

#include "simcav/errors.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace simcav {

namespace {

static_assert(std::numeric_limits<long double>::digits >= 64,
              "identity_tan_forms needs an extended-precision long double");

void require_finite(double value, const char* name) {
    if (!std::isfinite(value)) {
        throw InvalidArgument(std::string(name) + " must be finite");
    }
}

void require_profile_value(double f_value) {
    if (!std::isfinite(f_value) || f_value < 0.0) {
        throw InvalidArgument("mode function value must be finite and non-negative");
    }
}

}  // namespace

SystemParams::SystemParams(double mass, double detuning, double field_freq, double coupling, int photon_n)
    : mass_(mass), detuning_(detuning), field_freq_(field_freq), coupling_(coupling), photon_n_(photon_n) {
    require_finite(mass, "mass");
    require_finite(detuning, "detuning");
    require_finite(field_freq, "field-freq");
    require_finite(coupling, "coupling");
    if (mass <= 0.0) throw InvalidArgument("mass must be > 0");
    if (coupling <= 0.0) throw InvalidArgument("coupling must be > 0");
    if (field_freq < 0.0) throw InvalidArgument("field-freq must be >= 0");
    if (photon_n < 0) throw InvalidArgument("photon-n must be >= 0");
}

double SystemParams::sector_offset() const noexcept {
    return field_freq_ * (photon_n_ + 0.5);
}

double SystemParams::sector_coupling(double f_value) const noexcept {
    return coupling_ * f_value * std::sqrt(static_cast<double>(photon_n_) + 1.0);
}

SystemParams SystemParams::with_photon_n(int n) const {
    return {mass_, detuning_, field_freq_, coupling_, n};
}
SystemParams SystemParams::with_detuning(double detuning) const {
    return {mass_, detuning, field_freq_, coupling_, photon_n_};
}
SystemParams SystemParams::with_mass(double mass) const {
    return {mass, detuning_, field_freq_, coupling_, photon_n_};
}
SystemParams SystemParams::with_coupling(double coupling) const {
    return {mass_, detuning_, field_freq_, coupling, photon_n_};
}
SystemParams SystemParams::with_field_freq(double field_freq) const {
    return {mass_, detuning_, field_freq, coupling_, photon_n_};
}

// ---------------------------------------------------------------------------

std::string_view to_string(ProfileKind kind) noexcept {
    switch (kind) {
        case ProfileKind::Mesa: return "mesa";
        case ProfileKind::SineSquared: return "sine-squared";
        case ProfileKind::Gaussian: return "gaussian";
        case ProfileKind::Zero: return "zero";
    }
    return "unknown";
}

ProfileKind profile_kind_from_string(std::string_view name) {
    if (name == "mesa") return ProfileKind::Mesa;
    if (name == "sine-squared") return ProfileKind::SineSquared;
    if (name == "gaussian") return ProfileKind::Gaussian;
    if (name == "zero") return ProfileKind::Zero;
    throw InvalidArgument("unknown profile kind '" + std::string(name) + "'");
}

ModeProfile::ModeProfile(ProfileKind kind, double z_on, double z_off, double width, int half_periods)
    : kind_(kind), z_on_(z_on), z_off_(z_off), width_(width), half_periods_(half_periods) {
    if (std::isnan(z_on) || std::isnan(z_off) || !(z_on < z_off)) {
        throw InvalidArgument("profile support requires z-on < z-off");
    }
    if (kind != ProfileKind::Mesa && !(std::isfinite(z_on) && std::isfinite(z_off))) {
        throw InvalidArgument("profile support must be finite");
    }
    if (kind == ProfileKind::Gaussian && !(std::isfinite(width) && width > 0.0)) {
        throw InvalidArgument("gaussian profile width must be > 0");
    }
    if (kind == ProfileKind::SineSquared && half_periods < 1) {
        throw InvalidArgument("sine-squared profile needs half-periods >= 1");
    }
}

ModeProfile ModeProfile::mesa() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    return {ProfileKind::Mesa, -inf, inf, 0.0, 0};
}
ModeProfile ModeProfile::mesa(double z_on, double z_off) {
    return {ProfileKind::Mesa, z_on, z_off, 0.0, 0};
}
ModeProfile ModeProfile::zero(double z_on, double z_off) {
    return {ProfileKind::Zero, z_on, z_off, 0.0, 0};
}
ModeProfile ModeProfile::sine_squared(double z_on, double z_off, int half_periods) {
    return {ProfileKind::SineSquared, z_on, z_off, 0.0, half_periods};
}
ModeProfile ModeProfile::gaussian(double z_on, double z_off, double width) {
    return {ProfileKind::Gaussian, z_on, z_off, width, 0};
}

double ModeProfile::value(double z) const noexcept {
    switch (kind_) {
        case ProfileKind::Mesa: return 1.0;
        case ProfileKind::Zero: return 0.0;
        case ProfileKind::SineSquared: {
            if (z <= z_on_ || z >= z_off_) return 0.0;
            const double s = std::sin(half_periods_ * std::numbers::pi * (z - z_on_) / (z_off_ - z_on_));
            return s * s;
        }
        case ProfileKind::Gaussian: {
            const double u = (z - 0.5 * (z_on_ + z_off_)) / width_;
            return std::exp(-0.5 * u * u);
        }
    }
    return 0.0;
}

double ModeProfile::slope(double z) const noexcept {
    switch (kind_) {
        case ProfileKind::Mesa:
        case ProfileKind::Zero: return 0.0;
        case ProfileKind::SineSquared: {
            if (z <= z_on_ || z >= z_off_) return 0.0;
            const double k = half_periods_ * std::numbers::pi / (z_off_ - z_on_);
            return k * std::sin(2.0 * k * (z - z_on_));
        }
        case ProfileKind::Gaussian: {
            const double d = z - 0.5 * (z_on_ + z_off_);
            return -d / (width_ * width_) * value(z);
        }
    }
    return 0.0;
}

double ModeProfile::curvature(double z) const noexcept {
    switch (kind_) {
        case ProfileKind::Mesa:
        case ProfileKind::Zero: return 0.0;
        case ProfileKind::SineSquared: {
            if (z <= z_on_ || z >= z_off_) return 0.0;
            const double k = half_periods_ * std::numbers::pi / (z_off_ - z_on_);
            return 2.0 * k * k * std::cos(2.0 * k * (z - z_on_));
        }
        case ProfileKind::Gaussian: {
            const double w2 = width_ * width_;
            const double d = z - 0.5 * (z_on_ + z_off_);
            return (d * d / (w2 * w2) - 1.0 / w2) * value(z);
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------

double rabi_radical(const SystemParams& params, double f_value) {
    require_profile_value(f_value);
    return std::hypot(0.5 * params.detuning(), params.sector_coupling(f_value));
}

DressedEnergies eigenvalues(const SystemParams& params, double f_value) {
    const double r = rabi_radical(params, f_value);
    const double c = params.sector_offset();
    return {c + r, c - r};
}

double mixing_angle(const SystemParams& params, double f_value) {
    const double g = params.sector_coupling(f_value);
    if (rabi_radical(params, f_value) == 0.0) {
        throw DegenerateFrame("mixing angle undefined: detuning and coupling both vanish");
    }
    return 0.5 * std::atan2(g, -0.5 * params.detuning());
}

TanForms identity_tan_forms(const SystemParams& params, double f_value) {
    require_profile_value(f_value);
    const long double half_detuning = 0.5L * params.detuning();
    const long double g = static_cast<long double>(params.coupling()) * f_value *
                          std::sqrt(static_cast<long double>(params.photon_n()) + 1.0L);
    if (!(g > 0.0L)) {
        throw DegenerateFrame("tan(theta) forms need a non-zero coupling");
    }
    const long double r = std::sqrt(half_detuning * half_detuning + g * g);
    const long double lower = r - half_detuning;
    if (lower == 0.0L) {
        throw DegenerateFrame("tan(theta) difference form has a vanishing denominator");
    }
    return {static_cast<double>(g / lower), static_cast<double>((r + half_detuning) / g)};
}

DoubleAngle double_angle(const SystemParams& params, double f_value) {
    const double r = rabi_radical(params, f_value);
    if (r == 0.0) {
        throw DegenerateFrame("double angle undefined: detuning and coupling both vanish");
    }
    const double c2 = -0.5 * params.detuning() / r;
    const double s2 = params.sector_coupling(f_value) / r;
    double t2;
    if (c2 == 0.0) {
        t2 = std::copysign(std::numeric_limits<double>::infinity(), s2);
    } else {
        t2 = params.sector_coupling(f_value) / (-0.5 * params.detuning());
    }
    return {c2, s2, t2};
}

// ---------------------------------------------------------------------------

DressedFrame::DressedFrame(SystemParams params, ModeProfile profile)
    : params_(std::move(params)), profile_(std::move(profile)) {}

void DressedFrame::require_defined(double radical, double z) const {
    if (radical == 0.0) {
        throw DegenerateFrame("dressed frame undefined at z = " + std::to_string(z) +
                              " (zero detuning and f(z) = 0)");
    }
}

double DressedFrame::radical(double z) const {
    return rabi_radical(params_, profile_.value(z));
}

double DressedFrame::theta(double z) const {
    const double f = profile_.value(z);
    require_defined(rabi_radical(params_, f), z);
    return mixing_angle(params_, f);
}

Rotation DressedFrame::rotation(double z) const {
    const double t = theta(z);
    return {std::cos(t), std::sin(t)};
}

DressedEnergies DressedFrame::potentials(double z) const {
    return eigenvalues(params_, profile_.value(z));
}

double DressedFrame::dtheta_dz(double z) const {
    const double r = radical(z);
    require_defined(r, z);
    if (profile_.is_uniform()) return 0.0;
    const double g1 = params_.sector_coupling(profile_.slope(z));
    return -0.25 * params_.detuning() * g1 / (r * r);
}

double DressedFrame::d2theta_dz2(double z) const {
    const double r = radical(z);
    require_defined(r, z);
    if (profile_.is_uniform()) return 0.0;
    const double g = params_.sector_coupling(profile_.value(z));
    const double g1 = params_.sector_coupling(profile_.slope(z));
    const double g2 = params_.sector_coupling(profile_.curvature(z));
    const double r2 = r * r;
    return -0.25 * params_.detuning() * (g2 * r2 - 2.0 * g * g1 * g1) / (r2 * r2);
}

}  // namespace simcav
