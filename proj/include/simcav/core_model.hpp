#pragma once

// Closed-form dressed-state algebra for one excitation sector of the
// Jaynes-Cummings interaction: the sector {|n,e>, |n+1,g>} is rotated by the
// mixing angle theta_n(z) into the dressed pair
//
//   |Phi+> = cos(theta)|n+1,g> + sin(theta)|n,e>
//   |Phi-> = -sin(theta)|n+1,g> + cos(theta)|n,e>
//
// with energies V+-(z) = omega (n + 1/2) +- R(z),
// R(z) = sqrt(Delta^2/4 + lambda^2 f(z)^2 (n+1)).
//
// Units: hbar = 1. Nothing here rescales; configurations conventionally
// measure frequencies in units of the coupling lambda.

#include <string_view>

namespace simcav {

class SystemParams {
public:
    // Throws InvalidArgument unless mass > 0, coupling > 0, field_freq >= 0,
    // photon_n >= 0 and every value is finite.
    SystemParams(double mass, double detuning, double field_freq, double coupling, int photon_n);

    double mass() const noexcept { return mass_; }
    double detuning() const noexcept { return detuning_; }
    double field_freq() const noexcept { return field_freq_; }
    double coupling() const noexcept { return coupling_; }
    int photon_n() const noexcept { return photon_n_; }

    // omega (n + 1/2): the sector's bare centre energy.
    double sector_offset() const noexcept;
    // lambda f sqrt(n+1): the off-diagonal element of the sector Hamiltonian.
    double sector_coupling(double f_value) const noexcept;

    SystemParams with_photon_n(int n) const;
    SystemParams with_detuning(double detuning) const;
    SystemParams with_mass(double mass) const;
    SystemParams with_coupling(double coupling) const;
    SystemParams with_field_freq(double field_freq) const;

private:
    double mass_;
    double detuning_;
    double field_freq_;
    double coupling_;
    int photon_n_;
};

enum class ProfileKind { Mesa, SineSquared, Gaussian, Zero };

std::string_view to_string(ProfileKind kind) noexcept;
ProfileKind profile_kind_from_string(std::string_view name);

// Cavity mode function f(z) with analytic first and second derivatives.
//
// Mesa is the constant f = 1 everywhere; its support interval only matters
// for region bookkeeping. SineSquared is sin^2 over `half_periods` humps
// inside [z_on, z_off] and zero outside (C1 at the edges). Gaussian is centred
// on the midpoint of the support with standard width `width` and extends
// over the whole line.
class ModeProfile {
public:
    static ModeProfile mesa();
    static ModeProfile mesa(double z_on, double z_off);
    static ModeProfile zero(double z_on, double z_off);
    static ModeProfile sine_squared(double z_on, double z_off, int half_periods);
    static ModeProfile gaussian(double z_on, double z_off, double width);

    ProfileKind kind() const noexcept { return kind_; }
    double z_on() const noexcept { return z_on_; }
    double z_off() const noexcept { return z_off_; }
    double width() const noexcept { return width_; }
    int half_periods() const noexcept { return half_periods_; }

    double value(double z) const noexcept;
    double slope(double z) const noexcept;
    double curvature(double z) const noexcept;

    // f' and f'' vanish identically.
    bool is_uniform() const noexcept { return kind_ == ProfileKind::Mesa || kind_ == ProfileKind::Zero; }
    // The coupling is confined (up to Gaussian tails) to [z_on, z_off].
    bool is_compact() const noexcept { return kind_ != ProfileKind::Mesa; }

private:
    ModeProfile(ProfileKind kind, double z_on, double z_off, double width, int half_periods);

    ProfileKind kind_;
    double z_on_;
    double z_off_;
    double width_;
    int half_periods_;
};

struct DressedEnergies {
    double plus;
    double minus;
};

struct DoubleAngle {
    double cos2;
    double sin2;
    double tan2;  // +-infinity (sign of sin2) when cos2 == 0
};

struct TanForms {
    double via_difference;  // lambda f sqrt(n+1) / (R - Delta/2)
    double via_sum;         // (R + Delta/2) / (lambda f sqrt(n+1))
};

// R = sqrt(Delta^2/4 + lambda^2 f^2 (n+1)). Requires f_value >= 0.
double rabi_radical(const SystemParams& params, double f_value);

// (E+, E-) = omega(n+1/2) +- R.
DressedEnergies eigenvalues(const SystemParams& params, double f_value);

// theta = atan2(lambda f sqrt(n+1), -Delta/2) / 2, in [0, pi/2].
// Throws DegenerateFrame when R == 0.
double mixing_angle(const SystemParams& params, double f_value);

// Both literal closed forms for tan(theta), evaluated in extended precision
// so that the ill-conditioned one still carries ~13 significant digits for
// |Delta| / lambda up to 1e3. Throws DegenerateFrame unless lambda f sqrt(n+1) > 0.
TanForms identity_tan_forms(const SystemParams& params, double f_value);

// cos 2theta = (-Delta/2)/R, sin 2theta = lambda f sqrt(n+1)/R.
DoubleAngle double_angle(const SystemParams& params, double f_value);

struct Rotation {
    double cos_theta;
    double sin_theta;
};

// Dressed frame of one sector along the cavity axis. Immutable; safe to share
// between threads.
class DressedFrame {
public:
    DressedFrame(SystemParams params, ModeProfile profile);

    const SystemParams& params() const noexcept { return params_; }
    const ModeProfile& profile() const noexcept { return profile_; }

    double theta(double z) const;
    Rotation rotation(double z) const;
    DressedEnergies potentials(double z) const;
    double radical(double z) const;

    // d(theta)/dz = -(Delta/4) g' / R^2 with g = lambda sqrt(n+1) f.
    double dtheta_dz(double z) const;
    double d2theta_dz2(double z) const;

private:
    void require_defined(double radical, double z) const;

    SystemParams params_;
    ModeProfile profile_;
};

inline double dtheta_dz(const DressedFrame& frame, double z) { return frame.dtheta_dz(z); }
inline double d2theta_dz2(const DressedFrame& frame, double z) { return frame.d2theta_dz2(z); }

}  // namespace simcav
