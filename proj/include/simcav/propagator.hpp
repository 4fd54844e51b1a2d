#pragma once

// Wavepacket propagation for one excitation sector on a uniform periodic grid.
//
// Two integrators:
//   * BareStepper: Strang split-operator in the bare basis (|n,e>, |n+1,g>).
//     Kinetic half steps are applied spectrally, the 2x2 potential step is the
//     exact closed-form exponential at every grid point. This is the reference.
//   * DressedStepper: Crank-Nicolson for the coupled dressed amplitudes
//     (C+, C-). Substituting psi = C+ Phi+(z) + C- Phi-(z) into the
//     Schroedinger equation with d/dz Phi+ = theta' Phi- and
//     d/dz Phi- = -theta' Phi+ gives
//
//       i dC+/dt = [-(1/2M) d2/dz2 + V+ + theta'^2/2M] C+ + (1/2M)(2 theta' d/dz + theta'') C-
//       i dC-/dt = [-(1/2M) d2/dz2 + V- + theta'^2/2M] C- - (1/2M)(2 theta' d/dz + theta'') C+
//
//     The cross operator is discretized as theta' D1 + D1 theta' (D1 the
//     antisymmetric sixth-order first-difference matrix), which equals
//     2 theta' d/dz + theta'' and keeps the discrete Hamiltonian symmetric.
//     Derivatives use sixth-order central stencils with zero Dirichlet data
//     outside the grid; the guard band keeps the packet away from the edges.

#include "simcav/banded.hpp"
#include "simcav/core_model.hpp"
#include "simcav/spectral.hpp"

#include <Eigen/Core>

#include <complex>
#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace simcav {

using cplx = std::complex<double>;

// Spatial grid plus time stepping. n_points is a power of two >= 64;
// dz = (z_max - z_min) / n_points with periodic identification of the ends.
class Grid {
public:
    Grid(double z_min, double z_max, std::size_t n_points, double dt, std::size_t n_steps);

    double z_min() const noexcept { return z_min_; }
    double z_max() const noexcept { return z_max_; }
    std::size_t n_points() const noexcept { return n_points_; }
    double dt() const noexcept { return dt_; }
    std::size_t n_steps() const noexcept { return n_steps_; }

    double dz() const noexcept { return (z_max_ - z_min_) / static_cast<double>(n_points_); }
    double z(std::size_t i) const noexcept { return z_min_ + static_cast<double>(i) * dz(); }
    double k_max() const noexcept;
    double duration() const noexcept { return dt_ * static_cast<double>(n_steps_); }

    Grid with_time(double dt, std::size_t n_steps) const { return {z_min_, z_max_, n_points_, dt, n_steps}; }

private:
    double z_min_;
    double z_max_;
    std::size_t n_points_;
    double dt_;
    std::size_t n_steps_;
};

enum class Basis { Bare, Dressed };

std::string_view to_string(Basis basis) noexcept;

// Two amplitude arrays on the grid. Bare: a = <z|n,e>, b = <z|n+1,g>.
// Dressed: a = C+(z), b = C-(z).
struct SpinorState {
    Basis basis = Basis::Bare;
    int sector = 0;
    std::vector<cplx> a;
    std::vector<cplx> b;
};

// Rectangle-rule norm sum(|a|^2 + |b|^2) dz.
double norm(const SpinorState& state, const Grid& grid);
void normalize(SpinorState& state, const Grid& grid);
// Rectangle-rule L2 distance between two states in the same basis.
double l2_distance(const SpinorState& lhs, const SpinorState& rhs, const Grid& grid);

enum class Preparation { BareExcited, BareGround, DressedPlus, DressedMinus };

std::string_view to_string(Preparation prep) noexcept;
Preparation preparation_from_string(std::string_view name);

struct SectorWeight {
    int photon_n;
    double weight;
};

// Gaussian packet |psi|^2 ~ exp(-(z - z0)^2 / (2 sigma_z^2)) with mean momentum p0,
// times an internal state. An empty `sectors` list means the single sector
// of the SystemParams the run is started with.
struct InitialCondition {
    double z0 = 0.0;
    double sigma_z = 1.0;
    double p0 = 0.0;
    Preparation preparation = Preparation::BareExcited;
    std::vector<SectorWeight> sectors;

    // Throws InvalidArgument on sigma_z <= 2 dz, a packet centre closer than
    // 10 sigma_z to either grid edge, or bad sector weights.
    void validate(const Grid& grid) const;
};

// Truncated Poisson weights for a coherent field, renormalized to sum to one.
std::vector<SectorWeight> coherent_sector_weights(double mean_photons, int truncation);

// Throws GridTooCoarse when |p0| + 5/sigma_z exceeds 0.8 k_max.
void check_resolution(const InitialCondition& initial, const Grid& grid);

// dt = 0.05 / max(R_max, p_max^2 / 2M) with p_max = |p0| + 5/sigma_z.
double recommended_time_step(const SystemParams& params, const InitialCondition& initial);

// Initial packet for one sector, in the bare basis, normalized.
SpinorState prepare_state(const InitialCondition& initial, const SystemParams& sector_params,
                          const ModeProfile& profile, const Grid& grid);

// Sector Hamiltonian (without kinetic energy) in the ordered basis
// (|n,e>, |n+1,g>): diag(omega(n+1/2) + Delta/2, omega(n+1/2) - Delta/2),
// off-diagonal lambda f(z) sqrt(n+1). `interaction_picture` drops omega(n+1/2).
Eigen::Matrix2cd potential_matrix(const SystemParams& params, const ModeProfile& profile, double z,
                                  bool interaction_picture = false);

// exp(-i H dt) for Hermitian 2x2 H via the identity/traceless split.
Eigen::Matrix2cd hermitian_propagator(const Eigen::Matrix2cd& h, double dt);

struct StepOptions {
    // Subtract omega(n+1/2) from the potential (a global phase per sector).
    bool interaction_picture = false;
};

class BareStepper {
public:
    BareStepper(const SystemParams& params, const ModeProfile& profile, const Grid& grid, StepOptions options = {});

    const Grid& grid() const noexcept { return grid_; }

    void step(SpinorState& state);
    // `steps` Strang steps with adjacent kinetic half steps merged.
    void advance(SpinorState& state, std::size_t steps);

    // <H> with the spectral kinetic operator.
    double energy(const SpinorState& state);

private:
    void check_state(const SpinorState& state) const;
    void kinetic(SpinorState& state, const std::vector<cplx>& phase);
    void potential(SpinorState& state) const;

    Grid grid_;
    double mass_;
    std::vector<double> k_;
    std::vector<cplx> half_kick_;  // exp(-i k^2 dt / 4M) / n
    std::vector<cplx> full_kick_;  // exp(-i k^2 dt / 2M) / n
    // Pointwise exp(-i V(z) dt) entries and V(z) itself (real symmetric here).
    std::vector<cplx> u00_, u01_, u10_, u11_;
    std::vector<double> v00_, v01_, v11_;
    Fft fft_;
};

class DressedStepper {
public:
    DressedStepper(const DressedFrame& frame, const Grid& grid, StepOptions options = {});

    const Grid& grid() const noexcept { return grid_; }

    void step(SpinorState& state);
    void advance(SpinorState& state, std::size_t steps);

    // H applied to (C+, C-); returned in a dressed SpinorState.
    SpinorState apply_hamiltonian(const SpinorState& state) const;
    double energy(const SpinorState& state) const;

    static constexpr int stencil_half_width = 3;

private:
    void check_state(const SpinorState& state) const;

    Grid grid_;
    int sector_;
    BandedMatrix hamiltonian_;
    BandedMatrix explicit_half_;  // I - i dt/2 H
    std::optional<BandedLU> implicit_half_;  // LU of I + i dt/2 H
    mutable std::vector<cplx> work_;
    mutable std::vector<cplx> rhs_;
};

// Single steps as value transforms. They build a stepper per call; use the
// stepper classes for runs.
SpinorState step_bare(const SpinorState& state, const SystemParams& params, const ModeProfile& profile,
                      const Grid& grid, StepOptions options = {});
SpinorState step_dressed(const SpinorState& state, const DressedFrame& frame, const Grid& grid,
                         StepOptions options = {});

// Pointwise rotation by theta(z): C+ = sin(t) a + cos(t) b, C- = cos(t) a - sin(t) b.
// The rotation matrix is its own inverse.
SpinorState to_dressed(const SpinorState& state, const DressedFrame& frame, const Grid& grid);
SpinorState to_bare(const SpinorState& state, const DressedFrame& frame, const Grid& grid);

enum class BasisMode { Bare, Dressed };

std::string_view to_string(BasisMode mode) noexcept;

struct EvolveOptions {
    std::size_t stride = 1;
    bool interaction_picture = false;
    // Worker cap for independent sectors; 0 means hardware concurrency.
    unsigned max_threads = 0;
    // Probability allowed inside the 5 sigma_z guard bands at the grid edges.
    double guard_tolerance = 1e-10;
};

struct Snapshot {
    std::size_t step;
    double time;
    SpinorState state;
};

struct SectorTrajectory {
    int photon_n;
    double weight;
    std::vector<Snapshot> snapshots;
};

struct Trajectory {
    std::vector<SectorTrajectory> sectors;
};

// Called for t = 0, every `stride` steps and the final step. Invocations for
// distinct sectors may run concurrently; within a sector they are ordered.
using SnapshotObserver = std::function<void(std::size_t sector_index, const Snapshot&)>;

// Sector list actually used for a run (explicit weights or the single sector of params).
std::vector<SectorWeight> run_sectors(const InitialCondition& initial, const SystemParams& params);

void evolve(const InitialCondition& initial, const SystemParams& params, const ModeProfile& profile,
            const Grid& grid, BasisMode mode, const EvolveOptions& options, const SnapshotObserver& observer);

Trajectory evolve(const InitialCondition& initial, const SystemParams& params, const ModeProfile& profile,
                  const Grid& grid, BasisMode mode, const EvolveOptions& options = {});

// Probability within 5 sigma_z of either grid edge; throws BoundaryContact above tolerance.
void check_guard_band(const SpinorState& state, const Grid& grid, double sigma_z, double tolerance);

}  // namespace simcav
