#pragma once

#include "simcav/core_model.hpp"
#include "simcav/propagator.hpp"
#include "simcav/spectral.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

namespace simcav {

struct BranchPopulations {
    double plus;
    double minus;
};

// Probability left of z_on, inside [z_on, z_off], and right of z_off.
struct RegionProbabilities {
    double reflect;
    double inside;
    double transmit;
};

// W = P(|n,e>) - P(|n+1,g>) of a bare-basis state.
double inversion(const SpinorState& state, const Grid& grid);
// Either basis; dressed states are rotated back through the frame first.
double inversion(const SpinorState& state, const DressedFrame& frame, const Grid& grid);

// Integrals of |C+|^2 and |C-|^2; bare states are rotated into the frame first.
BranchPopulations branch_populations(const SpinorState& state, const DressedFrame& frame, const Grid& grid);

// Density is basis independent, so no frame is needed.
RegionProbabilities region_probabilities(const SpinorState& state, const ModeProfile& profile, const Grid& grid);
double mean_position(const SpinorState& state, const Grid& grid);
// Spectral <p> of a bare-basis state.
double mean_momentum(const SpinorState& state, const Grid& grid);

// Final-state scattering readout. Throws InvalidArgument for a non-compact
// (mesa) profile and PacketNotCleared when inside >= cleared_threshold.
RegionProbabilities scattering_coefficients(const SpinorState& final_state, const ModeProfile& profile,
                                            const Grid& grid, double cleared_threshold = 0.01);

struct ObservableSeries {
    std::vector<double> times;
    std::vector<double> norm;
    std::vector<double> inversion;
    std::vector<double> pop_plus;
    std::vector<double> pop_minus;
    std::vector<double> mean_z;
    std::vector<double> mean_p;
    std::vector<double> reflect;
    std::vector<double> transmit;
    std::vector<double> inside;
    std::vector<double> energy;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }
};

// Per-sector readout of snapshots. Branch populations are NaN when the
// dressed frame is undefined somewhere on the grid (zero detuning with
// f(z) = 0). Energy uses the integrator's own Hamiltonian (spectral for bare
// states, the banded operator for dressed ones).
class SnapshotRecorder {
public:
    SnapshotRecorder(const SystemParams& sector_params, const ModeProfile& profile, const Grid& grid,
                     StepOptions options = {});
    ~SnapshotRecorder();
    SnapshotRecorder(SnapshotRecorder&&) noexcept;
    SnapshotRecorder& operator=(SnapshotRecorder&&) noexcept;

    bool frame_defined() const noexcept { return frame_.has_value(); }
    void record(const Snapshot& snapshot, ObservableSeries& series);

private:
    SpinorState as_bare(const SpinorState& state) const;

    SystemParams params_;
    ModeProfile profile_;
    Grid grid_;
    StepOptions options_;
    std::optional<DressedFrame> frame_;
    std::vector<Rotation> rotations_;
    Fft fft_;
    std::unique_ptr<BareStepper> bare_energy_;
    std::unique_ptr<DressedStepper> dressed_energy_;
};

// Sector-weighted sum of per-sector series (identical time axes required).
ObservableSeries combine_weighted(const std::vector<ObservableSeries>& per_sector, const std::vector<double>& weights);

// Evolve and record observables at every snapshot, summed over sectors.
ObservableSeries record_series(const InitialCondition& initial, const SystemParams& params, const ModeProfile& profile,
                               const Grid& grid, BasisMode mode, const EvolveOptions& options = {});

}  // namespace simcav
