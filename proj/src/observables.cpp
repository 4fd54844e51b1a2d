#include "simcav/observables.hpp"

#include "simcav/errors.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace simcav {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_match(const SpinorState& state, const Grid& grid) {
    if (state.a.size() != grid.n_points() || state.b.size() != grid.n_points()) {
        throw InvalidArgument("state length does not match the grid");
    }
}

double bare_inversion(const SpinorState& state, const Grid& grid) {
    double w = 0.0;
    for (std::size_t i = 0; i < state.a.size(); ++i) w += std::norm(state.a[i]) - std::norm(state.b[i]);
    return w * grid.dz();
}

double spectral_momentum(const SpinorState& state, const Grid& grid, Fft& fft) {
    const std::vector<double> k = wavenumbers(grid.n_points(), grid.dz());
    double sum = 0.0;
    for (const auto* comp : {&state.a, &state.b}) {
        std::vector<cplx> spectrum(*comp);
        fft.forward(spectrum);
        for (std::size_t j = 0; j < spectrum.size(); ++j) sum += k[j] * std::norm(spectrum[j]);
    }
    return sum * grid.dz() / static_cast<double>(grid.n_points());
}

}  // namespace

double inversion(const SpinorState& state, const Grid& grid) {
    require_match(state, grid);
    if (state.basis != Basis::Bare) throw InvalidArgument("inversion of a dressed state needs its dressed frame");
    return bare_inversion(state, grid);
}

double inversion(const SpinorState& state, const DressedFrame& frame, const Grid& grid) {
    require_match(state, grid);
    if (state.basis == Basis::Bare) return bare_inversion(state, grid);
    return bare_inversion(to_bare(state, frame, grid), grid);
}

BranchPopulations branch_populations(const SpinorState& state, const DressedFrame& frame, const Grid& grid) {
    require_match(state, grid);
    const SpinorState dressed = state.basis == Basis::Dressed ? state : to_dressed(state, frame, grid);
    double plus = 0.0;
    double minus = 0.0;
    for (std::size_t i = 0; i < dressed.a.size(); ++i) {
        plus += std::norm(dressed.a[i]);
        minus += std::norm(dressed.b[i]);
    }
    return {plus * grid.dz(), minus * grid.dz()};
}

RegionProbabilities region_probabilities(const SpinorState& state, const ModeProfile& profile, const Grid& grid) {
    require_match(state, grid);
    RegionProbabilities p{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < state.a.size(); ++i) {
        const double z = grid.z(i);
        const double rho = std::norm(state.a[i]) + std::norm(state.b[i]);
        if (z < profile.z_on()) {
            p.reflect += rho;
        } else if (z > profile.z_off()) {
            p.transmit += rho;
        } else {
            p.inside += rho;
        }
    }
    p.reflect *= grid.dz();
    p.inside *= grid.dz();
    p.transmit *= grid.dz();
    return p;
}

double mean_position(const SpinorState& state, const Grid& grid) {
    require_match(state, grid);
    double sum = 0.0;
    for (std::size_t i = 0; i < state.a.size(); ++i) {
        sum += grid.z(i) * (std::norm(state.a[i]) + std::norm(state.b[i]));
    }
    return sum * grid.dz();
}

double mean_momentum(const SpinorState& state, const Grid& grid) {
    require_match(state, grid);
    if (state.basis != Basis::Bare) throw InvalidArgument("mean_momentum expects a bare-basis state");
    Fft fft(grid.n_points());
    return spectral_momentum(state, grid, fft);
}

RegionProbabilities scattering_coefficients(const SpinorState& final_state, const ModeProfile& profile,
                                            const Grid& grid, double cleared_threshold) {
    if (!profile.is_compact()) {
        throw InvalidArgument("scattering coefficients need a compact mode profile (mesa has none)");
    }
    const RegionProbabilities p = region_probabilities(final_state, profile, grid);
    if (p.inside >= cleared_threshold) {
        throw PacketNotCleared("probability " + format_sci(p.inside) +
                               " still inside the interaction region (threshold " +
                               format_sci(cleared_threshold) + "); run longer");
    }
    return p;
}

// ---------------------------------------------------------------------------

SnapshotRecorder::SnapshotRecorder(const SystemParams& sector_params, const ModeProfile& profile, const Grid& grid,
                                   StepOptions options)
    : params_(sector_params), profile_(profile), grid_(grid), options_(options), fft_(grid.n_points()) {
    try {
        DressedFrame frame(sector_params, profile);
        rotations_.reserve(grid.n_points());
        for (std::size_t i = 0; i < grid.n_points(); ++i) rotations_.push_back(frame.rotation(grid.z(i)));
        frame_.emplace(std::move(frame));
    } catch (const DegenerateFrame&) {
        rotations_.clear();
    }
}

SnapshotRecorder::~SnapshotRecorder() = default;
SnapshotRecorder::SnapshotRecorder(SnapshotRecorder&&) noexcept = default;
SnapshotRecorder& SnapshotRecorder::operator=(SnapshotRecorder&&) noexcept = default;

SpinorState SnapshotRecorder::as_bare(const SpinorState& state) const {
    if (state.basis == Basis::Bare) return state;
    if (!frame_) throw DegenerateFrame("dressed state recorded without a defined frame");
    SpinorState out{Basis::Bare, state.sector, std::vector<cplx>(state.a.size()), std::vector<cplx>(state.b.size())};
    for (std::size_t i = 0; i < state.a.size(); ++i) {
        const Rotation& r = rotations_[i];
        out.a[i] = r.sin_theta * state.a[i] + r.cos_theta * state.b[i];
        out.b[i] = r.cos_theta * state.a[i] - r.sin_theta * state.b[i];
    }
    return out;
}

void SnapshotRecorder::record(const Snapshot& snapshot, ObservableSeries& series) {
    const SpinorState& state = snapshot.state;
    require_match(state, grid_);
    const SpinorState bare = as_bare(state);

    series.times.push_back(snapshot.time);
    series.norm.push_back(norm(state, grid_));
    series.inversion.push_back(bare_inversion(bare, grid_));

    if (frame_) {
        double plus = 0.0;
        double minus = 0.0;
        if (state.basis == Basis::Dressed) {
            for (std::size_t i = 0; i < state.a.size(); ++i) {
                plus += std::norm(state.a[i]);
                minus += std::norm(state.b[i]);
            }
        } else {
            for (std::size_t i = 0; i < state.a.size(); ++i) {
                const Rotation& r = rotations_[i];
                plus += std::norm(r.sin_theta * state.a[i] + r.cos_theta * state.b[i]);
                minus += std::norm(r.cos_theta * state.a[i] - r.sin_theta * state.b[i]);
            }
        }
        series.pop_plus.push_back(plus * grid_.dz());
        series.pop_minus.push_back(minus * grid_.dz());
    } else {
        series.pop_plus.push_back(kNaN);
        series.pop_minus.push_back(kNaN);
    }

    series.mean_z.push_back(mean_position(state, grid_));
    series.mean_p.push_back(spectral_momentum(bare, grid_, fft_));

    const RegionProbabilities regions = region_probabilities(state, profile_, grid_);
    series.reflect.push_back(regions.reflect);
    series.transmit.push_back(regions.transmit);
    series.inside.push_back(regions.inside);

    if (state.basis == Basis::Bare) {
        if (!bare_energy_) bare_energy_ = std::make_unique<BareStepper>(params_, profile_, grid_, options_);
        series.energy.push_back(bare_energy_->energy(state));
    } else {
        if (!dressed_energy_) dressed_energy_ = std::make_unique<DressedStepper>(*frame_, grid_, options_);
        series.energy.push_back(dressed_energy_->energy(state));
    }
}

ObservableSeries combine_weighted(const std::vector<ObservableSeries>& per_sector, const std::vector<double>& weights) {
    if (per_sector.empty() || per_sector.size() != weights.size()) {
        throw InvalidArgument("combine_weighted: need one weight per sector series");
    }
    ObservableSeries out;
    out.times = per_sector.front().times;
    const std::size_t n = out.times.size();
    auto fields = [](auto& s) {
        return std::array{&s.norm,   &s.inversion, &s.pop_plus, &s.pop_minus, &s.mean_z,
                          &s.mean_p, &s.reflect,   &s.transmit, &s.inside,    &s.energy};
    };
    for (auto* f : fields(out)) f->assign(n, 0.0);
    for (std::size_t s = 0; s < per_sector.size(); ++s) {
        const auto& src = per_sector[s];
        if (src.times != out.times) throw InvalidArgument("combine_weighted: sector time axes differ");
        auto dst_fields = fields(out);
        auto src_fields = fields(src);
        for (std::size_t f = 0; f < dst_fields.size(); ++f) {
            for (std::size_t i = 0; i < n; ++i) (*dst_fields[f])[i] += weights[s] * (*src_fields[f])[i];
        }
    }
    return out;
}

ObservableSeries record_series(const InitialCondition& initial, const SystemParams& params, const ModeProfile& profile,
                               const Grid& grid, BasisMode mode, const EvolveOptions& options) {
    const std::vector<SectorWeight> sectors = run_sectors(initial, params);
    std::vector<ObservableSeries> per_sector(sectors.size());
    std::vector<std::unique_ptr<SnapshotRecorder>> recorders(sectors.size());
    const StepOptions step_options{options.interaction_picture};
    evolve(initial, params, profile, grid, mode, options, [&](std::size_t index, const Snapshot& snap) {
        if (!recorders[index]) {
            recorders[index] = std::make_unique<SnapshotRecorder>(params.with_photon_n(sectors[index].photon_n),
                                                                  profile, grid, step_options);
        }
        recorders[index]->record(snap, per_sector[index]);
    });
    std::vector<double> weights;
    for (const auto& s : sectors) weights.push_back(s.weight);
    return combine_weighted(per_sector, weights);
}

}  // namespace simcav
