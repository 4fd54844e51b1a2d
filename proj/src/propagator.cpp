#include "simcav/propagator.hpp"

#include "simcav/errors.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

namespace simcav {

namespace {

// Sixth-order central differences: f'(z_j) ~ sum_m d1[m] f_{j+m} / dz for m = 1..3
// (antisymmetric), f''(z_j) ~ sum_m d2[|m|] f_{j+m} / dz^2 for m = -3..3.
constexpr double kFirst[4] = {0.0, 3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
constexpr double kSecond[4] = {-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0};

double first_coefficient(int m) {
    return m >= 0 ? kFirst[m] : -kFirst[-m];
}

void require_grid_match(const SpinorState& state, const Grid& grid) {
    if (state.a.size() != grid.n_points() || state.b.size() != grid.n_points()) {
        throw InvalidArgument("state length does not match the grid");
    }
}

}  // namespace

// ---------------------------------------------------------------------------

Grid::Grid(double z_min, double z_max, std::size_t n_points, double dt, std::size_t n_steps)
    : z_min_(z_min), z_max_(z_max), n_points_(n_points), dt_(dt), n_steps_(n_steps) {
    if (!std::isfinite(z_min) || !std::isfinite(z_max) || !(z_min < z_max)) {
        throw InvalidArgument("grid requires finite z-min < z-max");
    }
    if (n_points < 64 || !std::has_single_bit(n_points)) {
        throw InvalidArgument("n-points must be a power of two >= 64");
    }
    if (!std::isfinite(dt) || dt <= 0.0) {
        throw InvalidArgument("dt must be finite and > 0");
    }
}

double Grid::k_max() const noexcept {
    return std::numbers::pi / dz();
}

std::string_view to_string(Basis basis) noexcept {
    return basis == Basis::Bare ? "bare" : "dressed";
}

std::string_view to_string(Preparation prep) noexcept {
    switch (prep) {
        case Preparation::BareExcited: return "bare-excited";
        case Preparation::BareGround: return "bare-ground";
        case Preparation::DressedPlus: return "dressed-plus";
        case Preparation::DressedMinus: return "dressed-minus";
    }
    return "unknown";
}

Preparation preparation_from_string(std::string_view name) {
    if (name == "bare-excited") return Preparation::BareExcited;
    if (name == "bare-ground") return Preparation::BareGround;
    if (name == "dressed-plus") return Preparation::DressedPlus;
    if (name == "dressed-minus") return Preparation::DressedMinus;
    throw InvalidArgument("unknown internal preparation '" + std::string(name) + "'");
}

std::string_view to_string(BasisMode mode) noexcept {
    return mode == BasisMode::Bare ? "bare" : "dressed";
}

double norm(const SpinorState& state, const Grid& grid) {
    require_grid_match(state, grid);
    double sum = 0.0;
    for (std::size_t i = 0; i < state.a.size(); ++i) sum += std::norm(state.a[i]) + std::norm(state.b[i]);
    return sum * grid.dz();
}

void normalize(SpinorState& state, const Grid& grid) {
    const double n = norm(state, grid);
    if (!(n > 0.0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite state");
    const double scale = 1.0 / std::sqrt(n);
    for (auto& v : state.a) v *= scale;
    for (auto& v : state.b) v *= scale;
}

double l2_distance(const SpinorState& lhs, const SpinorState& rhs, const Grid& grid) {
    require_grid_match(lhs, grid);
    require_grid_match(rhs, grid);
    if (lhs.basis != rhs.basis) throw InvalidArgument("l2_distance: states are in different bases");
    double sum = 0.0;
    for (std::size_t i = 0; i < lhs.a.size(); ++i) {
        sum += std::norm(lhs.a[i] - rhs.a[i]) + std::norm(lhs.b[i] - rhs.b[i]);
    }
    return std::sqrt(sum * grid.dz());
}

// ---------------------------------------------------------------------------

void InitialCondition::validate(const Grid& grid) const {
    if (!std::isfinite(z0) || !std::isfinite(sigma_z) || !std::isfinite(p0)) {
        throw InvalidArgument("initial condition values must be finite");
    }
    if (!(sigma_z > 2.0 * grid.dz())) {
        throw InvalidArgument("sigma-z must exceed 2 dz");
    }
    if (z0 - grid.z_min() < 10.0 * sigma_z || grid.z_max() - z0 < 10.0 * sigma_z) {
        throw InvalidArgument("packet centre must lie at least 10 sigma-z from both grid edges");
    }
    if (!sectors.empty()) {
        double total = 0.0;
        for (const auto& s : sectors) {
            if (s.photon_n < 0) throw InvalidArgument("sector photon number must be >= 0");
            if (!(s.weight >= 0.0) || !std::isfinite(s.weight)) throw InvalidArgument("sector weights must be >= 0");
            total += s.weight;
        }
        if (std::abs(total - 1.0) > 1e-9) throw InvalidArgument("sector weights must sum to 1");
        for (std::size_t i = 0; i < sectors.size(); ++i) {
            for (std::size_t j = i + 1; j < sectors.size(); ++j) {
                if (sectors[i].photon_n == sectors[j].photon_n) throw InvalidArgument("duplicate sector in weights");
            }
        }
    }
}

std::vector<SectorWeight> coherent_sector_weights(double mean_photons, int truncation) {
    if (!(mean_photons >= 0.0) || !std::isfinite(mean_photons)) throw InvalidArgument("mean photon number must be >= 0");
    if (truncation < 1) throw InvalidArgument("sector truncation must be >= 1");
    std::vector<SectorWeight> out;
    out.reserve(static_cast<std::size_t>(truncation));
    double log_p = -mean_photons;
    double total = 0.0;
    for (int n = 0; n < truncation; ++n) {
        if (n > 0) log_p += std::log(mean_photons) - std::log(static_cast<double>(n));
        const double p = mean_photons == 0.0 ? (n == 0 ? 1.0 : 0.0) : std::exp(log_p);
        out.push_back({n, p});
        total += p;
    }
    for (auto& s : out) s.weight /= total;
    return out;
}

void check_resolution(const InitialCondition& initial, const Grid& grid) {
    const double p_max = std::abs(initial.p0) + 5.0 / initial.sigma_z;
    if (p_max > 0.8 * grid.k_max()) {
        throw GridTooCoarse("|p0| + 5/sigma-z = " + std::to_string(p_max) + " exceeds 0.8 k_max = " +
                            std::to_string(0.8 * grid.k_max()) + "; refine n-points");
    }
}

double recommended_time_step(const SystemParams& params, const InitialCondition& initial) {
    const double p_max = std::abs(initial.p0) + 5.0 / initial.sigma_z;
    const double scale = std::max(rabi_radical(params, 1.0), p_max * p_max / (2.0 * params.mass()));
    return 0.05 / scale;
}

SpinorState prepare_state(const InitialCondition& initial, const SystemParams& sector_params,
                          const ModeProfile& profile, const Grid& grid) {
    initial.validate(grid);
    const std::size_t n = grid.n_points();
    SpinorState s;
    s.basis = Basis::Bare;
    s.sector = sector_params.photon_n();
    s.a.assign(n, cplx{});
    s.b.assign(n, cplx{});

    const bool dressed = initial.preparation == Preparation::DressedPlus ||
                         initial.preparation == Preparation::DressedMinus;
    std::optional<DressedFrame> frame;
    if (dressed) frame.emplace(sector_params, profile);

    const double sig = initial.sigma_z;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = grid.z(i) - initial.z0;
        const cplx psi = std::exp(cplx{-d * d / (4.0 * sig * sig), initial.p0 * d});
        switch (initial.preparation) {
            case Preparation::BareExcited: s.a[i] = psi; break;
            case Preparation::BareGround: s.b[i] = psi; break;
            case Preparation::DressedPlus: {
                const Rotation r = frame->rotation(grid.z(i));
                s.a[i] = r.sin_theta * psi;
                s.b[i] = r.cos_theta * psi;
                break;
            }
            case Preparation::DressedMinus: {
                const Rotation r = frame->rotation(grid.z(i));
                s.a[i] = r.cos_theta * psi;
                s.b[i] = -r.sin_theta * psi;
                break;
            }
        }
    }
    normalize(s, grid);
    return s;
}

// ---------------------------------------------------------------------------

Eigen::Matrix2cd potential_matrix(const SystemParams& params, const ModeProfile& profile, double z,
                                  bool interaction_picture) {
    const double centre = interaction_picture ? 0.0 : params.sector_offset();
    const double half_detuning = 0.5 * params.detuning();
    const double g = params.sector_coupling(profile.value(z));
    Eigen::Matrix2cd v;
    v << centre + half_detuning, g, g, centre - half_detuning;
    return v;
}

Eigen::Matrix2cd hermitian_propagator(const Eigen::Matrix2cd& h, double dt) {
    const double mean = 0.5 * (h(0, 0).real() + h(1, 1).real());
    Eigen::Matrix2cd traceless = h;
    traceless(0, 0) -= mean;
    traceless(1, 1) -= mean;
    const double r = std::sqrt(std::norm(traceless(0, 0)) + std::norm(traceless(0, 1)));
    const double c = std::cos(r * dt);
    const double s = r > 0.0 ? std::sin(r * dt) / r : dt;
    Eigen::Matrix2cd u = c * Eigen::Matrix2cd::Identity() - cplx{0.0, s} * traceless;
    return std::exp(cplx{0.0, -mean * dt}) * u;
}

// ---------------------------------------------------------------------------

BareStepper::BareStepper(const SystemParams& params, const ModeProfile& profile, const Grid& grid,
                         StepOptions options)
    : grid_(grid), mass_(params.mass()), fft_(grid.n_points()) {
    const std::size_t n = grid.n_points();
    k_ = wavenumbers(n, grid.dz());
    half_kick_.resize(n);
    full_kick_.resize(n);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double e = k_[j] * k_[j] / (2.0 * mass_);
        half_kick_[j] = std::exp(cplx{0.0, -0.5 * e * grid.dt()}) * inv_n;
        full_kick_[j] = std::exp(cplx{0.0, -e * grid.dt()}) * inv_n;
    }
    u00_.resize(n);
    u01_.resize(n);
    u10_.resize(n);
    u11_.resize(n);
    v00_.resize(n);
    v01_.resize(n);
    v11_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Matrix2cd v = potential_matrix(params, profile, grid.z(i), options.interaction_picture);
        const Eigen::Matrix2cd u = hermitian_propagator(v, grid.dt());
        u00_[i] = u(0, 0);
        u01_[i] = u(0, 1);
        u10_[i] = u(1, 0);
        u11_[i] = u(1, 1);
        v00_[i] = v(0, 0).real();
        v01_[i] = v(0, 1).real();
        v11_[i] = v(1, 1).real();
    }
}

void BareStepper::check_state(const SpinorState& state) const {
    if (state.basis != Basis::Bare) throw InvalidArgument("bare stepper needs a bare-basis state");
    require_grid_match(state, grid_);
}

void BareStepper::kinetic(SpinorState& state, const std::vector<cplx>& phase) {
    for (auto* comp : {&state.a, &state.b}) {
        fft_.forward(*comp);
        for (std::size_t j = 0; j < comp->size(); ++j) (*comp)[j] *= phase[j];
        fft_.backward(*comp);
    }
}

void BareStepper::potential(SpinorState& state) const {
    for (std::size_t i = 0; i < state.a.size(); ++i) {
        const cplx a = state.a[i];
        const cplx b = state.b[i];
        state.a[i] = u00_[i] * a + u01_[i] * b;
        state.b[i] = u10_[i] * a + u11_[i] * b;
    }
}

void BareStepper::step(SpinorState& state) {
    advance(state, 1);
}

void BareStepper::advance(SpinorState& state, std::size_t steps) {
    check_state(state);
    if (steps == 0) return;
    kinetic(state, half_kick_);
    for (std::size_t s = 0; s < steps; ++s) {
        potential(state);
        kinetic(state, s + 1 < steps ? full_kick_ : half_kick_);
    }
}

double BareStepper::energy(const SpinorState& state) {
    check_state(state);
    const std::size_t n = grid_.n_points();
    const double dz = grid_.dz();
    double kinetic_sum = 0.0;
    for (const auto* comp : {&state.a, &state.b}) {
        std::vector<cplx> spectrum(*comp);
        fft_.forward(spectrum);
        for (std::size_t j = 0; j < n; ++j) kinetic_sum += std::norm(spectrum[j]) * k_[j] * k_[j];
    }
    const double kinetic_energy = kinetic_sum / (2.0 * mass_) * dz / static_cast<double>(n);
    double potential_energy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        potential_energy += v00_[i] * std::norm(state.a[i]) + v11_[i] * std::norm(state.b[i]) +
                            2.0 * v01_[i] * std::real(std::conj(state.a[i]) * state.b[i]);
    }
    return kinetic_energy + potential_energy * dz;
}

// ---------------------------------------------------------------------------

DressedStepper::DressedStepper(const DressedFrame& frame, const Grid& grid, StepOptions options)
    : grid_(grid),
      sector_(frame.params().photon_n()),
      hamiltonian_(2 * grid.n_points(), 2 * stencil_half_width + 1, 2 * stencil_half_width + 1),
      explicit_half_(2 * grid.n_points(), 2 * stencil_half_width + 1, 2 * stencil_half_width + 1) {
    const std::size_t n = grid.n_points();
    const double dz = grid.dz();
    const double inv_2m = 1.0 / (2.0 * frame.params().mass());
    const double offset = options.interaction_picture ? frame.params().sector_offset() : 0.0;

    std::vector<double> slope(n);
    for (std::size_t j = 0; j < n; ++j) slope[j] = frame.dtheta_dz(grid.z(j));

    const auto nn = static_cast<long>(n);
    for (long j = 0; j < nn; ++j) {
        const double z = grid.z(static_cast<std::size_t>(j));
        const DressedEnergies v = frame.potentials(z);
        const double gauge = slope[j] * slope[j] * inv_2m;
        const std::size_t plus = 2 * static_cast<std::size_t>(j);
        const std::size_t minus = plus + 1;
        hamiltonian_.at(plus, plus) += v.plus - offset + gauge;
        hamiltonian_.at(minus, minus) += v.minus - offset + gauge;
        for (int m = -stencil_half_width; m <= stencil_half_width; ++m) {
            const long k = j + m;
            if (k < 0 || k >= nn) continue;
            const std::size_t kp = 2 * static_cast<std::size_t>(k);
            const double kin = -kSecond[std::abs(m)] * inv_2m / (dz * dz);
            hamiltonian_.at(plus, kp) += kin;
            hamiltonian_.at(minus, kp + 1) += kin;
            if (m != 0) {
                const double cross = inv_2m * (slope[j] + slope[k]) * first_coefficient(m) / dz;
                hamiltonian_.at(plus, kp + 1) += cross;
                hamiltonian_.at(minus, kp) -= cross;
            }
        }
    }

    const std::size_t total = 2 * n;
    BandedMatrix implicit(total, hamiltonian_.lower(), hamiltonian_.upper());
    const cplx half_step{0.0, 0.5 * grid.dt()};
    for (std::size_t i = 0; i < total; ++i) {
        const std::size_t j0 = i >= hamiltonian_.lower() ? i - hamiltonian_.lower() : 0;
        const std::size_t j1 = std::min(total - 1, i + hamiltonian_.upper());
        for (std::size_t j = j0; j <= j1; ++j) {
            const cplx h = hamiltonian_.get(i, j);
            const cplx id = i == j ? cplx{1.0} : cplx{};
            implicit.at(i, j) = id + half_step * h;
            explicit_half_.at(i, j) = id - half_step * h;
        }
    }
    implicit_half_.emplace(std::move(implicit));
    work_.resize(total);
    rhs_.resize(total);
}

void DressedStepper::check_state(const SpinorState& state) const {
    if (state.basis != Basis::Dressed) throw InvalidArgument("dressed stepper needs a dressed-basis state");
    if (state.sector != sector_) throw InvalidArgument("state sector does not match the dressed frame");
    require_grid_match(state, grid_);
}

void DressedStepper::step(SpinorState& state) {
    advance(state, 1);
}

void DressedStepper::advance(SpinorState& state, std::size_t steps) {
    check_state(state);
    if (steps == 0) return;
    const std::size_t n = grid_.n_points();
    for (std::size_t i = 0; i < n; ++i) {
        work_[2 * i] = state.a[i];
        work_[2 * i + 1] = state.b[i];
    }
    for (std::size_t s = 0; s < steps; ++s) {
        explicit_half_.multiply(work_, rhs_);
        implicit_half_->solve(rhs_);
        std::swap(work_, rhs_);
    }
    for (std::size_t i = 0; i < n; ++i) {
        state.a[i] = work_[2 * i];
        state.b[i] = work_[2 * i + 1];
    }
}

SpinorState DressedStepper::apply_hamiltonian(const SpinorState& state) const {
    check_state(state);
    const std::size_t n = grid_.n_points();
    std::vector<cplx> x(2 * n);
    std::vector<cplx> y(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        x[2 * i] = state.a[i];
        x[2 * i + 1] = state.b[i];
    }
    hamiltonian_.multiply(x, y);
    SpinorState out{Basis::Dressed, state.sector, std::vector<cplx>(n), std::vector<cplx>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        out.a[i] = y[2 * i];
        out.b[i] = y[2 * i + 1];
    }
    return out;
}

double DressedStepper::energy(const SpinorState& state) const {
    const SpinorState h = apply_hamiltonian(state);
    double sum = 0.0;
    for (std::size_t i = 0; i < state.a.size(); ++i) {
        sum += std::real(std::conj(state.a[i]) * h.a[i] + std::conj(state.b[i]) * h.b[i]);
    }
    return sum * grid_.dz();
}

// ---------------------------------------------------------------------------

SpinorState step_bare(const SpinorState& state, const SystemParams& params, const ModeProfile& profile,
                      const Grid& grid, StepOptions options) {
    BareStepper stepper(params, profile, grid, options);
    SpinorState out = state;
    stepper.step(out);
    return out;
}

SpinorState step_dressed(const SpinorState& state, const DressedFrame& frame, const Grid& grid,
                         StepOptions options) {
    DressedStepper stepper(frame, grid, options);
    SpinorState out = state;
    stepper.step(out);
    return out;
}

namespace {

SpinorState rotate(const SpinorState& state, const DressedFrame& frame, const Grid& grid, Basis target) {
    require_grid_match(state, grid);
    if (state.sector != frame.params().photon_n()) {
        throw InvalidArgument("state sector does not match the dressed frame");
    }
    SpinorState out{target, state.sector, std::vector<cplx>(state.a.size()), std::vector<cplx>(state.b.size())};
    for (std::size_t i = 0; i < state.a.size(); ++i) {
        const Rotation r = frame.rotation(grid.z(i));
        out.a[i] = r.sin_theta * state.a[i] + r.cos_theta * state.b[i];
        out.b[i] = r.cos_theta * state.a[i] - r.sin_theta * state.b[i];
    }
    return out;
}

}  // namespace

SpinorState to_dressed(const SpinorState& state, const DressedFrame& frame, const Grid& grid) {
    if (state.basis != Basis::Bare) throw InvalidArgument("to_dressed expects a bare-basis state");
    return rotate(state, frame, grid, Basis::Dressed);
}

SpinorState to_bare(const SpinorState& state, const DressedFrame& frame, const Grid& grid) {
    if (state.basis != Basis::Dressed) throw InvalidArgument("to_bare expects a dressed-basis state");
    return rotate(state, frame, grid, Basis::Bare);
}

// ---------------------------------------------------------------------------

void check_guard_band(const SpinorState& state, const Grid& grid, double sigma_z, double tolerance) {
    require_grid_match(state, grid);
    const double band = 5.0 * sigma_z;
    double mass = 0.0;
    for (std::size_t i = 0; i < state.a.size(); ++i) {
        const double z = grid.z(i);
        if (z - grid.z_min() < band || grid.z_max() - z < band) {
            mass += std::norm(state.a[i]) + std::norm(state.b[i]);
        }
    }
    mass *= grid.dz();
    if (mass > tolerance) {
        throw BoundaryContact("probability " + format_sci(mass) + " inside the edge guard band exceeds " +
                              format_sci(tolerance) + "; widen the grid or shorten the run");
    }
}

std::vector<SectorWeight> run_sectors(const InitialCondition& initial, const SystemParams& params) {
    if (initial.sectors.empty()) return {{params.photon_n(), 1.0}};
    return initial.sectors;
}

void evolve(const InitialCondition& initial, const SystemParams& params, const ModeProfile& profile,
            const Grid& grid, BasisMode mode, const EvolveOptions& options, const SnapshotObserver& observer) {
    if (options.stride == 0) throw InvalidArgument("snapshot stride must be >= 1");
    initial.validate(grid);
    check_resolution(initial, grid);
    const std::vector<SectorWeight> sectors = run_sectors(initial, params);
    const StepOptions step_options{options.interaction_picture};

    auto run_sector = [&](std::size_t index) {
        const SystemParams sp = params.with_photon_n(sectors[index].photon_n);
        SpinorState state = prepare_state(initial, sp, profile, grid);

        auto emit = [&](std::size_t step) {
            check_guard_band(state, grid, initial.sigma_z, options.guard_tolerance);
            if (observer) observer(index, Snapshot{step, static_cast<double>(step) * grid.dt(), state});
        };

        auto loop = [&](auto& stepper) {
            std::size_t step = 0;
            emit(step);
            while (step < grid.n_steps()) {
                const std::size_t chunk = std::min(options.stride, grid.n_steps() - step);
                stepper.advance(state, chunk);
                step += chunk;
                emit(step);
            }
        };

        if (mode == BasisMode::Bare) {
            BareStepper stepper(sp, profile, grid, step_options);
            loop(stepper);
        } else {
            const DressedFrame frame(sp, profile);
            state = to_dressed(state, frame, grid);
            DressedStepper stepper(frame, grid, step_options);
            loop(stepper);
        }
    };

    unsigned workers = options.max_threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                                : options.max_threads;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, sectors.size()));

    std::vector<std::exception_ptr> errors(sectors.size());
    if (workers <= 1) {
        for (std::size_t i = 0; i < sectors.size(); ++i) run_sector(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < sectors.size(); i = next++) {
                    try {
                        run_sector(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

Trajectory evolve(const InitialCondition& initial, const SystemParams& params, const ModeProfile& profile,
                  const Grid& grid, BasisMode mode, const EvolveOptions& options) {
    const std::vector<SectorWeight> sectors = run_sectors(initial, params);
    Trajectory out;
    for (const auto& s : sectors) out.sectors.push_back({s.photon_n, s.weight, {}});
    evolve(initial, params, profile, grid, mode, options,
           [&](std::size_t index, const Snapshot& snap) { out.sectors[index].snapshots.push_back(snap); });
    return out;
}

}  // namespace simcav
