#include "simcav/spectral.hpp"

#include "simcav/errors.hpp"

#include <fftw3.h>

#include <algorithm>
#include <mutex>
#include <numbers>

namespace simcav {

namespace {
// The FFTW planner is not re-entrant; execution of finished plans is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

struct Fft::Impl {
    std::size_t n;
    fftw_complex* buffer = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    explicit Impl(std::size_t size) : n(size) {
        std::lock_guard lock(planner_mutex());
        buffer = fftw_alloc_complex(n);
        fwd = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_1d(static_cast<int>(n), buffer, buffer, FFTW_BACKWARD, FFTW_ESTIMATE);
    }

    ~Impl() {
        std::lock_guard lock(planner_mutex());
        if (fwd) fftw_destroy_plan(fwd);
        if (bwd) fftw_destroy_plan(bwd);
        fftw_free(buffer);
    }

    void run(fftw_plan plan, std::span<cplx> data) {
        if (data.size() != n) throw InvalidArgument("fft: length mismatch");
        auto* buf = reinterpret_cast<cplx*>(buffer);
        std::copy(data.begin(), data.end(), buf);
        fftw_execute(plan);
        std::copy(buf, buf + n, data.begin());
    }
};

Fft::Fft(std::size_t n) : impl_(std::make_unique<Impl>(n)) {
    if (n == 0) throw InvalidArgument("fft: length must be positive");
}
Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

std::size_t Fft::size() const noexcept { return impl_->n; }
void Fft::forward(std::span<cplx> data) { impl_->run(impl_->fwd, data); }
void Fft::backward(std::span<cplx> data) { impl_->run(impl_->bwd, data); }

std::vector<double> wavenumbers(std::size_t n, double dz) {
    std::vector<double> k(n);
    const double dk = 2.0 * std::numbers::pi / (static_cast<double>(n) * dz);
    for (std::size_t j = 0; j < n; ++j) {
        const auto signed_j = j < n / 2 ? static_cast<double>(j) : static_cast<double>(j) - static_cast<double>(n);
        k[j] = signed_j * dk;
    }
    return k;
}

}  // namespace simcav
