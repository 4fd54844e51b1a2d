#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace simcav {

using cplx = std::complex<double>;

// In-place 1D complex FFT of fixed length (unnormalized in both directions).
// One instance is not safe for concurrent use; distinct instances are.
class Fft {
public:
    explicit Fft(std::size_t n);
    ~Fft();
    Fft(Fft&&) noexcept;
    Fft& operator=(Fft&&) noexcept;
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t size() const noexcept;
    void forward(std::span<cplx> data);
    void backward(std::span<cplx> data);

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Periodic angular wavenumbers in FFT order: 2 pi j / L for j < n/2, then negative.
std::vector<double> wavenumbers(std::size_t n, double dz);

}  // namespace simcav
