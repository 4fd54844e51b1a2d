#include "simcav/banded.hpp"

#include "simcav/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace simcav {

BandedMatrix::BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
    : n_(n), lower_(lower), upper_(upper), width_(lower + upper + 1), data_(n * (lower + upper + 1)) {
    if (n == 0) throw InvalidArgument("banded matrix must be non-empty");
}

bool BandedMatrix::in_band(std::size_t i, std::size_t j) const noexcept {
    return i < n_ && j < n_ && j + lower_ >= i && j <= i + upper_;
}

cplx& BandedMatrix::at(std::size_t i, std::size_t j) {
    if (!in_band(i, j)) {
        throw InvalidArgument("banded matrix index (" + std::to_string(i) + ", " + std::to_string(j) +
                              ") outside the band");
    }
    return data_[i * width_ + (j + lower_ - i)];
}

cplx BandedMatrix::get(std::size_t i, std::size_t j) const noexcept {
    return in_band(i, j) ? data_[i * width_ + (j + lower_ - i)] : cplx{};
}

void BandedMatrix::multiply(std::span<const cplx> x, std::span<cplx> y) const {
    if (x.size() != n_ || y.size() != n_) throw InvalidArgument("banded multiply: size mismatch");
    for (std::size_t i = 0; i < n_; ++i) {
        const std::size_t j0 = i >= lower_ ? i - lower_ : 0;
        const std::size_t j1 = std::min(n_ - 1, i + upper_);
        const cplx* row = &data_[i * width_ + (j0 + lower_ - i)];
        cplx acc{};
        for (std::size_t j = j0; j <= j1; ++j) acc += row[j - j0] * x[j];
        y[i] = acc;
    }
}

BandedLU::BandedLU(BandedMatrix a) : lu_(std::move(a)) {
    const std::size_t n = lu_.n_;
    const std::size_t w = lu_.width_;
    const std::size_t kl = lu_.lower_;
    const std::size_t ku = lu_.upper_;
    auto& d = lu_.data_;
    auto idx = [&](std::size_t i, std::size_t j) { return i * w + (j + kl - i); };

    double scale = 0.0;
    for (const auto& v : d) scale = std::max(scale, std::abs(v));
    const double tiny = scale * std::numeric_limits<double>::epsilon();

    for (std::size_t k = 0; k < n; ++k) {
        const cplx pivot = d[idx(k, k)];
        const double mag = std::abs(pivot);
        if (!std::isfinite(mag) || mag <= tiny) {
            throw LinearSolveFailure("banded LU: pivot " + format_sci(mag) + " at row " + std::to_string(k) +
                                     " (check dt and dz)");
        }
        const std::size_t i_end = std::min(n - 1, k + kl);
        const std::size_t j_end = std::min(n - 1, k + ku);
        for (std::size_t i = k + 1; i <= i_end; ++i) {
            cplx& lik = d[idx(i, k)];
            if (lik == cplx{}) continue;
            lik /= pivot;
            for (std::size_t j = k + 1; j <= j_end; ++j) d[idx(i, j)] -= lik * d[idx(k, j)];
        }
    }
}

void BandedLU::solve(std::span<cplx> b) const {
    const std::size_t n = lu_.n_;
    if (b.size() != n) throw InvalidArgument("banded solve: size mismatch");
    const std::size_t w = lu_.width_;
    const std::size_t kl = lu_.lower_;
    const std::size_t ku = lu_.upper_;
    const auto& d = lu_.data_;

    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t j0 = i >= kl ? i - kl : 0;
        const cplx* row = &d[i * w + (j0 + kl - i)];
        cplx acc{};
        for (std::size_t j = j0; j < i; ++j) acc += row[j - j0] * b[j];
        b[i] -= acc;
    }
    for (std::size_t ii = n; ii-- > 0;) {
        const std::size_t j1 = std::min(n - 1, ii + ku);
        const cplx* row = &d[ii * w + kl];
        cplx acc{};
        for (std::size_t j = ii + 1; j <= j1; ++j) acc += row[j - ii] * b[j];
        b[ii] = (b[ii] - acc) / row[0];
    }
}

}  // namespace simcav
