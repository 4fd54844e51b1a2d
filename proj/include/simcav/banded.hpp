#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace simcav {

using cplx = std::complex<double>;

// Square complex matrix with `lower` sub- and `upper` super-diagonals, stored
// row by row.
class BandedMatrix {
public:
    BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper);

    std::size_t size() const noexcept { return n_; }
    std::size_t lower() const noexcept { return lower_; }
    std::size_t upper() const noexcept { return upper_; }

    bool in_band(std::size_t i, std::size_t j) const noexcept;
    cplx& at(std::size_t i, std::size_t j);
    cplx get(std::size_t i, std::size_t j) const noexcept;

    // y = A x
    void multiply(std::span<const cplx> x, std::span<cplx> y) const;

private:
    friend class BandedLU;

    std::size_t n_;
    std::size_t lower_;
    std::size_t upper_;
    std::size_t width_;
    std::vector<cplx> data_;
};

// LU factorization without pivoting. Intended for matrices whose Hermitian
// part is positive definite (e.g. I + i dt/2 H with H Hermitian), for which
// every leading minor is non-singular. Throws LinearSolveFailure on a
// vanishing or non-finite pivot.
class BandedLU {
public:
    explicit BandedLU(BandedMatrix a);

    std::size_t size() const noexcept { return lu_.size(); }

    // Overwrites b with A^{-1} b.
    void solve(std::span<cplx> b) const;

private:
    BandedMatrix lu_;
};

}  // namespace simcav
