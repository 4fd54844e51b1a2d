#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace simcav {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value violated a type invariant or an operation precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// Dressed frame undefined: zero detuning with the coupling switched off (R = 0).
class DegenerateFrame : public Error {
public:
    using Error::Error;
};

// Spatial grid cannot resolve the momentum content of the packet.
class GridTooCoarse : public Error {
public:
    using Error::Error;
};

// Wavefunction reached the guard band next to the periodic grid edges.
class BoundaryContact : public Error {
public:
    using Error::Error;
};

// Banded factorization hit a vanishing pivot.
class LinearSolveFailure : public Error {
public:
    using Error::Error;
};

// Scattering readout requested while probability remains inside the interaction region.
class PacketNotCleared : public Error {
public:
    using Error::Error;
};

// Short scientific rendering for error messages.
inline std::string format_sci(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3e", value);
    return buf;
}

}  // namespace simcav
