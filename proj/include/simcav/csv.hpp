#pragma once

#include "simcav/errors.hpp"
#include "simcav/observables.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace simcav {

class IoError : public Error {
public:
    using Error::Error;
};

// Shortest decimal that parses back to the same double ("nan", "inf", "-inf" for non-finite).
std::string format_double(double value);

inline constexpr const char* kSeriesHeader = "t,norm,W,pop_plus,pop_minus,mean_z,mean_p,reflect,transmit";

// One row per snapshot, LF line endings. Throws InvalidArgument on an empty
// series and IoError (naming the path) when the file cannot be written.
void emit_csv(const ObservableSeries& series, const std::filesystem::path& path);

// Inverse of emit_csv for the columns it writes.
ObservableSeries read_series_csv(const std::filesystem::path& path);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_table(const Table& table, const std::filesystem::path& path);

}  // namespace simcav
