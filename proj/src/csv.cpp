#include "simcav/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace simcav {

namespace {

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
}

void write_row(std::ostream& out, const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out << ',';
        out << format_double(values[i]);
    }
    out << '\n';
}

double parse_double(std::string_view cell, const std::filesystem::path& path, std::size_t line) {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw IoError(path.string() + ":" + std::to_string(line) + ": bad number '" + std::string(cell) + "'");
    }
    return value;
}

}  // namespace

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ptr);
}

void emit_csv(const ObservableSeries& series, const std::filesystem::path& path) {
    if (series.empty()) throw InvalidArgument("emit_csv: series is empty");
    auto out = open_for_write(path);
    out << kSeriesHeader << '\n';
    for (std::size_t i = 0; i < series.size(); ++i) {
        write_row(out, {series.times[i], series.norm[i], series.inversion[i], series.pop_plus[i], series.pop_minus[i],
                        series.mean_z[i], series.mean_p[i], series.reflect[i], series.transmit[i]});
    }
    finish(out, path);
}

ObservableSeries read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kSeriesHeader) {
        throw IoError(path.string() + ": missing or unexpected header");
    }
    ObservableSeries s;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<double> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            const std::string_view cell(line.data() + start, (comma == std::string::npos ? line.size() : comma) - start);
            cells.push_back(parse_double(cell, path, line_no));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (cells.size() != 9) throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 9 columns");
        s.times.push_back(cells[0]);
        s.norm.push_back(cells[1]);
        s.inversion.push_back(cells[2]);
        s.pop_plus.push_back(cells[3]);
        s.pop_minus.push_back(cells[4]);
        s.mean_z.push_back(cells[5]);
        s.mean_p.push_back(cells[6]);
        s.reflect.push_back(cells[7]);
        s.transmit.push_back(cells[8]);
    }
    return s;
}

void write_table(const Table& table, const std::filesystem::path& path) {
    auto out = open_for_write(path);
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out << ',';
        out << table.columns[i];
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.columns.size()) throw InvalidArgument("write_table: row width mismatch");
        write_row(out, row);
    }
    finish(out, path);
}

}  // namespace simcav
