#include "spectralflow/csvio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spectralflow {

std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t h = seed;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= bytes[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t fnv1a64(const std::string& text) { return fnv1a64(text.data(), text.size()); }

std::string checksum_hex(std::uint64_t sum) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(sum));
    return buf;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

std::uint64_t file_checksum(const std::string& path) {
    const std::string bytes = read_text_file(path);
    return fnv1a64(bytes);
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else if (c != '\r') {
            cell.push_back(c);
        }
    }
    cells.push_back(cell);
    return cells;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(path + ": empty file");
    table.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != table.header.size())
            throw std::runtime_error(path + ": ragged row '" + line + "'");
        table.rows.push_back(std::move(cells));
    }
    return table;
}

ESDSeries read_spectrum_csv(const std::string& path) {
    const CsvTable table = read_csv(path);
    const int ct = table.column("t");
    const int cr = table.column("rank");
    const int ce = table.column("eigenvalue");
    if (ct < 0 || cr < 0 || ce < 0)
        throw std::runtime_error(path + ": expected header t,rank,eigenvalue");

    ESDSeries series;
    for (const auto& row : table.rows) {
        double t = 0.0;
        long rank = 0;
        double ev = 0.0;
        try {
            t = std::stod(row[static_cast<std::size_t>(ct)]);
            rank = std::stol(row[static_cast<std::size_t>(cr)]);
            ev = std::stod(row[static_cast<std::size_t>(ce)]);
        } catch (const std::exception&) {
            throw std::runtime_error(path + ": malformed numeric cell");
        }
        if (rank == 1) {
            if (!series.frames.empty() && t <= series.frames.back().t)
                throw std::runtime_error(path + ": frame times not strictly increasing");
            series.frames.push_back({t, {}});
        }
        if (series.frames.empty() || series.frames.back().t != t)
            throw std::runtime_error(path + ": rank restarts do not match time column");
        auto& evs = series.frames.back().eigenvalues;
        if (rank != static_cast<long>(evs.size()) + 1)
            throw std::runtime_error(path + ": non-contiguous rank sequence");
        evs.push_back(ev);
    }
    if (series.frames.empty()) throw std::runtime_error(path + ": no spectra rows");
    const std::size_t dim = series.frames.front().eigenvalues.size();
    for (const auto& f : series.frames)
        if (f.eigenvalues.size() != dim)
            throw std::runtime_error(path + ": frames disagree on spectrum size");
    return series;
}

}  // namespace spectralflow
