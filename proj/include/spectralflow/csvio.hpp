#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spectralflow/spectra.hpp"

namespace spectralflow {

// FNV-1a 64-bit; the run manifest stores these as 16 hex digits.
std::uint64_t fnv1a64(const void* data, std::size_t len,
                      std::uint64_t seed = 14695981039346656037ull);
std::uint64_t fnv1a64(const std::string& text);
std::string checksum_hex(std::uint64_t sum);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::uint64_t file_checksum(const std::string& path);

// Header row + string cells; quoting is not supported (none of our writers
// emit quoted fields).
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const;  // -1 when absent
};

CsvTable read_csv(const std::string& path);

// Inverse of write_spectrum_csv (schema t,rank,eigenvalue). Rows must be
// grouped by strictly increasing t with 1-based contiguous ranks; every
// frame must hold the same number of eigenvalues.
ESDSeries read_spectrum_csv(const std::string& path);

}  // namespace spectralflow
