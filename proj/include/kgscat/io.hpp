#pragma once

#include "kgscat/grid.hpp"
#include "kgscat/series.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace kgscat {

// Shortest decimal form that round-trips to the same double.
std::string format_double(double v);

// CSV with a header row; every row must match the header width.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
// Columns t, integrand, running.
void write_series_csv(const std::filesystem::path& path, const DiagnosticSeries& s);

// Field blob: a one-line text magic "KGSFIELD 1", a one-line JSON header (grid, particles,
// representation, time, dtype "<f8", layout), then interleaved re/im little-endian doubles.
void write_field_blob(const std::filesystem::path& path, const ComplexField2P& f, double t);
struct FieldBlob {
    ComplexField2P field;
    double t = 0.0;
};
FieldBlob read_field_blob(const std::filesystem::path& path);

// FNV-1a over raw bytes; stable across runs and platforms of the same endianness.
std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t h = 14695981039346656037ull);
std::uint64_t file_checksum(const std::filesystem::path& path);
std::string hex64(std::uint64_t v);

}  // namespace kgscat
