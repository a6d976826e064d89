#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "qpat/boundary.hpp"
#include "qpat/field.hpp"

namespace qpat {

/// "qpat-field v1" container: one ASCII header line
///   qpat-field v1 <nx> <ny> [<nv>]
/// followed by row-major little-endian IEEE float64 payload (i fastest,
/// direction innermost when <nv> is present).
void write_field(const std::filesystem::path& path, const ScalarField& f);
void write_field(const std::filesystem::path& path, const PhaseField& f);

struct FieldFile {
    int nx = 0;
    int ny = 0;
    int nv = 0; // 0 for scalar payloads
    std::vector<double> values;

    ScalarField as_scalar() const;
    PhaseField as_phase() const;
};
FieldFile read_field(const std::filesystem::path& path);

/// Boundary-source container "qpat-bsrc v1 <nx> <ny> <nv>": sides in the
/// order south, north, west, east, each face-major with direction fastest.
void write_boundary_source(const std::filesystem::path& path, const BoundarySource& b);
BoundarySource read_boundary_source(const std::filesystem::path& path, const SpatialGrid& g,
                                    const AngularQuadrature& q);

/// CSV with the same row-major ordering as the binary container.
void write_field_csv(const std::filesystem::path& path, const ScalarField& f);

/// Generic CSV writer: header + rows.
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

/// Structured key-value report, one "key = value" per line.
using Report = std::vector<std::pair<std::string, std::string>>;
void write_report(const std::filesystem::path& path, const Report& rep);
std::string format_double(double v);

/// FNV-1a 64-bit content hash.
std::uint64_t fnv1a64(const void* data, std::size_t n);
std::uint64_t hash_file(const std::filesystem::path& path);

/// Writes dir/manifest.txt enumerating the artifacts with size and hash.
void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files);

} // namespace qpat
