#include "qpat/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace qpat {

namespace {

void write_doubles_le(std::ofstream& os, const std::vector<double>& v) {
    static_assert(sizeof(double) == 8);
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(v.data()),
                 static_cast<std::streamsize>(v.size() * sizeof(double)));
    } else {
        for (double d : v) {
            std::uint64_t u;
            std::memcpy(&u, &d, 8);
            char b[8];
            for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((u >> (8 * i)) & 0xff);
            os.write(b, 8);
        }
    }
}

std::vector<double> read_doubles_le(std::ifstream& is, std::size_t n) {
    std::vector<double> v(n);
    if constexpr (std::endian::native == std::endian::little) {
        is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            char b[8];
            is.read(b, 8);
            std::uint64_t u = 0;
            for (int k = 0; k < 8; ++k)
                u |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[k])) << (8 * k);
            std::memcpy(&v[i], &u, 8);
        }
    }
    if (!is) throw ParseError("qpat-field: truncated payload");
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ParseError("cannot open for writing: " + path.string());
    return os;
}

} // namespace

void write_field(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream os = open_out(path);
    os << "qpat-field v1 " << f.nx() << " " << f.ny() << "\n";
    write_doubles_le(os, f.data());
}

void write_field(const std::filesystem::path& path, const PhaseField& f) {
    std::ofstream os = open_out(path);
    os << "qpat-field v1 " << f.nx() << " " << f.ny() << " " << f.n_dirs() << "\n";
    write_doubles_le(os, f.data());
}

ScalarField FieldFile::as_scalar() const {
    if (nv != 0) throw ParseError("qpat-field: expected a scalar field, found nv > 0");
    ScalarField f(nx, ny);
    f.data() = values;
    return f;
}

PhaseField FieldFile::as_phase() const {
    if (nv == 0) throw ParseError("qpat-field: expected a phase field, found scalar payload");
    PhaseField f(nx, ny, nv);
    f.data() = values;
    return f;
}

FieldFile read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw ParseError("qpat-field: missing header");
    std::istringstream hs(line);
    std::string magic, version;
    FieldFile ff;
    hs >> magic >> version >> ff.nx >> ff.ny;
    if (magic != "qpat-field" || version != "v1")
        throw ParseError("qpat-field: bad magic/version in '" + line + "'");
    if (!(hs >> ff.nv)) ff.nv = 0;
    if (ff.nx < 1 || ff.ny < 1 || ff.nv < 0) throw ParseError("qpat-field: bad dimensions");
    const std::size_t n =
        static_cast<std::size_t>(ff.nx) * ff.ny * (ff.nv == 0 ? 1 : ff.nv);
    ff.values = read_doubles_le(is, n);
    return ff;
}

void write_boundary_source(const std::filesystem::path& path, const BoundarySource& b) {
    std::ofstream os = open_out(path);
    const SpatialGrid& g = b.grid();
    os << "qpat-bsrc v1 " << g.nx() << " " << g.ny() << " " << b.n_dirs() << "\n";
    std::vector<double> buf;
    for (Side s : all_sides)
        for (int f = 0; f < b.n_faces(s); ++f)
            for (int k = 0; k < b.n_dirs(); ++k) buf.push_back(b.at(s, f, k));
    write_doubles_le(os, buf);
}

BoundarySource read_boundary_source(const std::filesystem::path& path, const SpatialGrid& g,
                                    const AngularQuadrature& q) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw ParseError("qpat-bsrc: missing header");
    std::istringstream hs(line);
    std::string magic, version;
    int nx, ny, nv;
    hs >> magic >> version >> nx >> ny >> nv;
    if (magic != "qpat-bsrc" || version != "v1")
        throw ParseError("qpat-bsrc: bad magic/version");
    if (nx != g.nx() || ny != g.ny() || nv != q.n_dirs())
        throw ParseError("qpat-bsrc: dimensions do not match grid/quadrature");
    const std::size_t n = static_cast<std::size_t>(2 * (nx + ny)) * nv;
    const std::vector<double> buf = read_doubles_le(is, n);
    BoundarySource b(g, q);
    std::size_t idx = 0;
    for (Side s : all_sides)
        for (int f = 0; f < b.n_faces(s); ++f)
            for (int k = 0; k < nv; ++k) {
                const double v = buf[idx++];
                if (b.is_inflow(s, k)) b.at(s, f, k) = v;
            }
    return b;
}

void write_field_csv(const std::filesystem::path& path, const ScalarField& f) {
    std::ofstream os = open_out(path);
    os << "j,i,value\n";
    for (int j = 0; j < f.ny(); ++j)
        for (int i = 0; i < f.nx(); ++i)
            os << j << "," << i << "," << format_double(f.at(i, j)) << "\n";
}

void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream os = open_out(path);
    for (std::size_t i = 0; i < header.size(); ++i)
        os << header[i] << (i + 1 < header.size() ? "," : "");
    os << "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << format_double(row[i]) << (i + 1 < row.size() ? "," : "");
        os << "\n";
    }
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void write_report(const std::filesystem::path& path, const Report& rep) {
    std::ofstream os = open_out(path);
    for (const auto& [k, v] : rep) os << k << " = " << v << "\n";
}

std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ParseError("cannot open for hashing: " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (is) {
        is.read(buf, sizeof(buf));
        const std::streamsize n = is.gcount();
        for (std::streamsize i = 0; i < n; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

void write_manifest(const std::filesystem::path& dir, const std::vector<std::string>& files) {
    std::ofstream os(dir / "manifest.txt");
    if (!os) throw ParseError("cannot write manifest in " + dir.string());
    for (const auto& name : files) {
        const auto p = dir / name;
        std::ostringstream hex;
        hex << std::hex << hash_file(p);
        os << name << " " << std::filesystem::file_size(p) << " fnv1a=" << hex.str() << "\n";
    }
}

} // namespace qpat
