#include "aclab/snapshot.hpp"

#include "aclab/error.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace aclab {

namespace {

constexpr char kMagic[] = "ACF1";

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void put_values(std::string& out, const std::vector<double>& v) {
    const std::size_t at = out.size();
    out.resize(at + v.size() * 8);
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::uint64_t bits = std::bit_cast<std::uint64_t>(v[i]);
        for (int b = 0; b < 8; ++b) out[at + 8 * i + b] = static_cast<char>((bits >> (8 * b)) & 0xffu);
    }
}

std::vector<double> get_values(const std::string& in, std::size_t at, std::size_t count) {
    const std::size_t need = count * 8;
    const std::size_t have = in.size() > at ? in.size() - at : 0;
    if (have < need)
        throw FormatError("snapshot truncated: " + std::to_string(need - have) + " bytes missing after offset " +
                          std::to_string(in.size()));
    if (have > need)
        throw FormatError("snapshot has " + std::to_string(have - need) + " trailing bytes at offset " +
                          std::to_string(at + need));
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint64_t bits = 0;
        for (int b = 0; b < 8; ++b)
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[at + 8 * i + b])) << (8 * b);
        v[i] = std::bit_cast<double>(bits);
    }
    return v;
}

// Checks the magic line and returns the header line and the offset of the payload.
std::string read_header(const std::string& in, std::size_t& payload) {
    if (in.size() < 5) throw FormatError("snapshot truncated: missing magic at offset 0");
    if (in.compare(0, 3, "ACF") != 0) throw FormatError("bad snapshot magic at offset 0");
    if (in[3] != '1') {
        if (std::isdigit(static_cast<unsigned char>(in[3])))
            throw UnsupportedVersionError(std::string("unsupported snapshot version ") + in.substr(0, 4));
        throw FormatError("bad snapshot magic at offset 0");
    }
    if (in[4] != '\n') throw FormatError("bad snapshot magic at offset 4");
    const std::size_t eol = in.find('\n', 5);
    if (eol == std::string::npos) throw FormatError("snapshot truncated: header line unterminated at offset 5");
    payload = eol + 1;
    return in.substr(5, eol - 5);
}

void header_error(const std::string& what) { throw FormatError("bad snapshot header at offset 5: " + what); }

int positive_int(std::istringstream& is, const char* name) {
    long long v = 0;
    if (!(is >> v) || v <= 0 || v > (1ll << 31)) header_error(std::string("invalid ") + name);
    return static_cast<int>(v);
}

double finite(std::istringstream& is, const char* name) {
    std::string tok;
    if (!(is >> tok)) header_error(std::string("missing ") + name);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || !std::isfinite(v)) header_error(std::string("invalid ") + name);
    return v;
}

void no_more(std::istringstream& is) {
    std::string extra;
    if (is >> extra) header_error("unexpected token '" + extra + "'");
}

}  // namespace

std::string encode_snapshot(const GridSnapshot& s) {
    if (s.values.size() != static_cast<std::size_t>(s.nx) * s.ny * s.m)
        throw DomainError("snapshot: value count does not match the header");
    std::string out = std::string(kMagic) + "\n" + std::to_string(s.nx) + " " + std::to_string(s.ny) + " " +
                      std::to_string(s.m) + " " + num(s.eps) + " " + num(s.l) + " " + num(s.h) + " " + num(s.dx) +
                      "\n";
    put_values(out, s.values);
    return out;
}

std::string encode_snapshot(const ProfileSnapshot& s) {
    if (s.values.size() != static_cast<std::size_t>(s.n) * s.m)
        throw DomainError("snapshot: value count does not match the header");
    std::string out = std::string(kMagic) + "\nprofile " + std::to_string(s.n) + " " + std::to_string(s.m) + " " +
                      num(s.s0) + " " + num(s.ds) + "\n";
    put_values(out, s.values);
    return out;
}

GridSnapshot decode_grid_snapshot(const std::string& bytes) {
    std::size_t at = 0;
    std::istringstream is(read_header(bytes, at));
    GridSnapshot s;
    s.nx = positive_int(is, "nx");
    s.ny = positive_int(is, "ny");
    s.m = positive_int(is, "m");
    s.eps = finite(is, "eps");
    s.l = finite(is, "l");
    s.h = finite(is, "h");
    s.dx = finite(is, "dx");
    no_more(is);
    s.values = get_values(bytes, at, static_cast<std::size_t>(s.nx) * s.ny * s.m);
    return s;
}

ProfileSnapshot decode_profile_snapshot(const std::string& bytes) {
    std::size_t at = 0;
    std::istringstream is(read_header(bytes, at));
    std::string tag;
    if (!(is >> tag) || tag != "profile") header_error("not a profile snapshot");
    ProfileSnapshot s;
    s.n = positive_int(is, "n");
    s.m = positive_int(is, "m");
    s.s0 = finite(is, "s0");
    s.ds = finite(is, "ds");
    no_more(is);
    s.values = get_values(bytes, at, static_cast<std::size_t>(s.n) * s.m);
    return s;
}

GridSnapshot snapshot_of(const Field2D& f) {
    const Domain2D& d = *f.domain;
    GridSnapshot s;
    s.nx = d.grid.nx;
    s.ny = d.grid.ny;
    s.m = f.m;
    s.eps = f.eps;
    s.l = d.has_rectangle ? d.l : 0.0;
    s.h = d.has_rectangle ? d.h : 0.0;
    s.dx = d.grid.dx;
    s.values = f.values;
    return s;
}

ProfileSnapshot snapshot_of(const Profile1D& p) {
    return {static_cast<int>(p.size()), p.m, p.s0, p.ds, p.values};
}

Field2D field_from_snapshot(const GridSnapshot& s, DomainPtr d) {
    if (!d) throw DomainError("field_from_snapshot: missing domain");
    if (s.nx != d->grid.nx || s.ny != d->grid.ny || s.dx != d->grid.dx)
        throw FormatError("snapshot grid " + std::to_string(s.nx) + "x" + std::to_string(s.ny) +
                          " does not match the domain grid");
    Field2D f;
    f.domain = std::move(d);
    f.m = s.m;
    f.eps = s.eps;
    f.values = s.values;
    return f;
}

Profile1D profile_from_snapshot(const ProfileSnapshot& s) {
    Profile1D p;
    p.s0 = s.s0;
    p.ds = s.ds;
    p.m = s.m;
    p.values = s.values;
    return p;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("read failed: " + path.string());
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& bytes) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw IoError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
}

void write_snapshot(const std::filesystem::path& path, const Field2D& f) {
    write_file(path, encode_snapshot(snapshot_of(f)));
}

void write_snapshot(const std::filesystem::path& path, const Profile1D& p) {
    write_file(path, encode_snapshot(snapshot_of(p)));
}

GridSnapshot read_grid_snapshot(const std::filesystem::path& path) { return decode_grid_snapshot(read_file(path)); }

ProfileSnapshot read_profile_snapshot(const std::filesystem::path& path) {
    return decode_profile_snapshot(read_file(path));
}

bool is_profile_snapshot(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    std::size_t at = 0;
    const std::string header = read_header(bytes, at);
    return header.rfind("profile", 0) == 0;
}

void write_field_csv(const std::filesystem::path& path, const Field2D& f) {
    const Domain2D& d = *f.domain;
    const Grid& g = d.grid;
    std::string out = "x,y";
    for (int c = 0; c < f.m; ++c) out += ",u" + std::to_string(c + 1);
    out += "\n";
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const std::size_t k = g.index(i, j);
            if (d.node_weight[k] <= 0.0) continue;
            out += num(g.x(i)) + "," + num(g.y(j));
            for (int c = 0; c < f.m; ++c) out += "," + num(f.values[k * f.m + c]);
            out += "\n";
        }
    write_file(path, out);
}

void write_profile_csv(const std::filesystem::path& path, const Profile1D& p) {
    std::string out = "s";
    for (int c = 0; c < p.m; ++c) out += ",v" + std::to_string(c + 1);
    out += "\n";
    for (std::size_t i = 0; i < p.size(); ++i) {
        out += num(p.s(i));
        for (int c = 0; c < p.m; ++c) out += "," + num(p.values[i * p.m + c]);
        out += "\n";
    }
    write_file(path, out);
}

}  // namespace aclab
