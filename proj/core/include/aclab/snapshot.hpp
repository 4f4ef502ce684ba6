#pragma once

#include "aclab/connection1d.hpp"
#include "aclab/energy.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace aclab {

/// Grid snapshot: the line "ACF1", a decimal header line
/// "nx ny m eps l h dx", then nx*ny*m little-endian binary64 values in
/// row-major node order (components innermost). Domains without flat parts
/// store l = h = 0.
struct GridSnapshot {
    int nx = 0;
    int ny = 0;
    int m = 1;
    double eps = 0.0;
    double l = 0.0;
    double h = 0.0;
    double dx = 0.0;
    std::vector<double> values;
};

/// 1D variant: "ACF1", the header "profile n m s0 ds", then n*m values.
struct ProfileSnapshot {
    int n = 0;
    int m = 1;
    double s0 = 0.0;
    double ds = 0.0;
    std::vector<double> values;
};

std::string encode_snapshot(const GridSnapshot& s);
std::string encode_snapshot(const ProfileSnapshot& s);

/// Raises FormatError on a bad magic or header, with the byte offset, and on
/// truncation with the number of missing bytes; UnsupportedVersionError for
/// a later "ACF<n>" magic.
GridSnapshot decode_grid_snapshot(const std::string& bytes);
ProfileSnapshot decode_profile_snapshot(const std::string& bytes);

GridSnapshot snapshot_of(const Field2D& f);
ProfileSnapshot snapshot_of(const Profile1D& p);

/// Rebuilds a field on `d`; the grid shape, dx and m must match.
Field2D field_from_snapshot(const GridSnapshot& s, DomainPtr d);
Profile1D profile_from_snapshot(const ProfileSnapshot& s);

void write_snapshot(const std::filesystem::path& path, const Field2D& f);
void write_snapshot(const std::filesystem::path& path, const Profile1D& p);
GridSnapshot read_grid_snapshot(const std::filesystem::path& path);
ProfileSnapshot read_profile_snapshot(const std::filesystem::path& path);

/// True when the file header announces a 1D profile.
bool is_profile_snapshot(const std::filesystem::path& path);

/// CSV with columns x, y, u1..um over nodes with positive weight.
void write_field_csv(const std::filesystem::path& path, const Field2D& f);
/// CSV with columns s, v1..vm.
void write_profile_csv(const std::filesystem::path& path, const Profile1D& p);

std::string read_file(const std::filesystem::path& path);
/// Writes through a temporary file and a rename.
void write_file(const std::filesystem::path& path, const std::string& bytes);

}  // namespace aclab
