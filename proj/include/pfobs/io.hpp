#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pfobs/diagnostics.hpp"
#include "pfobs/errors.hpp"
#include "pfobs/phase_state.hpp"

namespace pfobs {

inline constexpr std::uint32_t kSnapshotVersion = 1;
inline constexpr char kSnapshotMagic[4] = {'P', 'F', 'O', 'B'};

struct Snapshot {
    std::uint32_t nx = 0, ny = 0;
    double h = 0.0, eps = 0.0, t = 0.0;
    std::vector<double> u;  // row-major, j slowest

    Grid grid() const {
        Grid g;
        g.nx = static_cast<int>(nx);
        g.ny = static_cast<int>(ny);
        g.h = h;
        g.domain = {0.0, nx * h, 0.0, ny * h};
        return g;
    }
};

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

template <class T>
void put_le(std::ostream& os, T value) {
    std::array<unsigned char, sizeof(T)> b;
    std::memcpy(b.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    os.write(reinterpret_cast<const char*>(b.data()), sizeof(T));
}

template <class T>
T get_le(std::istream& is) {
    std::array<unsigned char, sizeof(T)> b;
    if (!is.read(reinterpret_cast<char*>(b.data()), sizeof(T))) throw SnapshotError("snapshot: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b.begin(), b.end());
    T value;
    std::memcpy(&value, b.data(), sizeof(T));
    return value;
}

}  // namespace detail

inline void write_snapshot(const std::string& path, const Snapshot& s) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os.write(kSnapshotMagic, 4);
    detail::put_le(os, kSnapshotVersion);
    detail::put_le(os, s.nx);
    detail::put_le(os, s.ny);
    detail::put_le(os, s.h);
    detail::put_le(os, s.eps);
    detail::put_le(os, s.t);
    for (double v : s.u) detail::put_le(os, v);
    if (!os) throw std::runtime_error("write failed: " + path);
}

inline Snapshot to_snapshot(const PhaseState& st) {
    Snapshot s;
    s.nx = static_cast<std::uint32_t>(st.grid.nx);
    s.ny = static_cast<std::uint32_t>(st.grid.ny);
    s.h = st.grid.h;
    s.eps = st.eps;
    s.t = st.t;
    s.u = st.u_values();
    return s;
}

inline void write_snapshot(const std::string& path, const PhaseState& st) { write_snapshot(path, to_snapshot(st)); }

inline Snapshot read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SnapshotError("snapshot not found: " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kSnapshotMagic, 4) != 0) throw SnapshotError("snapshot: bad magic");
    const auto version = detail::get_le<std::uint32_t>(is);
    if (version != kSnapshotVersion) throw SnapshotError("snapshot: unsupported version " + std::to_string(version));
    Snapshot s;
    s.nx = detail::get_le<std::uint32_t>(is);
    s.ny = detail::get_le<std::uint32_t>(is);
    s.h = detail::get_le<double>(is);
    s.eps = detail::get_le<double>(is);
    s.t = detail::get_le<double>(is);
    if (s.nx == 0 || s.ny == 0 || static_cast<std::uint64_t>(s.nx) * s.ny > (1ull << 32))
        throw SnapshotError("snapshot: bad dimensions");
    s.u.resize(static_cast<std::size_t>(s.nx) * s.ny);
    for (double& v : s.u) v = detail::get_le<double>(is);
    return s;
}

inline const char* kCsvHeader =
    "t,energy,mu_total,xi_total_abs,xi_sup,grad_sup,density_ratio_max,interface_length,"
    "mass_balance_residual,obstacle_mass,min_gap_sub,min_gap_super,obstacle_dev";

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string csv_row(const DiagnosticsRecord& r) {
    const double cols[] = {r.t,           r.energy,           r.mu_total,          r.xi_total_abs,
                           r.xi_sup,      r.grad_sup,         r.density_ratio_max, r.interface_length,
                           r.mass_balance_residual, r.obstacle_mass, r.min_gap_sub, r.min_gap_super,
                           r.obstacle_dev};
    std::string line;
    for (std::size_t n = 0; n < std::size(cols); ++n) {
        if (n) line += ',';
        line += fmt17(cols[n]);
    }
    return line;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : os_(path) {
        if (!os_) throw std::runtime_error("cannot open " + path + " for writing");
        os_ << kCsvHeader << '\n';
    }
    void write(const DiagnosticsRecord& r) {
        os_ << csv_row(r) << '\n';
        os_.flush();
    }

private:
    std::ofstream os_;
};

}  // namespace pfobs
