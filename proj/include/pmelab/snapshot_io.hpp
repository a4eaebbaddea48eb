#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pmelab/errors.hpp"
#include "pmelab/solver.hpp"

namespace pmelab {

namespace detail {

inline std::string g17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline double header_value(const std::string& line, const std::string& key) {
    const auto pos = line.find(key + "=");
    if (pos == std::string::npos)
        throw config_error("snapshot: missing header field " + key);
    return std::strtod(line.c_str() + pos + key.size() + 1, nullptr);
}

}  // namespace detail

/// Snapshot file: '#'-prefixed header lines (t, m, dx, mass, moment), a
/// column line, then x,u rows. 17 significant digits, so values round-trip
/// bit-exactly.
inline void write_snapshot(std::ostream& out, const SolverState& s, double m) {
    const Observables obs = observables(s);
    out << "# t=" << detail::g17(s.t) << "\n";
    out << "# m=" << detail::g17(m) << "\n";
    out << "# dx=" << detail::g17(s.grid.dx) << "\n";
    out << "# mass=" << detail::g17(obs.mass) << "\n";
    out << "# moment=" << detail::g17(obs.moment) << "\n";
    out << "x,u\n";
    for (std::size_t i = 0; i < s.grid.n; ++i)
        out << detail::g17(s.grid.x(i)) << "," << detail::g17(s.u[i]) << "\n";
}

struct Snapshot {
    SolverState state;
    double m;
};

inline Snapshot read_snapshot(std::istream& in) {
    std::string line;
    double t = 0.0, m = 0.0, dx = 0.0;
    bool have_t = false, have_m = false, have_dx = false;
    std::vector<double> u;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find(" t=") != std::string::npos) {
                t = detail::header_value(line, "t");
                have_t = true;
            } else if (line.find(" m=") != std::string::npos) {
                m = detail::header_value(line, "m");
                have_m = true;
            } else if (line.find(" dx=") != std::string::npos) {
                dx = detail::header_value(line, "dx");
                have_dx = true;
            }
            continue;
        }
        if (line.rfind("x,", 0) == 0) continue;  // column header
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw config_error("snapshot: malformed row '" + line + "'");
        u.push_back(std::strtod(line.c_str() + comma + 1, nullptr));
    }
    if (!have_t || !have_m || !have_dx)
        throw config_error("snapshot: incomplete header (need t, m, dx)");
    if (u.size() < 3) throw config_error("snapshot: too few rows");
    Snapshot snap{{make_grid(dx, u.size()), t, std::move(u)}, m};
    detail::rebuild_support(snap.state);
    return snap;
}

inline void write_snapshot_file(const std::string& path, const SolverState& s,
                                double m) {
    std::ofstream out(path);
    if (!out) throw config_error("cannot open " + path + " for writing");
    write_snapshot(out, s, m);
}

inline Snapshot read_snapshot_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open " + path);
    return read_snapshot(in);
}

}  // namespace pmelab
