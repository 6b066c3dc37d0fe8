#include "lob/csv.hpp"

#include "lob/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lob::csv {

std::string number(double v) {
    if (!std::isfinite(v)) throw Error("refusing to write a non-finite number");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);  // folds -0 into 0
    return buf;
}

std::string snapshot(const BookProfile& profile, const PhysicalParams& params) {
    std::string out = "# t=" + number(profile.t) + "\nS,h,p\n";
    for (std::size_t i = 0; i < profile.h.size(); ++i) {
        out += number(profile.grid.center(i)) + ',' + number(profile.h[i]) + ',' +
               number(params.theta * profile.h[i]) + '\n';
    }
    return out;
}

std::string touch_table(const Trajectory& traj) {
    std::string out = "t,S0,mass,peak_h\n";
    std::size_t j = 0;
    for (const auto& touch : traj.touch_series) {
        while (j < traj.mass_series.size() && traj.mass_series[j].t < touch.t) ++j;
        if (j >= traj.mass_series.size() || j >= traj.peak_series.size()) break;
        out += number(touch.t) + ',' + number(touch.value) + ',' + number(traj.mass_series[j].value) + ',' +
               number(traj.peak_series[j].value) + '\n';
    }
    return out;
}

std::string similarity_profile(const similarity::SimilarityProfile& profile) {
    std::string out = "s,v,v_prime\n";
    for (std::size_t i = 0; i < profile.s_grid.size(); ++i) {
        out += number(profile.s_grid[i]) + ',' + number(profile.v[i]) + ',' + number(profile.v_prime[i]) + '\n';
    }
    return out;
}

std::string text(const std::string& s) {
    std::string out = s;
    for (char& c : out) {
        if (c == ',') c = ';';
        if (c == '"' || c == '\n' || c == '\r') c = ' ';
    }
    return out;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << contents;
    if (!f) throw Error("failed writing " + path.string());
}

}  // namespace lob::csv
