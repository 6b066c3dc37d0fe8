#pragma once

#include "lob/core.hpp"
#include "lob/pde.hpp"
#include "lob/similarity.hpp"

#include <filesystem>
#include <string>

namespace lob::csv {

/// Round-trippable decimal form (%.17g). Throws Error for NaN or Inf so no file ever carries them.
std::string number(double v);

/// `# t=<time>` header, then `S,h,p` with p = theta * h.
std::string snapshot(const BookProfile& profile, const PhysicalParams& params);

/// `t,S0,mass,peak_h`, one row per diagnostic sample that has a touch.
std::string touch_table(const Trajectory& traj);

/// `s,v,v_prime`.
std::string similarity_profile(const similarity::SimilarityProfile& profile);

/// Text cell safe for a comma-separated file (commas and quotes replaced).
std::string text(const std::string& s);

void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace lob::csv
