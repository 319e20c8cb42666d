#pragma once

#include <string>

#include "subharmonic/dynamics.hpp"

namespace subharmonic {

// Writes to a sibling temp file, then renames over path.
void write_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

// Binary layout, all little-endian:
//   "TRPL" | u8 version=1 | u8 kind (1 trajectory, 2 histogram) | u16 0
//   u32 metadata length | metadata bytes (free text, JSON by convention)
// trajectory: f64 dt | u64 record_every | f64 |B2| | f64 phiB | u8 has_seed | u64 seed
//             u64 n | n x (f64 re a1, f64 im a1, f64 re a2, f64 im a2)
// histogram:  f64 fs | u32 len | units bytes | u32 ni+1 | f64 I edges | u32 nq+1 | f64 Q edges
//             | u64 counts, I-major
inline constexpr unsigned char kBinaryVersion = 1;

std::string trajectory_to_binary(const Trajectory& t, const std::string& metadata = "");
Trajectory trajectory_from_binary(const std::string& bytes, std::string* metadata = nullptr);
std::string histogram_to_binary(const Histogram2D& h, const std::string& metadata = "");
Histogram2D histogram_from_binary(const std::string& bytes, std::string* metadata = nullptr);

// CSV: '#'-prefixed metadata lines, then a header row carrying units.
std::string trajectory_to_csv(const Trajectory& t, const std::string& metadata = "");
Trajectory trajectory_from_csv(const std::string& text);
std::string histogram_to_csv(const Histogram2D& h, const std::string& metadata = "");
Histogram2D histogram_from_csv(const std::string& text);

std::string comment_block(const std::string& text);

}  // namespace subharmonic
