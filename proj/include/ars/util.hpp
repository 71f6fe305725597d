#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace ars {

using PaperId = std::int64_t;
using AuthorId = std::int64_t;
using VenueId = std::int64_t;

// 64-bit FNV-1a. Used for provenance hashes written into artifacts, so the
// value must not depend on the standard library implementation.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hash_hex(std::uint64_t h);

// Independent seed for a sub-task, derived from a base seed and a tag.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);
std::string file_hash(const std::filesystem::path& path);

// printf("%.6g") without locale surprises.
std::string format_g6(double v);

} // namespace ars
