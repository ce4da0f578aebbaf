#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace neuroscope {

std::string read_file(const std::filesystem::path& path);

/// Writes through a sibling temp file and renames it over `path`, so readers
/// never observe a partially written file.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

/// Lines of a UTF-8 text file with trailing '\r' removed.
std::vector<std::string> read_lines(const std::filesystem::path& path);

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);

/// 64-bit FNV-1a, used for config fingerprints in reports.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Number of worker threads: NEUROSCOPE_THREADS if set and positive,
/// otherwise std::thread::hardware_concurrency().
unsigned worker_threads();

/// Runs body(begin, end) over contiguous chunks of [0, count) on up to
/// worker_threads() threads. Exceptions from any chunk are rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace neuroscope
