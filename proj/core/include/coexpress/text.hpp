// SPDX-FileCopyrightText: © 2026 The coexpress Authors
//
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coexpress {

/// Split on a single delimiter character. Empty fields are kept.
std::vector<std::string> split(std::string_view line, char delim);

std::string_view trim(std::string_view s) noexcept;

std::string join(const std::vector<std::string>& parts, std::string_view sep);

/// Locale-independent parse of a whole field; nullopt on any trailing junk.
std::optional<double> parse_double(std::string_view s) noexcept;

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

/// Open a file for writing, creating parent directories. Throws IoError.
std::ofstream open_output(const std::filesystem::path& path);

std::ifstream open_input(const std::filesystem::path& path);

}  // namespace coexpress
