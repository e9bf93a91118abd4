#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "asnm/trace.hpp"

namespace asnm::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Entry point of the asnmlab tool. Module errors are reported on `err` as
/// one line "error: <Category>: <message>" with exit status 2.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string sha256_hex(std::string_view bytes);

/// Canonical traces stored one per file, named by zero-padded index.
void write_trace_dir(const std::filesystem::path& dir, const std::vector<Trace>& traces);
std::vector<Trace> read_trace_dir(const std::filesystem::path& dir);

std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, std::string_view content);

}  // namespace asnm::cli
