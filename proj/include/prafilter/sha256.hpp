#pragma once

#include <cstdint>
#include <string>

namespace prafilter {

// SHA-256 of a byte string, returned as lowercase hex. Used for the input
// and output hashes recorded in CLI stage summaries.
std::string sha256_hex(const std::string& data);

std::string sha256_file_hex(const std::string& path);

}  // namespace prafilter
