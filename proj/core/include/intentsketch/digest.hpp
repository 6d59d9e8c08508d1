#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace intentsketch {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

/// 64-bit FNV-1a; stable across platforms, used for hashing embeddings and seeds.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace intentsketch
