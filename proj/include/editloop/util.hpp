// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The editloop Authors

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace editloop {

std::string trim(std::string_view s);
bool is_blank(std::string_view s);

// splitmix64 finalizer; bijective on uint64.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view s);

// Seed derivation for per-task / per-step RNG streams. Deterministic and
// independent of evaluation order.
std::uint64_t derive_seed(std::uint64_t root, std::string_view key);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t key);

// Hex-encoded SHA-256 digest of the given bytes.
std::string sha256_hex(std::string_view bytes);

std::string base64_encode(std::string_view bytes);
std::optional<std::string> base64_decode(std::string_view text);

// Round-half-up to the given number of decimals (scores are non-negative).
double round_half_up(double v, int decimals);

// Fixed-point formatting for report tables.
std::string format_fixed(double v, int decimals);

}  // namespace editloop
