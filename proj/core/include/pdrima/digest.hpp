#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace pdrima {

/// 32-byte hash value. The all-zero digest is the chain seed and the
/// initial state of every vPCR.
struct Digest {
    std::array<std::uint8_t, 32> bytes{};

    static Digest zero() { return Digest{}; }
    bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }
    auto operator<=>(const Digest&) const = default;
};

using Uuid = std::array<std::uint8_t, 16>;

std::string to_hex(const std::uint8_t* data, std::size_t len);
std::string to_hex(const Digest& d);
std::string to_hex(const Uuid& u);

/// Parses an even-length hex string; throws std::invalid_argument on bad input.
std::vector<std::uint8_t> from_hex(const std::string& hex);
Digest digest_from_hex(const std::string& hex);
Uuid uuid_from_hex(const std::string& hex);

} // namespace pdrima
