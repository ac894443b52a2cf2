#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdrima/digest.hpp"

namespace pdrima {

struct DecodeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Canonical encoding rules shared by every file format and wire message:
/// fixed-width big-endian integers, 4-byte length-prefixed byte strings,
/// 4-byte count-prefixed lists, raw 16-byte UUIDs, raw 32-byte digests,
/// and a 1-byte present/absent tag for optionals.
class Encoder {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u32(std::uint32_t v);
    void u64(std::uint64_t v);
    void raw(std::span<const std::uint8_t> data);
    void bytes(std::span<const std::uint8_t> data); // length-prefixed
    void text(const std::string& s);                // UTF-8 as byte string
    void digest(const Digest& d) { raw({d.bytes.data(), d.bytes.size()}); }
    void uuid(const Uuid& u) { raw({u.data(), u.size()}); }

    template <typename T, typename F>
    void optional(const std::optional<T>& v, F&& put) {
        if (v.has_value()) {
            u8(1);
            put(*v);
        } else {
            u8(0);
        }
    }

    const std::vector<std::uint8_t>& out() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class Decoder {
public:
    explicit Decoder(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t u8();
    std::uint32_t u32();
    std::uint64_t u64();
    std::vector<std::uint8_t> raw(std::size_t n);
    std::vector<std::uint8_t> bytes();
    std::string text();
    Digest digest();
    Uuid uuid();

    template <typename T, typename F>
    std::optional<T> optional(F&& get) {
        switch (u8()) {
        case 0: return std::nullopt;
        case 1: return get();
        default: throw DecodeError("bad optional tag");
        }
    }

    std::size_t remaining() const { return data_.size() - pos_; }
    /// Throws if trailing bytes remain.
    void finish() const {
        if (remaining() != 0) throw DecodeError("trailing bytes");
    }

private:
    void need(std::size_t n) const {
        if (remaining() < n) throw DecodeError("truncated input");
    }
    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

} // namespace pdrima
