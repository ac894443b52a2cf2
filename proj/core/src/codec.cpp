#include "pdrima/codec.hpp"

#include <cstring>

namespace pdrima {

namespace {

char hex_digit(unsigned v) { return v < 10 ? char('0' + v) : char('a' + v - 10); }

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

} // namespace

std::string to_hex(const std::uint8_t* data, std::size_t len) {
    std::string s;
    s.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        s.push_back(hex_digit(data[i] >> 4));
        s.push_back(hex_digit(data[i] & 0xf));
    }
    return s;
}

std::string to_hex(const Digest& d) { return to_hex(d.bytes.data(), d.bytes.size()); }
std::string to_hex(const Uuid& u) { return to_hex(u.data(), u.size()); }

std::vector<std::uint8_t> from_hex(const std::string& hex) {
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd-length hex string");
    std::vector<std::uint8_t> out(hex.size() / 2);
    for (std::size_t i = 0; i < out.size(); ++i) {
        int hi = hex_value(hex[2 * i]);
        int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex digit");
        out[i] = std::uint8_t(hi << 4 | lo);
    }
    return out;
}

Digest digest_from_hex(const std::string& hex) {
    auto v = from_hex(hex);
    if (v.size() != 32) throw std::invalid_argument("digest hex must be 64 chars");
    Digest d;
    std::memcpy(d.bytes.data(), v.data(), 32);
    return d;
}

Uuid uuid_from_hex(const std::string& hex) {
    auto v = from_hex(hex);
    if (v.size() != 16) throw std::invalid_argument("uuid hex must be 32 chars");
    Uuid u;
    std::memcpy(u.data(), v.data(), 16);
    return u;
}

void Encoder::u32(std::uint32_t v) {
    buf_.push_back(std::uint8_t(v >> 24));
    buf_.push_back(std::uint8_t(v >> 16));
    buf_.push_back(std::uint8_t(v >> 8));
    buf_.push_back(std::uint8_t(v));
}

void Encoder::u64(std::uint64_t v) {
    u32(std::uint32_t(v >> 32));
    u32(std::uint32_t(v));
}

void Encoder::raw(std::span<const std::uint8_t> data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
}

void Encoder::bytes(std::span<const std::uint8_t> data) {
    u32(std::uint32_t(data.size()));
    raw(data);
}

void Encoder::text(const std::string& s) {
    bytes({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
}

std::uint8_t Decoder::u8() {
    need(1);
    return data_[pos_++];
}

std::uint32_t Decoder::u32() {
    need(4);
    std::uint32_t v = std::uint32_t(data_[pos_]) << 24 |
                      std::uint32_t(data_[pos_ + 1]) << 16 |
                      std::uint32_t(data_[pos_ + 2]) << 8 |
                      std::uint32_t(data_[pos_ + 3]);
    pos_ += 4;
    return v;
}

std::uint64_t Decoder::u64() {
    std::uint64_t hi = u32();
    return hi << 32 | u32();
}

std::vector<std::uint8_t> Decoder::raw(std::size_t n) {
    need(n);
    std::vector<std::uint8_t> out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

std::vector<std::uint8_t> Decoder::bytes() {
    std::uint32_t n = u32();
    return raw(n);
}

std::string Decoder::text() {
    auto v = bytes();
    return std::string(v.begin(), v.end());
}

Digest Decoder::digest() {
    need(32);
    Digest d;
    std::memcpy(d.bytes.data(), data_.data() + pos_, 32);
    pos_ += 32;
    return d;
}

Uuid Decoder::uuid() {
    need(16);
    Uuid u;
    std::memcpy(u.data(), data_.data() + pos_, 16);
    pos_ += 16;
    return u;
}

} // namespace pdrima
