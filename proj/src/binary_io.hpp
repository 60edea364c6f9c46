#pragma once

// Little-endian primitives shared by the file readers and index snapshots.

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <type_traits>

#include "rangelsh/error.hpp"

namespace rangelsh {

template <class T>
void write_le(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
}

template <class T>
bool read_le_if_available(std::istream& in, T& value) {
    std::array<char, sizeof(T)> bytes;
    in.read(bytes.data(), sizeof(T));
    if (in.gcount() == 0 && in.eof()) return false;
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) fail("truncated record");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    std::memcpy(&value, bytes.data(), sizeof(T));
    return true;
}

template <class T>
T read_le(std::istream& in, const std::string& context) {
    std::array<char, sizeof(T)> bytes;
    in.read(bytes.data(), sizeof(T));
    if (in.gcount() != static_cast<std::streamsize>(sizeof(T))) fail("truncated input in " + context);
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

void write_magic(std::ostream& out, std::string_view magic);
void expect_magic(std::istream& in, std::string_view magic);

/// 64-bit FNV-1a.
class Fnv1a {
public:
    void add_byte(unsigned char b) {
        h_ ^= b;
        h_ *= 0x100000001b3ULL;
    }
    void add_u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) add_byte(static_cast<unsigned char>(v >> (8 * i)));
    }
    std::uint64_t value() const { return h_; }

private:
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

}  // namespace rangelsh
