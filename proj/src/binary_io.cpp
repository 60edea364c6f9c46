#include "binary_io.hpp"

namespace rangelsh {

void write_magic(std::ostream& out, std::string_view magic) { out.write(magic.data(), magic.size()); }

void expect_magic(std::istream& in, std::string_view magic) {
    std::string got(magic.size(), '\0');
    in.read(got.data(), got.size());
    if (in.gcount() != static_cast<std::streamsize>(magic.size()) || got != magic) {
        fail("bad snapshot magic: expected " + std::string(magic));
    }
}

}  // namespace rangelsh
