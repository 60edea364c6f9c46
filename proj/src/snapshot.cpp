#include "rangelsh/snapshot.hpp"

#include <fstream>
#include <string>

#include "rangelsh/alsh_index.hpp"
#include "rangelsh/error.hpp"
#include "rangelsh/range_index.hpp"
#include "rangelsh/simple_index.hpp"

namespace rangelsh {

void save_index(const MipsIndex& index, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail_io("cannot open " + path.string() + " for writing");
    if (auto* s = dynamic_cast<const SimpleIndex*>(&index)) {
        s->save(out);
    } else if (auto* r = dynamic_cast<const RangeIndex*>(&index)) {
        r->save(out);
    } else if (auto* a = dynamic_cast<const AlshIndex*>(&index)) {
        a->save(out);
    } else if (auto* ra = dynamic_cast<const RangedAlshIndex*>(&index)) {
        ra->save(out);
    } else {
        fail_invariant("unknown index type");
    }
    out.flush();
    if (!out) fail_io("write failed for " + path.string());
}

std::unique_ptr<MipsIndex> load_index(const std::filesystem::path& path, std::shared_ptr<const DatasetView> data) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_io("cannot open " + path.string());
    std::string magic(8, '\0');
    in.read(magic.data(), magic.size());
    if (in.gcount() != 8) fail("snapshot " + path.string() + " is truncated");
    in.seekg(0);
    if (magic == "MIPSSIMP") return std::make_unique<SimpleIndex>(SimpleIndex::load(in, std::move(data)));
    if (magic == "MIPSRANG") return std::make_unique<RangeIndex>(RangeIndex::load(in, std::move(data)));
    if (magic == "MIPSALSH") return std::make_unique<AlshIndex>(AlshIndex::load(in, std::move(data)));
    if (magic == "MIPSRALS") return std::make_unique<RangedAlshIndex>(RangedAlshIndex::load(in, std::move(data)));
    fail("unrecognized snapshot format in " + path.string());
}

}  // namespace rangelsh
