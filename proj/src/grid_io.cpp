#include <bit>
#include <fstream>

#include <json.hpp>

#include "ltlab/errors.hpp"
#include "ltlab/grid_io.hpp"

namespace ltlab {

static_assert(std::endian::native == std::endian::little, "grid files assume a little-endian host");

namespace {

using nlohmann::json;

void write_sidecar(const std::filesystem::path& data, const BoxSpec& box, const std::string& dtype, int N) {
    json j;
    j["d"] = box.d;
    j["points"] = box.points;
    j["lo"] = box.lo;
    j["hi"] = box.hi;
    j["dtype"] = dtype;
    if (N > 0) j["N"] = N;
    std::ofstream f(sidecar_path(data));
    if (!f) throw IoError("cannot write " + sidecar_path(data).string());
    f << j.dump(2) << '\n';
}

void write_bytes(const std::filesystem::path& data, const void* p, std::size_t n) {
    std::ofstream f(data, std::ios::binary);
    if (!f) throw IoError("cannot write " + data.string());
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    if (!f) throw IoError("short write to " + data.string());
}

void read_bytes(const std::filesystem::path& data, void* p, std::size_t n) {
    std::ifstream f(data, std::ios::binary | std::ios::ate);
    if (!f) throw IoError("cannot open " + data.string());
    if (static_cast<std::size_t>(f.tellg()) != n)
        throw IoError("size mismatch in " + data.string() + ": expected " + std::to_string(n) + " bytes");
    f.seekg(0);
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!f) throw IoError("short read from " + data.string());
}

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& data) {
    return std::filesystem::path(data.string() + ".json");
}

GridHeader read_header(const std::filesystem::path& data) {
    std::ifstream f(sidecar_path(data));
    if (!f) throw IoError("cannot open " + sidecar_path(data).string());
    json j;
    try {
        f >> j;
        GridHeader h;
        h.box.d = j.at("d").get<int>();
        h.box.points = j.at("points").get<std::vector<int>>();
        h.box.lo = j.at("lo").get<std::vector<double>>();
        h.box.hi = j.at("hi").get<std::vector<double>>();
        h.dtype = j.at("dtype").get<std::string>();
        h.N = j.value("N", 0);
        h.box.validate();
        return h;
    } catch (const json::exception& e) {
        throw IoError("malformed sidecar " + sidecar_path(data).string() + ": " + e.what());
    }
}

void write_grid(const std::filesystem::path& data, const GridFunction& u) {
    write_sidecar(data, u.box, "c128", 0);
    write_bytes(data, u.values.data(), u.values.size() * sizeof(cplx));
}

GridFunction read_grid(const std::filesystem::path& data) {
    const auto h = read_header(data);
    if (h.dtype != "c128") throw IoError("expected dtype c128 in " + data.string());
    GridFunction u(h.box);
    read_bytes(data, u.values.data(), u.values.size() * sizeof(cplx));
    if (!u.finite()) throw IoError("non-finite values in " + data.string());
    return u;
}

void write_mask(const std::filesystem::path& data, const DomainMask& m) {
    write_sidecar(data, m.box, "u8", 0);
    write_bytes(data, m.mask.data(), m.mask.size());
}

DomainMask read_mask(const std::filesystem::path& data) {
    const auto h = read_header(data);
    if (h.dtype != "u8") throw IoError("expected dtype u8 in " + data.string());
    DomainMask m(h.box);
    read_bytes(data, m.mask.data(), m.mask.size());
    for (auto& v : m.mask) v = v ? 1 : 0;
    return m;
}

void write_state_raw(const std::filesystem::path& data, const BoxSpec& box, int N, const std::vector<cplx>& values) {
    write_sidecar(data, box, "c128", N);
    write_bytes(data, values.data(), values.size() * sizeof(cplx));
}

std::vector<cplx> read_state_raw(const std::filesystem::path& data, GridHeader& header) {
    header = read_header(data);
    if (header.dtype != "c128" || header.N < 1) throw IoError("state file needs dtype c128 and N >= 1");
    std::size_t n = 1;
    for (int k = 0; k < header.N; ++k) n *= header.box.size();
    std::vector<cplx> v(n);
    read_bytes(data, v.data(), n * sizeof(cplx));
    return v;
}

}  // namespace ltlab
