#include "hydrofuse/raster_io.hpp"

#include "hydrofuse/errors.hpp"
#include "hydrofuse/keyvalue.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace hydrofuse {

namespace fs = std::filesystem;

namespace {

fs::path stem_of(const fs::path& path) {
    const auto ext = path.extension();
    if (ext == ".hdr" || ext == ".bin") return fs::path(path).replace_extension();
    return path;
}

void encode_le(float v, unsigned char* out) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    out[0] = static_cast<unsigned char>(bits & 0xffu);
    out[1] = static_cast<unsigned char>((bits >> 8) & 0xffu);
    out[2] = static_cast<unsigned char>((bits >> 16) & 0xffu);
    out[3] = static_cast<unsigned char>((bits >> 24) & 0xffu);
}

float decode_le(const unsigned char* in) {
    const std::uint32_t bits = static_cast<std::uint32_t>(in[0]) | (static_cast<std::uint32_t>(in[1]) << 8) |
                               (static_cast<std::uint32_t>(in[2]) << 16) |
                               (static_cast<std::uint32_t>(in[3]) << 24);
    return std::bit_cast<float>(bits);
}

}  // namespace

fs::path header_path(const fs::path& path) {
    auto p = stem_of(path);
    p += ".hdr";
    return p;
}

fs::path data_path(const fs::path& path) {
    auto p = stem_of(path);
    p += ".bin";
    return p;
}

RasterGrid read_raster(const fs::path& path) {
    const fs::path hdr = header_path(path);
    const fs::path bin = data_path(path);
    if (!fs::exists(hdr)) throw IoError("missing raster header " + hdr.string());
    if (!fs::exists(bin)) throw IoError("missing raster data " + bin.string());

    KeyValueList entries;
    try {
        entries = read_key_value_file(hdr);
    } catch (const ConfigError& e) {
        throw IoError(e.what());
    }

    std::map<std::string, std::string> kv;
    static const char* const known[] = {"samples", "lines",      "bands", "data_type", "interleave",
                                        "pixel_size", "ulx",     "uly",   "band_names", "nodata"};
    for (auto& [k, v] : entries) {
        if (std::find(std::begin(known), std::end(known), k) == std::end(known)) {
            throw IoError(hdr.string() + ": unknown header key '" + k + "'");
        }
        if (!kv.emplace(k, v).second) throw IoError(hdr.string() + ": duplicate header key '" + k + "'");
    }
    auto require = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw IoError(hdr.string() + ": missing header key '" + key + "'");
        return it->second;
    };

    GridGeometry g;
    long long bands = 0;
    std::optional<float> nodata;
    std::vector<std::string> names;
    try {
        g.width = static_cast<int>(parse_int(require("samples"), "samples"));
        g.height = static_cast<int>(parse_int(require("lines"), "lines"));
        bands = parse_int(require("bands"), "bands");
        g.pixel_size = parse_double(require("pixel_size"), "pixel_size");
        g.origin_x = parse_double(require("ulx"), "ulx");
        g.origin_y = parse_double(require("uly"), "uly");
        if (auto it = kv.find("nodata"); it != kv.end()) {
            nodata = static_cast<float>(parse_double(it->second, "nodata"));
        }
    } catch (const ConfigError& e) {
        throw IoError(hdr.string() + ": " + e.what());
    }
    if (require("data_type") != "float32le") throw IoError(hdr.string() + ": data_type must be float32le");
    if (require("interleave") != "bsq") throw IoError(hdr.string() + ": interleave must be bsq");
    names = split(require("band_names"), ',');
    if (bands < 1 || static_cast<long long>(names.size()) != bands) {
        throw IoError(hdr.string() + ": band_names count does not match bands");
    }
    try {
        g.validate();
    } catch (const ComputeError& e) {
        throw IoError(hdr.string() + ": invalid geometry: " + e.what());
    }

    RasterGrid raster(g, names, 0.0f, nodata);
    const std::uintmax_t expected = static_cast<std::uintmax_t>(raster.data().size()) * 4u;
    const std::uintmax_t actual = fs::file_size(bin);
    if (actual != expected) {
        throw IoError(bin.string() + ": data length " + std::to_string(actual) + " bytes, header implies " +
                      std::to_string(expected));
    }

    std::ifstream in(bin, std::ios::binary);
    if (!in) throw IoError("cannot open " + bin.string());
    std::vector<unsigned char> bytes(expected);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(expected));
    if (!in) throw IoError("short read on " + bin.string());

    auto d = raster.data();
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = decode_le(&bytes[i * 4]);
    for (float v : d) {
        if (!std::isfinite(v) && !raster.is_nodata(v)) {
            throw IoError(bin.string() + ": non-finite sample and no matching nodata declared");
        }
    }
    return raster;
}

void write_raster(const RasterGrid& raster, const fs::path& path) {
    raster.validate();
    std::string names;
    for (int b = 0; b < raster.bands(); ++b) {
        const auto& n = raster.band_names()[b];
        if (n.find_first_of(",\n\r=") != std::string::npos || trim(n) != n || n.empty()) {
            throw ComputeError("band name '" + n + "' cannot be stored in a header");
        }
        if (b) names += ',';
        names += n;
    }

    const auto& g = raster.geometry();
    std::ostringstream h;
    h << "samples = " << g.width << '\n'
      << "lines = " << g.height << '\n'
      << "bands = " << raster.bands() << '\n'
      << "data_type = float32le\n"
      << "interleave = bsq\n"
      << "pixel_size = " << format_double(g.pixel_size) << '\n'
      << "ulx = " << format_double(g.origin_x) << '\n'
      << "uly = " << format_double(g.origin_y) << '\n'
      << "band_names = " << names << '\n';
    if (raster.nodata()) h << "nodata = " << format_float(*raster.nodata()) << '\n';

    const fs::path hdr = header_path(path);
    const fs::path bin = data_path(path);
    {
        std::ofstream out(hdr, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + hdr.string());
        const std::string text = h.str();
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw IoError("write failed on " + hdr.string());
    }
    auto d = raster.data();
    std::vector<unsigned char> bytes(d.size() * 4);
    for (std::size_t i = 0; i < d.size(); ++i) encode_le(d[i], &bytes[i * 4]);
    std::ofstream out(bin, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + bin.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed on " + bin.string());
}

BinaryMask read_mask(const fs::path& path) {
    const RasterGrid r = read_raster(path);
    if (r.bands() != 1) throw IoError(path.string() + ": mask must have exactly one band");
    try {
        return raster_to_mask(r);
    } catch (const ComputeError& e) {
        throw IoError(path.string() + ": " + e.what());
    }
}

void write_mask(const BinaryMask& mask, const fs::path& path) {
    write_raster(mask_to_raster(mask), path);
}

}  // namespace hydrofuse
