#pragma once

// Portable graymap (P2/P5) and raw float32 raster I/O.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>

#include "raster.hpp"

namespace strokefield {

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline int next_pgm_token(std::istream& in, std::string& tok) {
    tok.clear();
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (std::isspace(c)) {
            c = in.get();
        } else {
            break;
        }
    }
    while (c != EOF && !std::isspace(c) && c != '#') {
        tok.push_back(static_cast<char>(c));
        c = in.get();
    }
    return tok.empty() ? EOF : 0;
}

inline long parse_pgm_int(std::istream& in, const std::string& path) {
    std::string tok;
    if (next_pgm_token(in, tok) == EOF) throw IoError("truncated PGM header: " + path);
    try {
        return std::stol(tok);
    } catch (const std::exception&) {
        throw IoError("bad PGM header token '" + tok + "': " + path);
    }
}

}  // namespace detail

/// Reads a P2/P5 graymap and scales values to [0, 1].
inline Raster<double> read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string magic;
    if (detail::next_pgm_token(in, magic) == EOF || (magic != "P2" && magic != "P5"))
        throw IoError("not a P2/P5 graymap: " + path);
    const long w = detail::parse_pgm_int(in, path);
    const long h = detail::parse_pgm_int(in, path);
    const long maxval = detail::parse_pgm_int(in, path);
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw IoError("bad PGM dimensions: " + path);
    Raster<double> out(static_cast<int>(w), static_cast<int>(h));
    const double scale = 1.0 / static_cast<double>(maxval);
    if (magic == "P2") {
        for (auto& v : out.data()) v = scale * detail::parse_pgm_int(in, path);
    } else {
        // single whitespace byte after maxval, then raw samples (16-bit is big-endian)
        const int bytes = maxval > 255 ? 2 : 1;
        std::string raw(static_cast<std::size_t>(w) * h * bytes, '\0');
        in.read(raw.data(), static_cast<std::streamsize>(raw.size()));
        if (in.gcount() != static_cast<std::streamsize>(raw.size()))
            throw IoError("truncated PGM data: " + path);
        const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
        for (auto& v : out.data()) {
            unsigned value = *p++;
            if (bytes == 2) value = (value << 8) | *p++;
            v = scale * value;
        }
    }
    return out;
}

/// Writes a binary graymap; maxval 255 or 65535. Values are clamped to [0, 1].
inline void write_pgm(const std::string& path, const Raster<double>& r, int maxval = 255) {
    if (maxval != 255 && maxval != 65535) throw std::invalid_argument("write_pgm: maxval must be 255 or 65535");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    out << "P5\n" << r.width() << " " << r.height() << "\n" << maxval << "\n";
    for (double v : r.data()) {
        const double c = std::clamp(v, 0.0, 1.0);
        const unsigned q = static_cast<unsigned>(std::lround(c * maxval));
        if (maxval > 255) out.put(static_cast<char>(q >> 8));
        out.put(static_cast<char>(q & 0xff));
    }
    if (!out) throw IoError("write failed: " + path);
}

/// Raw little-endian float32 raster with a "width height" companion header.
inline void write_float_raster(const std::string& path, const Raster<double>& r) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write: " + path);
    for (double v : r.data()) {
        const float f = static_cast<float>(v);
        out.write(reinterpret_cast<const char*>(&f), sizeof(f));
    }
    if (!out) throw IoError("write failed: " + path);
    std::ofstream hdr(path + ".hdr");
    if (!hdr) throw IoError("cannot write: " + path + ".hdr");
    hdr << r.width() << " " << r.height() << "\n";
}

inline Raster<double> read_float_raster(const std::string& path) {
    std::ifstream hdr(path + ".hdr");
    if (!hdr) throw IoError("cannot open: " + path + ".hdr");
    int w = 0, h = 0;
    hdr >> w >> h;
    if (w <= 0 || h <= 0) throw IoError("bad float raster header: " + path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    Raster<double> out(w, h);
    for (auto& v : out.data()) {
        float f = 0.0f;
        in.read(reinterpret_cast<char*>(&f), sizeof(f));
        v = f;
    }
    if (!in) throw IoError("truncated float raster: " + path);
    return out;
}

}  // namespace strokefield
