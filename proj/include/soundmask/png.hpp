#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <zlib.h>

#include "soundmask/error.hpp"

namespace soundmask::png {

struct Rgb {
    unsigned char r = 0, g = 0, b = 0;
};

// 8-bit RGB raster with just enough drawing for heatmaps and bar charts.
class Image {
public:
    Image(int width, int height, Rgb fill = {255, 255, 255})
        : width_(width), height_(height), pixels_(3u * width * height) {
        for (int y = 0; y < height_; ++y) {
            for (int x = 0; x < width_; ++x) set(x, y, fill);
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }

    void set(int x, int y, Rgb c) {
        if (x < 0 || y < 0 || x >= width_ || y >= height_) return;
        const std::size_t i = 3u * (static_cast<std::size_t>(y) * width_ + x);
        pixels_[i] = c.r;
        pixels_[i + 1] = c.g;
        pixels_[i + 2] = c.b;
    }

    void fill_rect(int x0, int y0, int w, int h, Rgb c) {
        for (int y = y0; y < y0 + h; ++y) {
            for (int x = x0; x < x0 + w; ++x) set(x, y, c);
        }
    }

    void hline(int x0, int x1, int y, Rgb c) {
        for (int x = x0; x <= x1; ++x) set(x, y, c);
    }

    void vline(int x, int y0, int y1, Rgb c) {
        for (int y = y0; y <= y1; ++y) set(x, y, c);
    }

    void text(int x, int y, const std::string& s, Rgb c, int scale = 1);

    const std::vector<unsigned char>& pixels() const { return pixels_; }

private:
    int width_, height_;
    std::vector<unsigned char> pixels_;
};

namespace detail {

// 5x7 glyphs, column-major, 5 bytes per glyph, LSB = top row.
// Covers digits, uppercase letters and the handful of symbols the charts use.
struct Glyph {
    char ch;
    unsigned char col[5];
};

inline const Glyph* find_glyph(char ch) {
    static const Glyph table[] = {
        {'0', {0x3e, 0x51, 0x49, 0x45, 0x3e}},
        {'1', {0x00, 0x42, 0x7f, 0x40, 0x00}},
        {'2', {0x42, 0x61, 0x51, 0x49, 0x46}},
        {'3', {0x21, 0x41, 0x45, 0x4b, 0x31}},
        {'4', {0x18, 0x14, 0x12, 0x7f, 0x10}},
        {'5', {0x27, 0x45, 0x45, 0x45, 0x39}},
        {'6', {0x3c, 0x4a, 0x49, 0x49, 0x30}},
        {'7', {0x01, 0x71, 0x09, 0x05, 0x03}},
        {'8', {0x36, 0x49, 0x49, 0x49, 0x36}},
        {'9', {0x06, 0x49, 0x49, 0x29, 0x1e}},
        {'A', {0x7e, 0x11, 0x11, 0x11, 0x7e}},
        {'B', {0x7f, 0x49, 0x49, 0x49, 0x36}},
        {'C', {0x3e, 0x41, 0x41, 0x41, 0x22}},
        {'D', {0x7f, 0x41, 0x41, 0x22, 0x1c}},
        {'E', {0x7f, 0x49, 0x49, 0x49, 0x41}},
        {'F', {0x7f, 0x09, 0x09, 0x09, 0x01}},
        {'G', {0x3e, 0x41, 0x49, 0x49, 0x7a}},
        {'H', {0x7f, 0x08, 0x08, 0x08, 0x7f}},
        {'I', {0x00, 0x41, 0x7f, 0x41, 0x00}},
        {'J', {0x20, 0x40, 0x41, 0x3f, 0x01}},
        {'K', {0x7f, 0x08, 0x14, 0x22, 0x41}},
        {'L', {0x7f, 0x40, 0x40, 0x40, 0x40}},
        {'M', {0x7f, 0x02, 0x0c, 0x02, 0x7f}},
        {'N', {0x7f, 0x04, 0x08, 0x10, 0x7f}},
        {'O', {0x3e, 0x41, 0x41, 0x41, 0x3e}},
        {'P', {0x7f, 0x09, 0x09, 0x09, 0x06}},
        {'Q', {0x3e, 0x41, 0x51, 0x21, 0x5e}},
        {'R', {0x7f, 0x09, 0x19, 0x29, 0x46}},
        {'S', {0x46, 0x49, 0x49, 0x49, 0x31}},
        {'T', {0x01, 0x01, 0x7f, 0x01, 0x01}},
        {'U', {0x3f, 0x40, 0x40, 0x40, 0x3f}},
        {'V', {0x1f, 0x20, 0x40, 0x20, 0x1f}},
        {'W', {0x3f, 0x40, 0x38, 0x40, 0x3f}},
        {'X', {0x63, 0x14, 0x08, 0x14, 0x63}},
        {'Y', {0x07, 0x08, 0x70, 0x08, 0x07}},
        {'Z', {0x61, 0x51, 0x49, 0x45, 0x43}},
        {'.', {0x00, 0x60, 0x60, 0x00, 0x00}},
        {',', {0x00, 0x80, 0x60, 0x00, 0x00}},
        {'-', {0x08, 0x08, 0x08, 0x08, 0x08}},
        {'+', {0x08, 0x08, 0x3e, 0x08, 0x08}},
        {'_', {0x40, 0x40, 0x40, 0x40, 0x40}},
        {'%', {0x23, 0x13, 0x08, 0x64, 0x62}},
        {'/', {0x20, 0x10, 0x08, 0x04, 0x02}},
        {':', {0x00, 0x36, 0x36, 0x00, 0x00}},
        {'=', {0x14, 0x14, 0x14, 0x14, 0x14}},
        {'(', {0x00, 0x1c, 0x22, 0x41, 0x00}},
        {')', {0x00, 0x41, 0x22, 0x1c, 0x00}},
        {' ', {0x00, 0x00, 0x00, 0x00, 0x00}},
    };
    for (const auto& g : table) {
        if (g.ch == ch) return &g;
    }
    return nullptr;
}

inline void put_u32_be(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>((v >> 24) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>(v & 0xff));
}

inline void put_chunk(std::string& out, const char type[4],
                      const std::string& body) {
    put_u32_be(out, static_cast<std::uint32_t>(body.size()));
    const std::size_t crc_start = out.size();
    out.append(type, 4);
    out.append(body);
    const auto crc = crc32(
        0, reinterpret_cast<const Bytef*>(out.data() + crc_start),
        static_cast<uInt>(out.size() - crc_start));
    put_u32_be(out, static_cast<std::uint32_t>(crc));
}

}  // namespace detail

inline void Image::text(int x, int y, const std::string& s, Rgb c, int scale) {
    int cx = x;
    for (char raw : s) {
        const char ch =
            (raw >= 'a' && raw <= 'z') ? static_cast<char>(raw - 32) : raw;
        const detail::Glyph* g = detail::find_glyph(ch);
        if (g != nullptr) {
            for (int col = 0; col < 5; ++col) {
                for (int row = 0; row < 7; ++row) {
                    if (g->col[col] & (1 << row)) {
                        fill_rect(cx + col * scale, y + row * scale, scale,
                                  scale, c);
                    }
                }
            }
        }
        cx += 6 * scale;
    }
}

// Deterministic encoder: fixed zlib level, no ancillary chunks, so the same
// raster always produces the same bytes.
inline std::string encode(const Image& img) {
    std::string raw;
    raw.reserve(static_cast<std::size_t>(img.height()) *
                (1 + 3u * img.width()));
    const auto& px = img.pixels();
    for (int y = 0; y < img.height(); ++y) {
        raw.push_back('\0');  // filter type 0
        raw.append(reinterpret_cast<const char*>(
                       px.data() + 3u * static_cast<std::size_t>(y) *
                                       img.width()),
                   3u * img.width());
    }

    uLongf bound = compressBound(static_cast<uLong>(raw.size()));
    std::vector<unsigned char> compressed(bound);
    if (compress2(compressed.data(), &bound,
                  reinterpret_cast<const Bytef*>(raw.data()),
                  static_cast<uLong>(raw.size()), 9) != Z_OK) {
        throw IoError("png: zlib compression failed");
    }

    std::string out("\x89PNG\r\n\x1a\n", 8);
    std::string ihdr;
    detail::put_u32_be(ihdr, static_cast<std::uint32_t>(img.width()));
    detail::put_u32_be(ihdr, static_cast<std::uint32_t>(img.height()));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type RGB
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    detail::put_chunk(out, "IHDR", ihdr);
    detail::put_chunk(
        out, "IDAT",
        std::string(reinterpret_cast<const char*>(compressed.data()), bound));
    detail::put_chunk(out, "IEND", "");
    return out;
}

inline void write(const Image& img, const std::string& path) {
    const std::string bytes = encode(img);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open " + path + " for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError("short write to " + path);
}

}  // namespace soundmask::png
