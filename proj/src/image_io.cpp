#include <cstdio>
#include <cstring>

#include <zlib.h>

#include "brassica/dataset.hpp"

namespace brassica {

namespace {

[[noreturn]] void decode_fail(const std::string& origin, size_t offset, const std::string& why) {
    throw DataError("decode " + origin + ": " + why + " (byte offset " + std::to_string(offset) +
                    ")");
}

// --- PPM (P6, binary, maxval 255) -----------------------------------------

// Header tokens are separated by whitespace; '#' starts a comment to EOL.
bool ppm_token(const std::vector<uint8_t>& b, size_t& pos, std::string& tok) {
    tok.clear();
    while (pos < b.size()) {
        const char c = char(b[pos]);
        if (c == '#') {
            while (pos < b.size() && b[pos] != '\n') ++pos;
        } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            ++pos;
        } else {
            break;
        }
    }
    while (pos < b.size()) {
        const char c = char(b[pos]);
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '#') break;
        tok.push_back(c);
        ++pos;
    }
    return !tok.empty();
}

RawImage decode_ppm(const std::vector<uint8_t>& b, const std::string& origin) {
    size_t pos = 2;  // past "P6"
    std::string tok;
    int64_t dims[3];
    for (int i = 0; i < 3; ++i) {
        if (!ppm_token(b, pos, tok)) decode_fail(origin, pos, "missing PPM header field");
        try {
            dims[i] = std::stoll(tok);
        } catch (...) {
            decode_fail(origin, pos, "bad PPM header token '" + tok + "'");
        }
    }
    const int64_t w = dims[0], h = dims[1], maxval = dims[2];
    if (w < 1 || h < 1) decode_fail(origin, pos, "non-positive PPM dimensions");
    if (maxval != 255) decode_fail(origin, pos, "unsupported PPM maxval " + std::to_string(maxval));
    if (pos >= b.size()) decode_fail(origin, pos, "missing PPM payload");
    ++pos;  // single whitespace byte after maxval
    const size_t need = size_t(w) * size_t(h) * 3;
    if (b.size() - pos < need) {
        decode_fail(origin, b.size(), "PPM payload truncated, need " + std::to_string(need) +
                                          " bytes from offset " + std::to_string(pos));
    }
    RawImage img;
    img.width = w;
    img.height = h;
    img.rgb.assign(b.begin() + long(pos), b.begin() + long(pos + need));
    return img;
}

// --- PNG (8-bit, color types 0/2/4/6, non-interlaced) ----------------------

uint32_t be32(const uint8_t* p) {
    return uint32_t(p[0]) << 24 | uint32_t(p[1]) << 16 | uint32_t(p[2]) << 8 | uint32_t(p[3]);
}

int paeth(int a, int b, int c) {
    const int p = a + b - c;
    const int pa = std::abs(p - a), pb = std::abs(p - b), pc = std::abs(p - c);
    if (pa <= pb && pa <= pc) return a;
    if (pb <= pc) return b;
    return c;
}

RawImage decode_png(const std::vector<uint8_t>& b, const std::string& origin) {
    static const uint8_t sig[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    if (b.size() < 8 || std::memcmp(b.data(), sig, 8) != 0) {
        decode_fail(origin, 0, "bad PNG signature");
    }
    size_t pos = 8;
    int64_t width = 0, height = 0;
    int bit_depth = 0, color_type = 0, interlace = 0;
    bool saw_ihdr = false, saw_iend = false;
    std::vector<uint8_t> idat;

    while (pos < b.size()) {
        if (b.size() - pos < 8) decode_fail(origin, pos, "truncated chunk header");
        const uint32_t len = be32(&b[pos]);
        const char* type = reinterpret_cast<const char*>(&b[pos + 4]);
        if (b.size() - pos < 12 + size_t(len)) decode_fail(origin, pos, "truncated chunk body");
        const uint8_t* data = &b[pos + 8];
        const uint32_t stored_crc = be32(&b[pos + 8 + len]);
        const uint32_t crc =
            uint32_t(::crc32(::crc32(0L, &b[pos + 4], 4), data, uInt(len)));
        if (crc != stored_crc) decode_fail(origin, pos, "chunk CRC mismatch");

        if (std::memcmp(type, "IHDR", 4) == 0) {
            if (len != 13) decode_fail(origin, pos, "bad IHDR length");
            width = be32(data);
            height = be32(data + 4);
            bit_depth = data[8];
            color_type = data[9];
            interlace = data[12];
            saw_ihdr = true;
            if (width < 1 || height < 1) decode_fail(origin, pos, "bad PNG dimensions");
            if (bit_depth != 8) {
                decode_fail(origin, pos,
                            "unsupported PNG bit depth " + std::to_string(bit_depth));
            }
            if (color_type != 0 && color_type != 2 && color_type != 4 && color_type != 6) {
                decode_fail(origin, pos,
                            "unsupported PNG color type " + std::to_string(color_type));
            }
            if (interlace != 0) decode_fail(origin, pos, "interlaced PNG not supported");
        } else if (std::memcmp(type, "IDAT", 4) == 0) {
            if (!saw_ihdr) decode_fail(origin, pos, "IDAT before IHDR");
            idat.insert(idat.end(), data, data + len);
        } else if (std::memcmp(type, "IEND", 4) == 0) {
            saw_iend = true;
            break;
        }
        pos += 12 + size_t(len);
    }
    if (!saw_ihdr) decode_fail(origin, pos, "missing IHDR");
    if (!saw_iend) decode_fail(origin, pos, "missing IEND");
    if (idat.empty()) decode_fail(origin, pos, "missing IDAT");

    const int channels = color_type == 0 ? 1 : color_type == 2 ? 3 : color_type == 4 ? 2 : 4;
    const size_t stride = size_t(width) * size_t(channels);
    const size_t raw_size = (stride + 1) * size_t(height);
    std::vector<uint8_t> raw(raw_size);
    uLongf out_len = uLongf(raw_size);
    const int zrc = ::uncompress(raw.data(), &out_len, idat.data(), uLong(idat.size()));
    if (zrc != Z_OK || out_len != raw_size) {
        decode_fail(origin, pos, "PNG inflate failed (zlib rc " + std::to_string(zrc) + ")");
    }

    // Undo per-scanline filters.
    std::vector<uint8_t> pix(stride * size_t(height));
    const int bpp = channels;
    for (int64_t y = 0; y < height; ++y) {
        const uint8_t filter = raw[size_t(y) * (stride + 1)];
        const uint8_t* src = &raw[size_t(y) * (stride + 1) + 1];
        uint8_t* dst = &pix[size_t(y) * stride];
        const uint8_t* prev = y > 0 ? &pix[size_t(y - 1) * stride] : nullptr;
        for (size_t x = 0; x < stride; ++x) {
            const int a = x >= size_t(bpp) ? dst[x - size_t(bpp)] : 0;
            const int up = prev ? prev[x] : 0;
            const int c = (prev && x >= size_t(bpp)) ? prev[x - size_t(bpp)] : 0;
            int v = src[x];
            switch (filter) {
                case 0: break;
                case 1: v += a; break;
                case 2: v += up; break;
                case 3: v += (a + up) / 2; break;
                case 4: v += paeth(a, up, c); break;
                default:
                    decode_fail(origin, size_t(y) * (stride + 1),
                                "unknown PNG filter " + std::to_string(filter));
            }
            dst[x] = uint8_t(v);
        }
    }

    RawImage img;
    img.width = width;
    img.height = height;
    img.rgb.resize(size_t(width) * size_t(height) * 3);
    for (int64_t i = 0; i < width * height; ++i) {
        const uint8_t* s = &pix[size_t(i) * size_t(channels)];
        uint8_t* d = &img.rgb[size_t(i) * 3];
        if (channels >= 3) {
            d[0] = s[0];
            d[1] = s[1];
            d[2] = s[2];  // alpha (if any) dropped
        } else {
            d[0] = d[1] = d[2] = s[0];  // grayscale expanded
        }
    }
    return img;
}

}  // namespace

RawImage decode_image_bytes(const std::vector<uint8_t>& bytes, const std::string& origin) {
    if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '6') return decode_ppm(bytes, origin);
    if (bytes.size() >= 8 && bytes[0] == 0x89 && bytes[1] == 'P') return decode_png(bytes, origin);
    decode_fail(origin, 0, "unrecognized image format");
}

RawImage decode_image(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw DataError("cannot open image: " + path);
    std::vector<uint8_t> bytes;
    uint8_t buf[1 << 16];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) bytes.insert(bytes.end(), buf, buf + got);
    std::fclose(f);
    return decode_image_bytes(bytes, path);
}

void encode_ppm(const RawImage& img, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fprintf(f, "P6\n%lld %lld\n255\n", static_cast<long long>(img.width),
                 static_cast<long long>(img.height));
    const size_t n = img.rgb.size();
    const bool ok = std::fwrite(img.rgb.data(), 1, n, f) == n && std::fclose(f) == 0;
    if (!ok) throw IoError("failed to write PPM: " + path);
}

Tensor resize_bilinear(const RawImage& img, int64_t out_h, int64_t out_w) {
    if (img.width < 1 || img.height < 1 || img.rgb.size() != size_t(img.width * img.height * 3)) {
        throw ArgumentError("resize_bilinear: malformed source image");
    }
    Tensor out(Shape4(1, 3, out_h, out_w));
    const double sx = double(img.width) / double(out_w);
    const double sy = double(img.height) / double(out_h);
    for (int64_t oy = 0; oy < out_h; ++oy) {
        const double fy = (double(oy) + 0.5) * sy - 0.5;
        const double cy = std::min(std::max(fy, 0.0), double(img.height - 1));
        const int64_t y0 = int64_t(cy);
        const int64_t y1 = std::min(y0 + 1, img.height - 1);
        const double wy = cy - double(y0);
        for (int64_t ox = 0; ox < out_w; ++ox) {
            const double fx = (double(ox) + 0.5) * sx - 0.5;
            const double cx = std::min(std::max(fx, 0.0), double(img.width - 1));
            const int64_t x0 = int64_t(cx);
            const int64_t x1 = std::min(x0 + 1, img.width - 1);
            const double wx = cx - double(x0);
            for (int64_t ch = 0; ch < 3; ++ch) {
                const double v00 = img.pixel(x0, y0)[ch];
                const double v10 = img.pixel(x1, y0)[ch];
                const double v01 = img.pixel(x0, y1)[ch];
                const double v11 = img.pixel(x1, y1)[ch];
                const double top = v00 + (v10 - v00) * wx;
                const double bot = v01 + (v11 - v01) * wx;
                out.at(0, ch, oy, ox) = float((top + (bot - top) * wy) / 255.0);
            }
        }
    }
    return out;
}

}  // namespace brassica
