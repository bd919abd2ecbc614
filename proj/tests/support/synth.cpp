#include "support/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include <zlib.h>

namespace fs = std::filesystem;

namespace brassica::testsupport {

namespace {

constexpr uint8_t kPalette[10][3] = {
    {220, 60, 60},  {60, 200, 80},   {70, 90, 220},  {220, 200, 60}, {200, 70, 200},
    {60, 200, 200}, {240, 140, 40},  {130, 220, 40}, {150, 90, 220}, {230, 230, 230},
};

}  // namespace

RawImage synth_image(int cls, int64_t size, Rng& rng) {
    RawImage img;
    img.width = size;
    img.height = size;
    img.rgb.resize(size_t(size * size * 3));

    const double angle = double(cls) * 0.31415926535;  // distinct orientation
    const double freq = 3.0 + double(cls % 5) * 2.0;   // distinct frequency
    const double cx = std::cos(angle), sx = std::sin(angle);
    const double phase = rng.uniform(0.0, 6.28318530718);
    const double brightness = rng.uniform(0.75, 1.0);
    const bool checker = cls >= 5;  // second texture family

    for (int64_t y = 0; y < size; ++y) {
        for (int64_t x = 0; x < size; ++x) {
            const double u = double(x) / double(size);
            const double v = double(y) / double(size);
            double t;
            if (checker) {
                const int cell = int(std::floor(u * freq * 2.0)) + int(std::floor(v * freq * 2.0));
                t = (cell % 2 == 0) ? 0.95 : 0.35;
                t += 0.15 * std::sin(6.28318530718 * freq * (u * cx + v * sx) + phase);
            } else {
                t = 0.5 + 0.45 * std::sin(6.28318530718 * freq * (u * cx + v * sx) + phase);
            }
            uint8_t* p = img.pixel(x, y);
            for (int ch = 0; ch < 3; ++ch) {
                const double noise = rng.uniform(-16.0, 16.0);
                const double value = double(kPalette[cls % 10][ch]) * t * brightness + noise;
                p[ch] = uint8_t(std::clamp(value, 0.0, 255.0));
            }
        }
    }
    return img;
}

void make_synthetic_dataset(const std::string& root, const SynthSpec& spec) {
    Rng rng(spec.seed);
    for (int cls = 0; cls < spec.classes; ++cls) {
        char dir_name[32];
        std::snprintf(dir_name, sizeof(dir_name), "class_%02d", cls);
        const fs::path dir = fs::path(root) / dir_name;
        fs::create_directories(dir);
        for (int i = 0; i < spec.images_per_class; ++i) {
            char file_name[32];
            std::snprintf(file_name, sizeof(file_name), "img_%04d.ppm", i);
            encode_ppm(synth_image(cls, spec.size, rng), (dir / file_name).string());
        }
    }
}

std::vector<uint8_t> encode_png_rgb(const RawImage& img) {
    auto put_u32be = [](std::vector<uint8_t>& out, uint32_t v) {
        out.push_back(uint8_t(v >> 24));
        out.push_back(uint8_t(v >> 16));
        out.push_back(uint8_t(v >> 8));
        out.push_back(uint8_t(v));
    };
    auto put_chunk = [&](std::vector<uint8_t>& out, const char* type,
                         const std::vector<uint8_t>& data) {
        put_u32be(out, uint32_t(data.size()));
        const size_t type_at = out.size();
        out.insert(out.end(), type, type + 4);
        out.insert(out.end(), data.begin(), data.end());
        const uint32_t crc =
            uint32_t(::crc32(0L, out.data() + type_at, uInt(4 + data.size())));
        put_u32be(out, crc);
    };

    std::vector<uint8_t> raw;
    raw.reserve(size_t(img.height) * (size_t(img.width) * 3 + 1));
    for (int64_t y = 0; y < img.height; ++y) {
        raw.push_back(0);  // filter: none
        const uint8_t* row = img.rgb.data() + size_t(y * img.width * 3);
        raw.insert(raw.end(), row, row + img.width * 3);
    }
    std::vector<uint8_t> compressed(::compressBound(uLong(raw.size())));
    uLongf out_len = uLongf(compressed.size());
    if (::compress2(compressed.data(), &out_len, raw.data(), uLong(raw.size()), 6) != Z_OK) {
        throw IoError("png encode: deflate failed");
    }
    compressed.resize(out_len);

    std::vector<uint8_t> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
    std::vector<uint8_t> ihdr;
    put_u32be(ihdr, uint32_t(img.width));
    put_u32be(ihdr, uint32_t(img.height));
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(2);  // color type RGB
    ihdr.push_back(0);  // compression
    ihdr.push_back(0);  // filter method
    ihdr.push_back(0);  // no interlace
    put_chunk(png, "IHDR", ihdr);
    put_chunk(png, "IDAT", compressed);
    put_chunk(png, "IEND", {});
    return png;
}

std::vector<LayerSpec> miniature_specs_16(int64_t classes) {
    return {
        LayerSpec::input(3, 16, 16),
        LayerSpec::conv(3, 4, 5, 3, 0),  // 16 -> 4
        LayerSpec::relu(),
        LayerSpec::conv(4, 6, 3, 1, 1),  // 4 -> 4
        LayerSpec::relu(),
        LayerSpec::maxpool(2, 2),  // 4 -> 2
        LayerSpec::dropout(0.5),
        LayerSpec::flatten(),  // 24
        LayerSpec::dense(24, 12),
        LayerSpec::relu(),
        LayerSpec::dense(12, classes),
        LayerSpec::softmax(),
    };
}

std::vector<LayerSpec> miniature_specs_32(int64_t classes) {
    return {
        LayerSpec::input(3, 32, 32),
        LayerSpec::conv(3, 8, 5, 3, 0),  // 32 -> 10
        LayerSpec::relu(),
        LayerSpec::maxpool(2, 2),  // 10 -> 5
        LayerSpec::conv(8, 8, 3, 1, 1),
        LayerSpec::relu(),
        LayerSpec::maxpool(2, 2),  // 5 -> 2
        LayerSpec::flatten(),      // 32
        LayerSpec::dense(32, 16),
        LayerSpec::relu(),
        LayerSpec::dense(16, classes),
        LayerSpec::softmax(),
    };
}

std::string fresh_temp_dir(const std::string& tag) {
    static int counter = 0;
    const fs::path dir = fs::path("test_tmp") / (tag + "_" + std::to_string(counter++));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

}  // namespace brassica::testsupport
