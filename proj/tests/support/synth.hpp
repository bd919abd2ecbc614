#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "brassica/dataset.hpp"
#include "brassica/network.hpp"
#include "brassica/tensor.hpp"

namespace brassica::testsupport {

// Writes a directory-per-class dataset of textured color patterns with
// per-image phase/brightness jitter and pixel noise. Each class pairs a
// distinct palette entry with a distinct stripe orientation/frequency.
struct SynthSpec {
    int classes = 10;
    int images_per_class = 60;
    int64_t size = 128;
    uint64_t seed = 1234;
};

void make_synthetic_dataset(const std::string& root, const SynthSpec& spec);

// One synthetic image as a raw RGB buffer (no file round trip).
RawImage synth_image(int cls, int64_t size, Rng& rng);

// Minimal PNG encoder (8-bit RGB, filter 0) for decoder tests.
std::vector<uint8_t> encode_png_rgb(const RawImage& img);

// Small architectures used across tests.
std::vector<LayerSpec> miniature_specs_16(int64_t classes = 10);  // 16x16 input
std::vector<LayerSpec> miniature_specs_32(int64_t classes = 3);   // 32x32 input

// Unique scratch directory under the current working directory.
std::string fresh_temp_dir(const std::string& tag);

}  // namespace brassica::testsupport
