#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "brassica/tensor.hpp"
#include "brassica/train.hpp"

namespace brassica {

// Canonical label vocabulary for the ten Brassica seed classes.
inline const std::array<std::string, 10> kBrassicaClassNames = {
    "Brassica Napus Var Annua",
    "Brassica Napus Var Oleifera",
    "Brassica Nigra",
    "Brassica Oleracea Gongyloides",
    "Brassica Oleracea LCAV rubra",
    "Brassica Oleracea Rapa Brassica",
    "Brassica Oleracea Var Gongyloides",
    "Brassica Rapa",
    "Brassica Rapa Oleifera",
    "Brassica rapa subsp. rapa",
};

struct ClassLabel {
    int id = 0;
    std::string name;
};

struct ManifestEntry {
    std::string path;
    int class_id = 0;
};

// Directory-per-class dataset listing. Class ids are assigned by ascending
// lexicographic directory name; entries are sorted by (class, filename).
struct DatasetManifest {
    std::vector<ClassLabel> classes;
    std::vector<ManifestEntry> entries;
    std::vector<int64_t> per_class_counts;
    int64_t warnings = 0;  // unsupported or undecodable files skipped

    int64_t total() const { return int64_t(entries.size()); }
    std::vector<std::string> class_names() const {
        std::vector<std::string> names;
        names.reserve(classes.size());
        for (const auto& c : classes) names.push_back(c.name);
        return names;
    }
};

struct ScanOptions {
    // Probe-decode every candidate file; failures are skipped with a warning.
    // Disable to build manifests over placeholder files (e.g. split audits).
    bool verify_decode = true;
};

DatasetManifest scan(const std::string& root, const ScanOptions& opts = {});

// Row-major 8-bit RGB image.
struct RawImage {
    int64_t width = 0;
    int64_t height = 0;
    std::vector<uint8_t> rgb;  // 3 bytes per pixel

    uint8_t* pixel(int64_t x, int64_t y) { return rgb.data() + 3 * (y * width + x); }
    const uint8_t* pixel(int64_t x, int64_t y) const { return rgb.data() + 3 * (y * width + x); }
};

// Decodes binary PPM (P6, maxval 255) and PNG (8-bit gray/RGB/RGBA,
// non-interlaced; alpha dropped). Dispatch is by magic bytes, not extension.
RawImage decode_image(const std::string& path);
RawImage decode_image_bytes(const std::vector<uint8_t>& bytes, const std::string& origin);

void encode_ppm(const RawImage& img, const std::string& path);

// Bilinear resize with half-pixel-center mapping, scaled to [0,1] by /255.
// Returns a (1, 3, out_h, out_w) tensor in RGB channel order.
Tensor resize_bilinear(const RawImage& img, int64_t out_h = 128, int64_t out_w = 128);

struct SplitRatios {
    double train = 0.5;
    double val = 0.2;
    double test = 0.3;

    void validate() const;
};

// Deterministic stratified partition: per class, a seeded shuffle followed by
// contiguous slicing with largest-remainder counts (train, then val, then
// test; remainder ties resolve in that order).
struct Split {
    std::vector<ManifestEntry> train;
    std::vector<ManifestEntry> val;
    std::vector<ManifestEntry> test;
    SplitRatios ratios;
    uint64_t seed = 0;
};

Split split_dataset(const DatasetManifest& manifest, const SplitRatios& ratios, uint64_t seed);

// Audit file: "# seed=S train=a val=b test=c" then CSV rows
// path,class_id,split with split in {train,val,test}.
void write_split_manifest(const Split& split, const std::string& path);

// Decodes and resizes every entry of a split slice into memory.
LabeledData load_split(const std::vector<ManifestEntry>& entries, int64_t out_h = 128,
                       int64_t out_w = 128);

}  // namespace brassica
