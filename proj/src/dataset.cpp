#include "brassica/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>

namespace fs = std::filesystem;

namespace brassica {

namespace {

bool supported_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return ext == ".ppm" || ext == ".png";
}

}  // namespace

DatasetManifest scan(const std::string& root, const ScanOptions& opts) {
    if (!fs::is_directory(root)) throw DataError("dataset root is not a directory: " + root);

    std::vector<std::string> class_dirs;
    for (const auto& e : fs::directory_iterator(root)) {
        if (e.is_directory()) class_dirs.push_back(e.path().filename().string());
    }
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) throw DataError("dataset root has no class directories: " + root);

    DatasetManifest m;
    for (size_t id = 0; id < class_dirs.size(); ++id) {
        m.classes.push_back({int(id), class_dirs[id]});
        std::vector<std::string> files;
        for (const auto& e : fs::directory_iterator(fs::path(root) / class_dirs[id])) {
            if (!e.is_regular_file()) continue;
            if (!supported_extension(e.path())) {
                ++m.warnings;
                continue;
            }
            files.push_back(e.path().string());
        }
        std::sort(files.begin(), files.end());
        int64_t kept = 0;
        for (const auto& f : files) {
            if (opts.verify_decode) {
                try {
                    decode_image(f);
                } catch (const DataError&) {
                    ++m.warnings;
                    continue;
                }
            }
            m.entries.push_back({f, int(id)});
            ++kept;
        }
        if (kept == 0) {
            throw DataError("class directory has no usable images: " +
                            (fs::path(root) / class_dirs[id]).string());
        }
        m.per_class_counts.push_back(kept);
    }
    return m;
}

void SplitRatios::validate() const {
    if (!(train > 0) || !(val > 0) || !(test > 0)) {
        throw ArgumentError("split ratios must be positive");
    }
    if (std::abs(train + val + test - 1.0) > 1e-9) {
        throw ArgumentError("split ratios must sum to 1");
    }
}

Split split_dataset(const DatasetManifest& manifest, const SplitRatios& ratios, uint64_t seed) {
    ratios.validate();
    Split out;
    out.ratios = ratios;
    out.seed = seed;

    const double parts[3] = {ratios.train, ratios.val, ratios.test};
    for (size_t cls = 0; cls < manifest.classes.size(); ++cls) {
        std::vector<int64_t> members;
        for (size_t i = 0; i < manifest.entries.size(); ++i) {
            if (manifest.entries[i].class_id == int(cls)) members.push_back(int64_t(i));
        }
        const int64_t n = int64_t(members.size());

        // Largest-remainder apportionment of n over the three splits.
        int64_t counts[3];
        double rem[3];
        int64_t assigned = 0;
        for (int s = 0; s < 3; ++s) {
            const double exact = double(n) * parts[s];
            counts[s] = int64_t(std::floor(exact));
            rem[s] = exact - double(counts[s]);
            assigned += counts[s];
        }
        for (int64_t left = n - assigned; left > 0; --left) {
            int best = 0;
            for (int s = 1; s < 3; ++s) {
                if (rem[s] > rem[best]) best = s;  // ties keep train < val < test order
            }
            counts[best] += 1;
            rem[best] = -1.0;
        }
        for (int s = 0; s < 3; ++s) {
            if (counts[s] == 0) {
                throw DataError("class '" + manifest.classes[cls].name + "' (" +
                                std::to_string(n) + " samples) cannot give every split a sample");
            }
        }

        // Per-class stream derived from (seed, class id) so one class's
        // contents never perturb another's shuffle.
        Rng class_rng(seed ^ (0x9e3779b97f4a7c15ull * (uint64_t(cls) + 1)));
        class_rng.shuffle(members);

        int64_t offset = 0;
        std::vector<ManifestEntry>* dests[3] = {&out.train, &out.val, &out.test};
        for (int s = 0; s < 3; ++s) {
            for (int64_t i = 0; i < counts[s]; ++i) {
                dests[s]->push_back(manifest.entries[size_t(members[size_t(offset + i)])]);
            }
            offset += counts[s];
        }
    }
    return out;
}

void write_split_manifest(const Split& split, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot write split manifest: " + path);
    std::fprintf(f, "# seed=%llu train=%.9g val=%.9g test=%.9g\n",
                 static_cast<unsigned long long>(split.seed), split.ratios.train,
                 split.ratios.val, split.ratios.test);
    std::fprintf(f, "path,class_id,split\n");
    auto rows = [f](const std::vector<ManifestEntry>& entries, const char* tag) {
        for (const auto& e : entries) {
            std::fprintf(f, "%s,%d,%s\n", e.path.c_str(), e.class_id, tag);
        }
    };
    rows(split.train, "train");
    rows(split.val, "val");
    rows(split.test, "test");
    if (std::fclose(f) != 0) throw IoError("failed to write split manifest: " + path);
}

LabeledData load_split(const std::vector<ManifestEntry>& entries, int64_t out_h, int64_t out_w) {
    LabeledData data;
    data.images.resize(entries.size());
    data.labels.resize(entries.size());
    std::string failure;  // exceptions must not escape the parallel region
#pragma omp parallel for schedule(dynamic)
    for (int64_t i = 0; i < int64_t(entries.size()); ++i) {
        try {
            data.images[size_t(i)] =
                resize_bilinear(decode_image(entries[size_t(i)].path), out_h, out_w);
            data.labels[size_t(i)] = entries[size_t(i)].class_id;
        } catch (const Error& e) {
#pragma omp critical
            if (failure.empty()) failure = e.what();
        }
    }
    if (!failure.empty()) throw DataError(failure);
    return data;
}

}  // namespace brassica
