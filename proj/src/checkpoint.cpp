#include "brassica/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <vector>

#include <zlib.h>

namespace brassica {

namespace {

constexpr char kMagic[8] = {'B', 'R', 'S', 'N', 'E', 'T', '0', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(uint8_t(v));
    out.push_back(uint8_t(v >> 8));
    out.push_back(uint8_t(v >> 16));
    out.push_back(uint8_t(v >> 24));
}

void put_u64(std::vector<uint8_t>& out, uint64_t v) {
    put_u32(out, uint32_t(v));
    put_u32(out, uint32_t(v >> 32));
}

void put_f32(std::vector<uint8_t>& out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }

struct Reader {
    const std::vector<uint8_t>& bytes;
    size_t pos = 0;

    void need(size_t n, const char* what) const {
        if (pos + n > bytes.size()) {
            throw CheckpointError(CheckpointError::Kind::Truncated,
                                  std::string("checkpoint truncated while reading ") + what +
                                      " at offset " + std::to_string(pos));
        }
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = uint32_t(bytes[pos]) | uint32_t(bytes[pos + 1]) << 8 |
                     uint32_t(bytes[pos + 2]) << 16 | uint32_t(bytes[pos + 3]) << 24;
        pos += 4;
        return v;
    }
    uint64_t u64(const char* what) {
        uint64_t lo = u32(what);
        uint64_t hi = u32(what);
        return lo | (hi << 32);
    }
    float f32(const char* what) { return std::bit_cast<float>(u32(what)); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
};

std::vector<uint8_t> encode_header(const std::vector<LayerSpec>& specs) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 8);
    put_u32(out, kVersion);
    put_u32(out, uint32_t(specs.size()));
    for (const auto& s : specs) {
        std::vector<uint8_t> rec;
        put_u32(rec, uint32_t(s.kind));
        switch (s.kind) {
            case LayerKind::input:
                put_u32(rec, uint32_t(s.c));
                put_u32(rec, uint32_t(s.h));
                put_u32(rec, uint32_t(s.w));
                break;
            case LayerKind::conv:
                put_u32(rec, uint32_t(s.in_channels));
                put_u32(rec, uint32_t(s.out_channels));
                put_u32(rec, uint32_t(s.kh));
                put_u32(rec, uint32_t(s.kw));
                put_u32(rec, uint32_t(s.sh));
                put_u32(rec, uint32_t(s.sw));
                put_u32(rec, uint32_t(s.ph));
                put_u32(rec, uint32_t(s.pw));
                break;
            case LayerKind::maxpool:
                put_u32(rec, uint32_t(s.kh));
                put_u32(rec, uint32_t(s.kw));
                put_u32(rec, uint32_t(s.sh));
                put_u32(rec, uint32_t(s.sw));
                break;
            case LayerKind::dropout:
                put_u64(rec, std::bit_cast<uint64_t>(s.rate));
                break;
            case LayerKind::dense:
                put_u32(rec, uint32_t(s.in_features));
                put_u32(rec, uint32_t(s.out_features));
                break;
            case LayerKind::relu:
            case LayerKind::flatten:
            case LayerKind::softmax:
                break;
        }
        put_u32(out, uint32_t(rec.size()));
        out.insert(out.end(), rec.begin(), rec.end());
    }
    return out;
}

std::vector<LayerSpec> decode_header(Reader& r) {
    r.need(8, "magic");
    for (int i = 0; i < 8; ++i) {
        if (char(r.bytes[size_t(i)]) != kMagic[i]) {
            throw CheckpointError(CheckpointError::Kind::BadMagic,
                                  "checkpoint magic mismatch: not a BRSNET01 file");
        }
    }
    r.pos = 8;
    const uint32_t version = r.u32("version");
    if (version != kVersion) {
        throw CheckpointError(CheckpointError::Kind::BadVersion,
                              "unsupported checkpoint version " + std::to_string(version));
    }
    const uint32_t count = r.u32("layer count");
    if (count == 0 || count > 4096) {
        throw CheckpointError(CheckpointError::Kind::Malformed, "implausible layer count");
    }
    std::vector<LayerSpec> specs;
    specs.reserve(count);
    for (uint32_t i = 0; i < count; ++i) {
        const uint32_t len = r.u32("record length");
        const size_t rec_end = r.pos + len;
        r.need(len, "layer record");
        const uint32_t kind = r.u32("layer kind");
        LayerSpec s;
        switch (LayerKind(kind)) {
            case LayerKind::input:
                s = LayerSpec::input(r.u32("c"), r.u32("h"), r.u32("w"));
                break;
            case LayerKind::conv: {
                const uint32_t in_c = r.u32("in_c");
                const uint32_t out_c = r.u32("out_c");
                const uint32_t kh = r.u32("kh");
                const uint32_t kw = r.u32("kw");
                const uint32_t sh = r.u32("sh");
                const uint32_t sw = r.u32("sw");
                const uint32_t ph = r.u32("ph");
                const uint32_t pw = r.u32("pw");
                s = LayerSpec::conv(in_c, out_c, kh, 1, 0, /*any_kernel=*/true);
                s.kh = kh;
                s.kw = kw;
                s.sh = sh;
                s.sw = sw;
                s.ph = ph;
                s.pw = pw;
                break;
            }
            case LayerKind::relu:
                s = LayerSpec::relu();
                break;
            case LayerKind::maxpool: {
                const uint32_t kh = r.u32("kh");
                const uint32_t kw = r.u32("kw");
                const uint32_t sh = r.u32("sh");
                const uint32_t sw = r.u32("sw");
                s = LayerSpec::maxpool(kh, sh);
                s.kw = kw;
                s.sw = sw;
                break;
            }
            case LayerKind::dropout:
                s = LayerSpec::dropout(r.f64("rate"));
                break;
            case LayerKind::flatten:
                s = LayerSpec::flatten();
                break;
            case LayerKind::dense:
                s = LayerSpec::dense(r.u32("in_f"), r.u32("out_f"));
                break;
            case LayerKind::softmax:
                s = LayerSpec::softmax();
                break;
            default:
                throw CheckpointError(CheckpointError::Kind::Malformed,
                                      "unknown layer kind " + std::to_string(kind));
        }
        if (r.pos != rec_end) {
            throw CheckpointError(CheckpointError::Kind::Malformed,
                                  "layer record length mismatch at offset " +
                                      std::to_string(r.pos));
        }
        specs.push_back(s);
    }
    return specs;
}

}  // namespace

void save_checkpoint(NetworkF& net, const std::string& path) {
    std::vector<uint8_t> bytes = encode_header(net.specs());

    std::vector<uint8_t> payload;
    for (const auto& p : net.params()) {
        for (int64_t i = 0; i < p.value->size(); ++i) put_f32(payload, (*p.value)[i]);
    }
    const uint32_t crc =
        uint32_t(::crc32(0L, payload.data(), uInt(payload.size())));
    bytes.insert(bytes.end(), payload.begin(), payload.end());
    put_u32(bytes, crc);

    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("cannot open checkpoint for writing: " + path);
    const size_t written = std::fwrite(bytes.data(), 1, bytes.size(), f);
    const bool ok = written == bytes.size() && std::fclose(f) == 0;
    if (!ok) throw IoError("failed to write checkpoint: " + path);
}

NetworkF load_checkpoint(const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "rb");
    if (!f) throw IoError("cannot open checkpoint: " + path);
    std::vector<uint8_t> bytes;
    uint8_t buf[1 << 16];
    size_t got;
    while ((got = std::fread(buf, 1, sizeof(buf), f)) > 0) bytes.insert(bytes.end(), buf, buf + got);
    std::fclose(f);

    Reader r{bytes};
    std::vector<LayerSpec> specs;
    try {
        specs = decode_header(r);
    } catch (const CheckpointError&) {
        throw;
    } catch (const Error& e) {
        throw CheckpointError(CheckpointError::Kind::Malformed,
                              std::string("checkpoint header invalid: ") + e.what());
    }

    Rng scratch_rng(0);
    NetworkF net(specs, scratch_rng);

    int64_t param_floats = 0;
    for (const auto& p : net.params()) param_floats += p.value->size();
    const size_t payload_size = size_t(param_floats) * 4;
    if (r.pos + payload_size + 4 > bytes.size()) {
        throw CheckpointError(CheckpointError::Kind::Truncated,
                              "checkpoint truncated: payload needs " +
                                  std::to_string(payload_size) + " bytes at offset " +
                                  std::to_string(r.pos));
    }
    if (r.pos + payload_size + 4 != bytes.size()) {
        throw CheckpointError(CheckpointError::Kind::Malformed,
                              "checkpoint has trailing bytes after CRC");
    }
    const uint32_t crc = uint32_t(::crc32(0L, bytes.data() + r.pos, uInt(payload_size)));
    for (auto& p : net.params()) {
        for (int64_t i = 0; i < p.value->size(); ++i) (*p.value)[i] = r.f32("payload");
    }
    const uint32_t stored = r.u32("crc");
    if (crc != stored) {
        throw CheckpointError(CheckpointError::Kind::BadCrc,
                              "checkpoint payload CRC mismatch (stored " + std::to_string(stored) +
                                  ", computed " + std::to_string(crc) + ")");
    }
    return net;
}

}  // namespace brassica
