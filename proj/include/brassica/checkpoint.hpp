#pragma once

#include <string>

#include "brassica/network.hpp"

namespace brassica {

// Portable binary checkpoint, byte-exact:
//
//   magic            8 bytes  "BRSNET01"
//   version          u32 LE   (currently 1)
//   layer_count      u32 LE
//   per layer        u32 LE record length, then the record:
//                      u32 LE kind, then kind-specific fields --
//                      input:   c, h, w            (u32 LE each)
//                      conv:    in_c, out_c, kh, kw, sh, sw, ph, pw
//                      maxpool: kh, kw, sh, sw
//                      dropout: rate               (f64 LE)
//                      dense:   in_f, out_f
//                      relu / flatten / softmax: no fields
//   payload          f32 LE parameters, layers in spec order,
//                    weights before bias within a layer
//   crc32            u32 LE, IEEE polynomial, over the payload bytes only
//
// Loading validates magic, version, header structure, payload length and CRC,
// raising a distinct CheckpointError kind for each failure mode. A round trip
// reproduces every parameter bitwise.

void save_checkpoint(NetworkF& net, const std::string& path);

NetworkF load_checkpoint(const std::string& path);

}  // namespace brassica
