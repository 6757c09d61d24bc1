#pragma once

#include <string>

#include "phasebind/rbm.hpp"

namespace phasebind {

/// PBMODEL v1 container: a text manifest (`PBMODEL v1`, a `layers <L>` line,
/// then per layer `layer <i> vis=<n> hid=<m> rf=<r> in=<h>x<w>x<c>
/// grid=<h>x<w>x<c>`), a `DATA` separator, and a binary payload holding per
/// layer W (row-major float32), b_v, b_h (float32) and the mask as a
/// row-major MSB-first bitset, all little-endian, trailed by the FNV-1a 64
/// checksum of the payload. Round-trips bit-exactly.
void save_model(const DbmModel<float>& model, const std::string& path);
DbmModel<float> load_model(const std::string& path);

}  // namespace phasebind
