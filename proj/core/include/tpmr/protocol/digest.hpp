#pragma once

#include <cstdint>
#include <vector>

#include "tpmr/protocol/messages.hpp"
#include "tpmr/tpm.hpp"

namespace tpmr::protocol {

/// K, N, L as u16be followed by every weight as one signed byte, row-major.
std::vector<std::uint8_t> canonical_weights(const WeightMatrix& weights);

/// SHA-256 of canonical_weights().
Digest32 weight_digest(const WeightMatrix& weights);

}  // namespace tpmr::protocol
