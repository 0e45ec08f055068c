#pragma once

#include <string>

#include "dga/stack.hpp"
#include "json.hpp"

namespace dga {

/// CRC-32 (IEEE 802.3 polynomial), used as the per-block checksum of the
/// model container.
std::uint32_t crc32(const void* data, std::size_t len);

/// Writes a versioned binary container: magic, format version, one JSON
/// metadata block, then raw little-endian f64 parameter blocks, each followed
/// by its CRC32. save -> load -> save is byte-identical. run_meta is embedded
/// verbatim under the "run" key (seed, config hash, provenance, ...).
void save_model(const DeepDga& m, const std::string& path,
                const nlohmann::json& run_meta = nlohmann::json::object());

/// Reads a container written by save_model. Throws FormatError (with the
/// offending offset) on a bad magic, version, truncation or checksum
/// mismatch; nothing is returned partially.
DeepDga load_model(const std::string& path);

/// The "run" metadata block of a model file, without loading parameters.
nlohmann::json read_model_run_meta(const std::string& path);

}  // namespace dga
