#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "latentedit/grid.hpp"
#include "latentedit/metrics.hpp"
#include "latentedit/similarity.hpp"

namespace latentedit {

// Latent container (".lted"): 4-byte magic "LTED", u16 version (1), u8
// dtype code (1 = IEEE-754 binary32), u32 C, H, W, then C*H*W binary32
// payload values, channel slowest and width fastest. All integers and
// payload values are little-endian. Values are stored at 32-bit precision;
// write-then-read reproduces the 32-bit rounding exactly.

inline constexpr std::uint16_t kLatentVersion = 1;
inline constexpr std::uint8_t kLatentDtypeF32 = 1;

void write_latent(const std::filesystem::path& path, const Grid& grid);
Grid read_latent(const std::filesystem::path& path);

/// Serialize without touching the filesystem (used for byte-level checks).
std::string encode_latent(const Grid& grid);
Grid decode_latent(std::string_view bytes, const std::string& origin);

enum class MapRange {
  unit,        // values already in [0, 1]
  signed_raw,  // values in [-1, 1], rescaled to [0, 1] first
};

/// Binary PGM (P5), maxval 255, v -> round(v * 255).
void write_map_pgm(const std::filesystem::path& path, const SimilarityMap& map, MapRange range);

/// One latent channel rescaled by its own min/max to 8 bits.
void write_latent_channel_pgm(const std::filesystem::path& path, const Grid& grid, int channel);

/// Masks as PGM: included pixels 255, excluded 0; any nonzero byte reads
/// back as included.
void write_mask_pgm(const std::filesystem::path& path, const RegionMask& mask);
RegionMask read_mask_pgm(const std::filesystem::path& path);

/// PGM loaded as a 1 x H x W grid of byte values in [0, 255].
Grid read_pgm_as_grid(const std::filesystem::path& path);

/// Write-temp-then-rename so interrupted runs never leave a parsable
/// truncated file.
void write_bytes_atomic(const std::filesystem::path& path, std::string_view bytes);
std::string read_bytes(const std::filesystem::path& path);

}  // namespace latentedit
