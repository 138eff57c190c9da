#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "codedblur/image.hpp"
#include "codedblur/optics.hpp"

namespace codedblur::io {

/// Portable float map: "PF" (3-channel) or "Pf" (1-channel), little-endian
/// (scale -1.0), rows bottom-to-top. Values are written as float32, so data
/// read from a PFM round-trips bit-exactly.
void write_pfm(const std::filesystem::path& path, const LinearImage& img);
LinearImage read_pfm(const std::filesystem::path& path);

/// 8-bit PNG. The writer clamps to [0,1] and quantizes; the reader returns
/// values/255 without any CRF conversion (gamma-space values).
void write_png(const std::filesystem::path& path, const LinearImage& img);
LinearImage read_png(const std::filesystem::path& path);

/// Schedule files: plain text, one decimal real per line.
/// expected_count >= 0 enforces an exact line count.
std::vector<double> read_schedule(const std::filesystem::path& path, int expected_count);
void write_schedule(const std::filesystem::path& path, std::span<const double> psi);
/// Canonical text form (shortest round-trip decimals, one per line); also the
/// byte stream hashed into schedule checksums.
std::string schedule_text(std::span<const double> psi);

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Kernel stack as one 3-channel float image: kernels stacked vertically in
/// time order (height = count * kernel_size).
LinearImage stack_to_image(const optics::PSFStack& stack);

/// Display contact sheet: ceil(sqrt(N)) columns, row-major time order, each
/// kernel max-normalized jointly over its three channels.
LinearImage contact_sheet(const optics::PSFStack& stack);

/// Shortest round-trip decimal formatting ("%.17g").
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace codedblur::io
