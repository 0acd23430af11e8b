#pragma once

#include <filesystem>

#include "wavesep/dsp/mel.hpp"

namespace wavesep::dsp {

// Text format: a `rows cols` header line, then one line of space-separated values per row.
void write_text_grid(const Grid& grid, const std::filesystem::path& path);
Grid read_text_grid(const std::filesystem::path& path);

}  // namespace wavesep::dsp
