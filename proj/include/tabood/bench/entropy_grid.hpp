#pragma once

#include "tabood/models/entropy_map.hpp"

#include <filesystem>
#include <string>

namespace tabood::bench {

/// x,y,entropy rows in grid order.
std::string entropy_map_csv(const models::EntropyMap& map);

/// Writes the CSV to `path` and `<path>.meta.json` with C, ln C and the grid.
void write_entropy_map(const models::EntropyMap& map, const models::GridSpec& grid,
                       const std::filesystem::path& path);

}  // namespace tabood::bench
