#include "tabood/bench/entropy_grid.hpp"

#include "tabood/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <fstream>

namespace tabood::bench {

std::string entropy_map_csv(const models::EntropyMap& map) {
  std::string out = "x,y,entropy\n";
  char buf[128];
  for (const auto& c : map.cells) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", c.x, c.y, c.entropy);
    out += buf;
  }
  return out;
}

void write_entropy_map(const models::EntropyMap& map, const models::GridSpec& grid,
                       const std::filesystem::path& path) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << entropy_map_csv(map);
  }
  const nlohmann::json meta = {{"classes", map.num_classes},
                               {"ln_c", map.max_entropy},
                               {"resolution", grid.resolution},
                               {"x_bounds", {grid.x_min, grid.x_max}},
                               {"y_bounds", {grid.y_min, grid.y_max}},
                               {"rows", map.cells.size()}};
  std::filesystem::path meta_path = path;
  meta_path += ".meta.json";
  std::ofstream out(meta_path, std::ios::binary);
  if (!out) throw IoError("cannot write " + meta_path.string());
  out << meta.dump(2) << '\n';
}

}  // namespace tabood::bench
