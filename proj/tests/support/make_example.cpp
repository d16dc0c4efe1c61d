// Writes the packaged example scenarios: two-step reference films and
// uniformly framed raw films sharing one visual vocabulary.
#include <cstdio>
#include <filesystem>
#include <string>

#include "autocut/featstore.hpp"
#include "support/style_world.hpp"

namespace fs = std::filesystem;
using namespace autocut;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: %s OUT_DIR\n", argv[0]);
    return 2;
  }
  const fs::path out = argv[1];
  fs::create_directories(out);

  testing::WorldOptions ref;
  ref.prefix = "ref";
  testing::WorldOptions raw = ref;
  raw.style = testing::SizeStyle::kUniform;
  raw.prefix = "raw";

  char name[64];
  for (std::size_t i = 0; i < 12; ++i) {
    std::snprintf(name, sizeof name, "ref%02zu.scenario.json", i);
    write_scenario(testing::film_scenario(ref, 11, 101, i), out / name);
  }
  for (std::size_t i = 0; i < 4; ++i) {
    std::snprintf(name, sizeof name, "raw%02zu.scenario.json", i);
    write_scenario(testing::film_scenario(raw, 11, 202, i), out / name);
  }
  return 0;
}
