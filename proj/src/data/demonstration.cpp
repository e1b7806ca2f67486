#include "minehaul/data/demonstration.hpp"

#include "minehaul/errors.hpp"

namespace minehaul::data {

std::size_t frame_count(const DemonstrationSet& demos) {
  std::size_t n = 0;
  for (const Demonstration& d : demos) n += d.frames.size();
  return n;
}

void check_demonstration(const Demonstration& demo) {
  for (std::size_t i = 1; i < demo.frames.size(); ++i) {
    if (!(demo.frames[i].t > demo.frames[i - 1].t))
      throw InvalidInput("demonstration " + std::to_string(demo.episode) + ": timestamps not increasing at frame " +
                         std::to_string(i));
    if (demo.frames[i].s < demo.frames[i - 1].s)
      throw InvalidInput("demonstration " + std::to_string(demo.episode) + ": odometer decreases at frame " +
                         std::to_string(i));
  }
}

}  // namespace minehaul::data
