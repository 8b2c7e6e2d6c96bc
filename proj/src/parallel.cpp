#include "holopt/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace holopt {

unsigned worker_count(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* cap = std::getenv("HOLOPT_WORKERS"); cap != nullptr && *cap != '\0') {
    try {
      const long v = std::stol(cap);
      if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    } catch (const std::exception&) {
      // Unparseable values are ignored.
    }
  }
  return n;
}

}  // namespace holopt
