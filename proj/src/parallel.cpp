#include "maxstable/parallel.hpp"

#include <charconv>
#include <cstring>

namespace maxstable {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MAXSTABLE_WORKERS")) {
    int v = 0;
    const char* end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec == std::errc() && ptr == end && v > 0) return v;
  }
  return 1;
}

}  // namespace maxstable
