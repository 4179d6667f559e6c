#include "eslab/parallel.hpp"

#include <charconv>
#include <cstdlib>
#include <string_view>

namespace eslab {

std::size_t resolve_thread_count(std::optional<std::size_t> requested) {
  if (requested && *requested > 0) return *requested;
  if (const char* env = std::getenv("ESLAB_THREADS")) {
    const std::string_view text(env);
    std::size_t n = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
    if (ec == std::errc() && ptr == text.data() + text.size() && n > 0) return n;
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

}  // namespace eslab
