#include "pioneer/parallel.hpp"

#include <cstdlib>
#include <string>

#include "pioneer/error.hpp"

namespace pioneer {

int worker_count() {
    if (const char* env = std::getenv("PIONEER_WORKERS"); env && *env) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        require(end && *end == '\0' && v >= 1 && v <= 1024, ErrorCode::config, std::string("bad PIONEER_WORKERS value '") + env + "'");
        return int(v);
    }
    unsigned h = std::thread::hardware_concurrency();
    return h == 0 ? 1 : int(h);
}

}  // namespace pioneer
