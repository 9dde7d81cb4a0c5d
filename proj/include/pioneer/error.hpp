#pragma once

#include <stdexcept>
#include <string>

namespace pioneer {

// Error categories double as CLI exit codes.
enum class ErrorCode : int {
    invalid_argument = 3,
    config = 4,
    precondition = 5,
    budget_exceeded = 6,
    extinction = 7,
    io = 8,
    hash_collision = 9,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, ErrorCode code, const char* what) {
    if (!cond) [[unlikely]]
        throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) [[unlikely]]
        throw Error(code, what);
}

}  // namespace pioneer
