#ifndef TEQ_ERROR_HPP
#define TEQ_ERROR_HPP

#include <stdexcept>
#include <string>

namespace teq {

// Bad user input: malformed files, out-of-range parameters, unknown ids.
// The CLI maps this to exit code 2.
class invalid_input : public std::runtime_error {
public:
    explicit invalid_input(const std::string& msg) : std::runtime_error(msg) {}
};

// A required piece of state is missing or degenerate (e.g. a layer that was
// never computed, an all-zero accessibility field). CLI exit code 3.
class state_error : public std::runtime_error {
public:
    explicit state_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace teq

#endif
