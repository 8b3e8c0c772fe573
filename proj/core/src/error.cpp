#include "srbo/error.hpp"

namespace srbo {

ParseError::ParseError(std::size_t line, const std::string& what)
    : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}

}  // namespace srbo
