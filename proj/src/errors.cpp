#include "rkhsfar/errors.hpp"

namespace rkhsfar {

namespace {

std::string with_location(const std::string& what, std::size_t row, std::size_t column) {
    std::string out = what;
    if (row != 0) {
        out += " (row " + std::to_string(row);
        if (column != 0) out += ", column " + std::to_string(column);
        out += ")";
    }
    return out;
}

}  // namespace

ParseError::ParseError(const std::string& what, std::size_t row, std::size_t column)
    : InputError(with_location(what, row, column)), row_(row), column_(column) {}

NumericalError::NumericalError(const std::string& what, long iteration)
    : Error(iteration >= 0 ? what + " (iteration " + std::to_string(iteration) + ")" : what),
      iteration_(iteration) {}

}  // namespace rkhsfar
