#pragma once

#include <stdexcept>
#include <string>

namespace ecalc {

// Bad user input: unknown identifiers, malformed files, universe mismatches.
struct InputError : std::runtime_error {
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Source text that does not parse; carries a byte-accurate location range.
struct ParseError : std::runtime_error {
    int line = 0;
    int col = 0;
    int end_line = 0;
    int end_col = 0;
    ParseError(const std::string& what, int line_, int col_)
        : ParseError(what, line_, col_, line_, col_) {}
    ParseError(const std::string& what, int line_, int col_, int eline, int ecol)
        : std::runtime_error(what + " at " + std::to_string(line_) + ":" + std::to_string(col_)),
          line(line_), col(col_), end_line(eline), end_col(ecol) {}
};

} // namespace ecalc
