#pragma once

#include <stdexcept>
#include <string>

namespace symlab {

/// Raised for contract violations at the library boundary (bad names,
/// out-of-range indices, dimension mismatches, budget overruns).
class Error : public std::runtime_error
{
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace symlab
