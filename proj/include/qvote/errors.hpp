#pragma once

#include <stdexcept>
#include <string>

namespace qvote {

/// Raised when a request exceeds one of the library's size caps
/// (qubit count, enumeration length, exhaustive event scans).
class ResourceLimit : public std::runtime_error {
  public:
    explicit ResourceLimit(const std::string &what) : std::runtime_error(what) {}
};

} // namespace qvote
