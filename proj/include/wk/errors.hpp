#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace wk {

/// Raised when a curvature tuple or matrix leaves the positive cone.
class ConeViolation : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when a radial graph is evaluated at a non-positive u.
class GraphDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised by operations that require an admissible state.
class NotAdmissible : public std::runtime_error {
public:
    NotAdmissible(const std::string& what, std::size_t node)
        : std::runtime_error(what), node_(node) {}
    std::size_t node() const noexcept { return node_; }

private:
    std::size_t node_;
};

}  // namespace wk
