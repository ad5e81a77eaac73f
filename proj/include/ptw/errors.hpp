#pragma once

#include <stdexcept>
#include <string>

namespace ptw {

enum class ErrorKind {
    Domain,          // bad user input: shapes, ranges, unknown ids
    NotApplicable,   // operation makes no sense for this object
    Convergence,
    DegenerateOrbit,
    Nondegeneracy,
    ConstraintCount,
    Contour,
    Resolution,
    BranchAmbiguity,
    Numerical,
    Config,
    Io,
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        fail(ErrorKind::Domain, what);
}

} // namespace ptw
