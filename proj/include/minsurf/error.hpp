#pragma once

#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace minsurf {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text. `offset` is the 0-based character position.
class SyntaxError : public Error {
public:
    SyntaxError(std::size_t offset, const std::string& expected)
        : Error("syntax error at offset " + std::to_string(offset) + ": expected " + expected),
          offset_(offset), expected_(expected) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::string expected_;
};

class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(std::size_t offset, const std::string& name)
        : Error("unknown identifier '" + name + "' at offset " + std::to_string(offset)),
          name_(name) {}
    const std::string& name() const noexcept { return name_; }

private:
    std::string name_;
};

class ArityError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

/// Evaluation hit a singular point (log of a nonpositive value, division by
/// zero, non-finite result). Carries the point and the offending subexpression.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, std::vector<double> point, std::string subexpr)
        : Error(format(what, point, subexpr)), point_(std::move(point)), subexpr_(std::move(subexpr)) {}

    const std::vector<double>& point() const noexcept { return point_; }
    const std::string& subexpression() const noexcept { return subexpr_; }

private:
    static std::string format(const std::string& what, const std::vector<double>& p,
                              const std::string& sub) {
        std::ostringstream os;
        os.precision(17);
        os << "evaluation error: " << what << " in '" << sub << "' at (";
        for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
        os << ")";
        return os.str();
    }

    std::vector<double> point_;
    std::string subexpr_;
};

class UnsupportedSignature : public Error {
public:
    UnsupportedSignature(int n, int m)
        : Error("unsupported signature (n=" + std::to_string(n) + ", m=" + std::to_string(m) + ")") {}
};

class DegenerateGradient : public Error {
public:
    using Error::Error;
};

class SupportOutsideDomain : public Error {
public:
    using Error::Error;
};

} // namespace minsurf
