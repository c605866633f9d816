#pragma once

#include <stdexcept>
#include <string>

namespace tactful {

// Argument outside an operation's mathematical domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A state that valid inputs can never produce.
class InvariantError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// Non-finite values or failed numerical procedures.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed input files; the message names the row/column or key.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace tactful
