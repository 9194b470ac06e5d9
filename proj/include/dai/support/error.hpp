#pragma once

#include <stdexcept>
#include <string>

namespace dai {

// Malformed program text or session script.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, int col, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          m_line(line), m_col(col) {}
    int line() const { return m_line; }
    int col() const { return m_col; }

private:
    int m_line;
    int m_col;
};

// Structurally invalid program or edit (unknown location, irreducible CFG, ...).
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A caller broke an operation's precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

// One of the DAIG invariants was found broken.
class InvariantViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace dai
