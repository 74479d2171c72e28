#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace crashsim {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter or input-schema constraint violation. The message names the
// offending field and the constraint.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Gap-closing cap queried on a non-bullish signal (s <= mu_x).
class NotBullishError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Bisection bracket did not straddle a root; indicates parameter pathology.
class BracketError : public Error {
public:
    using Error::Error;
};

// Settlement precondition: the price floor must be nonnegative, otherwise the
// square-root settlement is ill-defined. Caller must reparameterize.
class NegativeFloorError : public Error {
public:
    using Error::Error;
};

// Defensive guard on the settled price; unreachable when the floor is >= 0.
class NonpositiveP2Error : public Error {
public:
    using Error::Error;
};

class RankDeficientError : public Error {
public:
    using Error::Error;
};

class TooFewObservationsError : public Error {
public:
    using Error::Error;
};

// Observation-CSV schema failures. `row` is the 1-based data row (header
// excluded) for NonNumericCell.
class CsvError : public Error {
public:
    enum class Kind { MissingColumn, UnexpectedColumn, NonNumericCell, EmptyTable };

    CsvError(Kind kind, std::string message, std::string column = {}, std::size_t row = 0)
        : Error(std::move(message)), kind(kind), column(std::move(column)), row(row) {}

    Kind kind;
    std::string column;
    std::size_t row;

    static CsvError missing_column(const std::string& name) {
        return {Kind::MissingColumn, "missing column '" + name + "'", name};
    }
    static CsvError unexpected_column(const std::string& name) {
        return {Kind::UnexpectedColumn, "unexpected column '" + name + "'", name};
    }
    static CsvError non_numeric_cell(std::size_t row, const std::string& column, const std::string& text) {
        return {Kind::NonNumericCell,
                "non-numeric cell '" + text + "' at row " + std::to_string(row) + ", column '" + column + "'",
                column, row};
    }
    static CsvError empty_table() { return {Kind::EmptyTable, "observation table has no data rows"}; }
};

namespace detail {
// Always-on internal consistency check (independent of NDEBUG).
inline void check(bool ok, const char* what) {
    if (!ok) throw Error(std::string("internal check failed: ") + what);
}
}  // namespace detail

}  // namespace crashsim
