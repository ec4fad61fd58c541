#pragma once

#include <stdexcept>
#include <string>

namespace seqaudit {

// Bad configuration (unknown keys, invalid parameter combinations,
// unusable paths). The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Unusable replay data. Carries the 1-based row (and column when known)
// so the operator can locate the bad record.
class ParseError : public std::runtime_error {
  public:
    ParseError(long row, int column, const std::string& msg)
        : std::runtime_error("row " + std::to_string(row) +
                             (column > 0 ? ", column " + std::to_string(column) : "") +
                             ": " + msg),
          row_(row),
          column_(column) {}

    long row() const { return row_; }
    int column() const { return column_; }

  private:
    long row_;
    int column_;
};

} // namespace seqaudit
