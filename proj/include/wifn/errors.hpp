#pragma once

#include <stdexcept>
#include <string>

namespace wifn {

// Input-file problem: syntax, undeclared names, inconsistent declarations.
// Carries a location when one is known.
class parse_error : public std::runtime_error {
public:
  parse_error(std::string msg, int line = 0, int col = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) +
                                          (col > 0 ? ":" + std::to_string(col) : "") +
                                          ": " + msg
                                    : msg),
        line_(line),
        col_(col) {}

  int line() const { return line_; }
  int col() const { return col_; }

private:
  int line_;
  int col_;
};

// Semantic problem discovered during analysis (undeclared typing, unknown
// key inverse, inconsistent unifier).
class analysis_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace wifn
