#pragma once

#include <stdexcept>
#include <string>

namespace relgrade {

// Error taxonomy used across the library:
//   std::invalid_argument: caller broke a precondition (usage error)
//   std::domain_error:     input is structurally valid but has no defined
//                          result (zero-norm vector, empty index, ...)
//   IoError:               the filesystem or network failed us
//   ParseError:            a file's content is malformed; carries location
//
// The CLI maps usage/domain/parse errors to exit code 1 and IoError to 2.

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;

  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : std::invalid_argument(file + ":" + std::to_string(line) + ": " + what) {}
};

}  // namespace relgrade
