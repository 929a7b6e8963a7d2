#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace learn {

// Broad failure class; the CLI maps these onto exit codes 2/3/4.
enum class ErrorCategory { config, data, runtime };

// Every failure raised by the library carries a stable machine-readable code
// (e.g. "SchemaViolation", "DuplicateId") plus a human-readable detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string code, const std::string& detail);

  ErrorCategory category() const noexcept { return category_; }
  const std::string& code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorCategory category_;
  std::string code_;
  std::string detail_;
};

[[noreturn]] void throw_config(std::string code, const std::string& detail);
[[noreturn]] void throw_data(std::string code, const std::string& detail);
[[noreturn]] void throw_runtime(std::string code, const std::string& detail);

// A warning or non-fatal problem. `subject` names the offending key,
// dataset, class or sample so callers can act on it.
struct Diagnostic {
  std::string code;
  std::string subject;
  std::string message;

  bool operator==(const Diagnostic&) const = default;
};

class Diagnostics {
 public:
  void warn(std::string code, std::string subject, std::string message);
  const std::vector<Diagnostic>& entries() const noexcept { return entries_; }
  bool empty() const noexcept { return entries_.empty(); }
  std::size_t count(std::string_view code) const;
  void append(const Diagnostics& other);

 private:
  std::vector<Diagnostic> entries_;
};

// Null-safe helper so optional sinks can be passed as a raw pointer.
inline void warn(Diagnostics* sink, std::string code, std::string subject, std::string message) {
  if (sink != nullptr) sink->warn(std::move(code), std::move(subject), std::move(message));
}

}  // namespace learn
