#include "learn/error.hpp"

#include <algorithm>

namespace learn {

Error::Error(ErrorCategory category, std::string code, const std::string& detail)
    : std::runtime_error(code + ": " + detail),
      category_(category),
      code_(std::move(code)),
      detail_(detail) {}

void throw_config(std::string code, const std::string& detail) {
  throw Error(ErrorCategory::config, std::move(code), detail);
}

void throw_data(std::string code, const std::string& detail) {
  throw Error(ErrorCategory::data, std::move(code), detail);
}

void throw_runtime(std::string code, const std::string& detail) {
  throw Error(ErrorCategory::runtime, std::move(code), detail);
}

void Diagnostics::warn(std::string code, std::string subject, std::string message) {
  entries_.push_back({std::move(code), std::move(subject), std::move(message)});
}

std::size_t Diagnostics::count(std::string_view code) const {
  return static_cast<std::size_t>(std::count_if(entries_.begin(), entries_.end(),
                                                [&](const Diagnostic& d) { return d.code == code; }));
}

void Diagnostics::append(const Diagnostics& other) {
  entries_.insert(entries_.end(), other.entries_.begin(), other.entries_.end());
}

}  // namespace learn
