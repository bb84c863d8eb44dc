#include <array>
#include <charconv>
#include <sstream>

#include "embspec/cli.hpp"
#include "embspec/error.hpp"

namespace embspec::cli {

ExitCode exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Usage: return ExitCode::Usage;
    case ErrorKind::Data: return ExitCode::Data;
    case ErrorKind::Numeric: return ExitCode::Numeric;
  }
  return ExitCode::Data;
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::vector<std::string> parse_group_by(const std::string& text) {
  std::vector<bool> chosen(kGroupKeys.size(), false);
  std::stringstream ss(text);
  std::string key;
  while (std::getline(ss, key, ',')) {
    if (key.empty()) continue;
    bool known = false;
    for (std::size_t i = 0; i < kGroupKeys.size(); ++i) {
      if (kGroupKeys[i] == key) {
        chosen[i] = true;
        known = true;
      }
    }
    if (!known) throw UsageError("unknown --group-by key '" + key + "' (use language, source, model_id, layer)");
  }
  std::vector<std::string> keys;
  for (std::size_t i = 0; i < kGroupKeys.size(); ++i)
    if (chosen[i]) keys.push_back(kGroupKeys[i]);
  return keys;
}

}  // namespace embspec::cli
