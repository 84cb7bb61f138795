#include "streamlab/common/duration.h"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace streamlab {

SimTime ParseDuration(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  std::size_t start = i;
  if (i < text.size() && (text[i] == '-' || text[i] == '+')) ++i;
  while (i < text.size() &&
         (std::isdigit(static_cast<unsigned char>(text[i])) || text[i] == '.' ||
          text[i] == 'e' || text[i] == 'E')) {
    // Do not swallow the unit of "1e" style input; units never start with e.
    ++i;
  }
  std::string number(text.substr(start, i - start));
  std::string unit(text.substr(i));
  while (!unit.empty() && std::isspace(static_cast<unsigned char>(unit.back()))) unit.pop_back();
  if (number.empty()) throw ConfigError("malformed duration '" + std::string(text) + "'");
  char* end = nullptr;
  double value = std::strtod(number.c_str(), &end);
  if (end == nullptr || *end != '\0' || !std::isfinite(value)) {
    throw ConfigError("malformed duration '" + std::string(text) + "'");
  }
  double scale = 0;
  if (unit.empty() || unit == "s") {
    scale = kSecond;
  } else if (unit == "ns") {
    scale = kNanosecond;
  } else if (unit == "us") {
    scale = kMicrosecond;
  } else if (unit == "ms") {
    scale = kMillisecond;
  } else if (unit == "m" || unit == "min") {
    scale = kMinute;
  } else if (unit == "h") {
    scale = kHour;
  } else {
    throw ConfigError("unknown duration unit '" + unit + "' in '" + std::string(text) + "'");
  }
  return static_cast<SimTime>(std::llround(value * scale));
}

SimTime ParseClockOfDay(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("expected HH:MM, got '" + std::string(text) + "'");
  }
  int hours = 0;
  int minutes = 0;
  auto h = std::from_chars(text.data(), text.data() + colon, hours);
  auto m = std::from_chars(text.data() + colon + 1, text.data() + text.size(), minutes);
  if (h.ec != std::errc() || m.ec != std::errc() || hours < 0 || hours > 24 || minutes < 0 ||
      minutes >= 60) {
    throw ConfigError("expected HH:MM, got '" + std::string(text) + "'");
  }
  return hours * kHour + minutes * kMinute;
}

std::string FormatDuration(SimTime t) {
  char buf[64];
  if (t % kSecond == 0) {
    std::snprintf(buf, sizeof(buf), "%llds", static_cast<long long>(t / kSecond));
  } else if (t % kMillisecond == 0) {
    std::snprintf(buf, sizeof(buf), "%lldms", static_cast<long long>(t / kMillisecond));
  } else {
    std::snprintf(buf, sizeof(buf), "%lldns", static_cast<long long>(t));
  }
  return buf;
}

}  // namespace streamlab
