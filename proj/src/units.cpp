#include "vbodmr/units.hpp"

#include "vbodmr/error.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <string>

namespace vbodmr {

namespace units {

int decimal_exponent(FieldUnit unit) noexcept { return unit == FieldUnit::millitesla ? 1 : 0; }
int decimal_exponent(FrequencyUnit unit) noexcept { return unit == FrequencyUnit::ghz ? 3 : 0; }

std::string_view name(FieldUnit unit) noexcept {
  return unit == FieldUnit::millitesla ? "mT" : "G";
}
std::string_view name(FrequencyUnit unit) noexcept {
  return unit == FrequencyUnit::ghz ? "GHz" : "MHz";
}

FieldUnit parse_field_unit(std::string_view text) {
  if (text == "G" || text == "gauss") return FieldUnit::gauss;
  if (text == "mT" || text == "millitesla") return FieldUnit::millitesla;
  throw InvalidArgument("unknown field unit '" + std::string(text) + "' (expected G or mT)");
}

FrequencyUnit parse_frequency_unit(std::string_view text) {
  if (text == "MHz") return FrequencyUnit::mhz;
  if (text == "GHz") return FrequencyUnit::ghz;
  throw InvalidArgument("unknown frequency unit '" + std::string(text) +
                        "' (expected MHz or GHz)");
}

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

[[noreturn]] void bad_literal(std::string_view text) {
  throw InvalidArgument("malformed number '" + std::string(text) + "'");
}

}  // namespace

std::string shift_decimal(std::string_view text, int exponent) {
  std::size_t i = 0;
  bool negative = false;
  if (i < text.size() && (text[i] == '+' || text[i] == '-')) {
    negative = text[i] == '-';
    ++i;
  }
  std::string digits;
  long point = 0;
  bool any_digit = false;
  while (i < text.size() && is_digit(text[i])) {
    digits.push_back(text[i++]);
    any_digit = true;
  }
  point = static_cast<long>(digits.size());
  if (i < text.size() && text[i] == '.') {
    ++i;
    while (i < text.size() && is_digit(text[i])) {
      digits.push_back(text[i++]);
      any_digit = true;
    }
  }
  if (!any_digit) bad_literal(text);
  if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
    ++i;
    int exp_value = 0;
    const char* first = text.data() + i;
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, exp_value);
    if (ec != std::errc() || ptr != last) bad_literal(text);
    point += exp_value;
    i = text.size();
  }
  if (i != text.size()) bad_literal(text);

  point += exponent;
  // Pad so that the decimal point falls inside or at the edge of `digits`.
  if (point < 0) {
    digits.insert(0, static_cast<std::size_t>(-point), '0');
    point = 0;
  }
  if (point > static_cast<long>(digits.size())) digits.append(point - digits.size(), '0');

  std::string int_part = digits.substr(0, static_cast<std::size_t>(point));
  std::string frac_part = digits.substr(static_cast<std::size_t>(point));
  const auto first_nonzero = int_part.find_first_not_of('0');
  int_part = first_nonzero == std::string::npos ? "0" : int_part.substr(first_nonzero);
  const auto last_nonzero = frac_part.find_last_not_of('0');
  frac_part = last_nonzero == std::string::npos ? "" : frac_part.substr(0, last_nonzero + 1);

  std::string out;
  if (negative && !(int_part == "0" && frac_part.empty())) out.push_back('-');
  out += int_part;
  if (!frac_part.empty()) {
    out.push_back('.');
    out += frac_part;
  }
  return out;
}

double parse_double(std::string_view text) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (first != last && *first == '+') ++first;
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) bad_literal(text);
  if (!std::isfinite(value)) bad_literal(text);
  return value;
}

std::string format_shortest(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

double rescale(double value, int exponent) {
  if (!std::isfinite(value)) throw InvalidArgument("cannot rescale a non-finite value");
  return parse_scaled(format_shortest(value), exponent);
}

double parse_scaled(std::string_view text, int exponent) {
  if (exponent == 0) return parse_double(text);
  return parse_double(shift_decimal(text, exponent));
}

double deg_to_rad(double deg) noexcept { return deg * std::numbers::pi / 180.0; }
double rad_to_deg(double rad) noexcept { return rad * 180.0 / std::numbers::pi; }

}  // namespace units
}  // namespace vbodmr
