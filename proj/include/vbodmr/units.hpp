#pragma once

#include <string>
#include <string_view>

// Unit handling at the external boundary. Internally everything is MHz,
// Gauss, ns and degrees; conversions of user-supplied text are done on the
// decimal representation so that e.g. "16.7" mT becomes exactly the double
// nearest to 167 G.
namespace vbodmr::units {

enum class FieldUnit { gauss, millitesla };
enum class FrequencyUnit { mhz, ghz };

inline constexpr double kGaussPerMillitesla = 10.0;
inline constexpr double kMhzPerGhz = 1000.0;

// Power of ten that takes a value in `unit` to the canonical unit.
int decimal_exponent(FieldUnit unit) noexcept;
int decimal_exponent(FrequencyUnit unit) noexcept;

std::string_view name(FieldUnit unit) noexcept;
std::string_view name(FrequencyUnit unit) noexcept;
FieldUnit parse_field_unit(std::string_view text);
FrequencyUnit parse_frequency_unit(std::string_view text);

// Moves the decimal point of a plain decimal literal by `exponent` places.
// "16.7", 1 -> "167"; "3.49", 3 -> "3490"; "167", -1 -> "16.7".
// Throws InvalidArgument on anything that is not [+-]digits[.digits][e[+-]digits].
std::string shift_decimal(std::string_view text, int exponent);

// Parses a decimal literal and scales it by 10^exponent without intermediate
// binary rounding.
double parse_scaled(std::string_view text, int exponent);

// Shortest decimal text that parses back to `value`.
std::string format_shortest(double value);

// value * 10^exponent, computed on the shortest decimal form of `value`, so
// rescale(rescale(x, k), -k) == x for decimal inputs of moderate precision.
double rescale(double value, int exponent);

// Plain parse; throws InvalidArgument on trailing garbage or non-finite values.
double parse_double(std::string_view text);

inline double millitesla_to_gauss(double mt) { return mt * kGaussPerMillitesla; }
inline double gauss_to_millitesla(double g) { return g / kGaussPerMillitesla; }
inline double ghz_to_mhz(double ghz) { return ghz * kMhzPerGhz; }
inline double mhz_to_ghz(double mhz) { return mhz / kMhzPerGhz; }

double deg_to_rad(double deg) noexcept;
double rad_to_deg(double rad) noexcept;

}  // namespace vbodmr::units
