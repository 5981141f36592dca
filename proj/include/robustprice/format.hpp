#ifndef ROBUSTPRICE_FORMAT_HPP_
#define ROBUSTPRICE_FORMAT_HPP_

#include <cstdint>
#include <string>
#include <string_view>

namespace robustprice {

// Fixed 9-significant-digit rendering used by every CSV/JSON artifact.
std::string format_number(double value);

// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

}  // namespace robustprice

#endif  // ROBUSTPRICE_FORMAT_HPP_
