#pragma once

#include <string_view>

namespace lbro {

/// Working precision of a run. binary32 is emulated: values are stored as
/// doubles but every stored entry and every accumulated reduction is rounded
/// to the nearest binary32 value.
enum class Precision { binary64, binary32 };

/// Unit roundoff u of the mode (2^-53 or 2^-24).
constexpr double unit_roundoff(Precision p) noexcept {
    return p == Precision::binary32 ? 0x1p-24 : 0x1p-53;
}

inline double round_to(Precision p, double x) noexcept {
    return p == Precision::binary32 ? static_cast<double>(static_cast<float>(x)) : x;
}

constexpr std::string_view to_string(Precision p) noexcept {
    return p == Precision::binary32 ? "single" : "double";
}

}  // namespace lbro
