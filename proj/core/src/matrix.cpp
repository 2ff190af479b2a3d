#include <chebprop/matrix.hpp>

#include <string>

namespace chebprop {

Precision parse_precision(std::string_view token) {
    if (token == "fp32" || token == "single" || token == "float")
        return Precision::fp32;
    if (token == "fp64" || token == "double")
        return Precision::fp64;
    throw Error(ErrorCode::config, "unknown precision '" + std::string(token) + "' (expected fp32 or fp64)");
}

std::string_view to_string(Precision p) noexcept {
    return p == Precision::fp32 ? "fp32" : "fp64";
}

} // namespace chebprop
