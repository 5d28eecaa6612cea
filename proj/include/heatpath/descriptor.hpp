#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace heatpath {

/// A registry reference of the form `name(p1,p2,...)`; `name` alone means no parameters.
struct Descriptor {
    std::string name;
    std::vector<double> params;

    bool operator==(const Descriptor&) const = default;
};

Descriptor parse_descriptor(std::string_view text);
std::string format_descriptor(const Descriptor& d);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view text);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace heatpath
