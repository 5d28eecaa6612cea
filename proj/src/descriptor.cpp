#include "heatpath/descriptor.hpp"

#include "heatpath/error.hpp"

#include <charconv>
#include <cmath>

namespace heatpath {

std::string_view trim(std::string_view s) {
    const auto ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) fail(ErrorCode::invalid_input, "cannot format number");
    return std::string(buf, end);
}

double parse_double(std::string_view text) {
    text = trim(text);
    if (text == "pi") return 3.141592653589793;
    if (text == "-pi") return -3.141592653589793;
    double v = 0.0;
    const char* first = text.data();
    if (!text.empty() && text.front() == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty())
        fail(ErrorCode::validation, "not a number: '" + std::string(text) + "'");
    return v;
}

Descriptor parse_descriptor(std::string_view text) {
    text = trim(text);
    Descriptor d;
    const auto open = text.find('(');
    if (open == std::string_view::npos) {
        d.name = std::string(text);
    } else {
        if (text.back() != ')') fail(ErrorCode::validation, "unbalanced descriptor: " + std::string(text));
        d.name = std::string(trim(text.substr(0, open)));
        const auto inner = trim(text.substr(open + 1, text.size() - open - 2));
        if (!inner.empty())
            for (auto part : split(inner, ',')) d.params.push_back(parse_double(part));
    }
    if (d.name.empty()) fail(ErrorCode::validation, "empty descriptor name");
    return d;
}

std::string format_descriptor(const Descriptor& d) {
    if (d.params.empty()) return d.name;
    std::string s = d.name + "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) s += (i ? "," : "") + format_double(d.params[i]);
    return s + ")";
}

}  // namespace heatpath
