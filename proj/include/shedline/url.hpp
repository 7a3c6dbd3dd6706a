#pragma once

#include <cctype>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace shedline {

/// A URL in canonical form. Normalization lowercases the scheme and
/// authority (everything before the path), strips surrounding whitespace and
/// trailing slashes, and leaves path/query case untouched. Two Urls compare
/// equal iff their normalized texts are byte-equal.
class Url {
public:
    explicit Url(std::string_view raw) : value_(normalize(raw)) {
        if (value_.empty()) {
            throw std::invalid_argument("Url: empty after normalization: \"" + std::string(raw) + "\"");
        }
    }

    static std::string normalize(std::string_view raw) {
        static constexpr std::string_view ws = " \t\r\n\f\v";
        const auto b = raw.find_first_not_of(ws);
        if (b == std::string_view::npos) return {};
        const auto e = raw.find_last_not_of(ws);
        std::string s{raw.substr(b, e - b + 1)};

        std::size_t authority_start = 0;
        if (const auto p = s.find("://"); p != std::string::npos) {
            authority_start = p + 3;
        }
        auto authority_end = s.find_first_of("/?#", authority_start);
        if (authority_end == std::string::npos) authority_end = s.size();
        for (std::size_t i = 0; i < authority_end; ++i) {
            s[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i])));
        }

        // Stripping a slash can expose trailing whitespace, so peel both.
        while (!s.empty() && (s.back() == '/' || ws.find(s.back()) != std::string_view::npos)) {
            s.pop_back();
        }
        return s;
    }

    const std::string& str() const { return value_; }

    bool operator==(const Url&) const = default;
    auto operator<=>(const Url&) const = default;

private:
    std::string value_;
};

}  // namespace shedline

template <>
struct std::hash<shedline::Url> {
    std::size_t operator()(const shedline::Url& u) const noexcept {
        return std::hash<std::string>{}(u.str());
    }
};
