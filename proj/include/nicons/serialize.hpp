#pragma once

// Deterministic JSON emission. Floating-point values are written with 17
// significant digits so parsing recovers the exact double; repeated dumps of
// the same tree are byte-identical. Non-finite values become null to keep
// the output valid JSON.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace nicons {

using Json = nlohmann::ordered_json;

namespace detail {

inline void json_escape(std::string& out, const std::string& s) {
    out += '"';
    for (const char ch : s) {
        switch (ch) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(ch) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", static_cast<unsigned>(ch));
                    out += buf;
                } else {
                    out += ch;
                }
        }
    }
    out += '"';
}

}  // namespace detail

/// 17 significant digits: enough to recover the exact double when parsed.
inline std::string format_sig17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline void format_double(std::string& out, double v) {
    if (!std::isfinite(v)) {
        out += "null";
        return;
    }
    out += format_sig17(v);
}

inline bool is_scalar(const Json& j) { return !j.is_object() && !j.is_array(); }

inline void dump_value(const Json& j, std::string& out, int indent, int depth) {
    if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        const std::string pad(static_cast<std::size_t>(depth * indent), ' ');
        const std::string pad_in(static_cast<std::size_t>((depth + 1) * indent), ' ');
        out += "{\n";
        bool first = true;
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (!first) out += ",\n";
            first = false;
            out += pad_in;
            json_escape(out, it.key());
            out += ": ";
            dump_value(it.value(), out, indent, depth + 1);
        }
        out += "\n";
        out += pad;
        out += "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        bool scalars_only = true;
        for (const auto& e : j) {
            if (!is_scalar(e)) scalars_only = false;
        }
        if (scalars_only) {
            out += "[";
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) out += ", ";
                dump_value(j[i], out, indent, depth + 1);
            }
            out += "]";
        } else {
            const std::string pad(static_cast<std::size_t>(depth * indent), ' ');
            const std::string pad_in(static_cast<std::size_t>((depth + 1) * indent), ' ');
            out += "[\n";
            for (std::size_t i = 0; i < j.size(); ++i) {
                out += pad_in;
                dump_value(j[i], out, indent, depth + 1);
                out += (i + 1 < j.size()) ? ",\n" : "\n";
            }
            out += pad;
            out += "]";
        }
    } else if (j.is_string()) {
        json_escape(out, j.get<std::string>());
    } else if (j.is_boolean()) {
        out += j.get<bool>() ? "true" : "false";
    } else if (j.is_null()) {
        out += "null";
    } else if (j.is_number_float()) {
        format_double(out, j.get<double>());
    } else if (j.is_number_unsigned()) {
        out += std::to_string(j.get<std::uint64_t>());
    } else {
        out += std::to_string(j.get<std::int64_t>());
    }
}

}  // namespace detail

inline std::string dump_json(const Json& j, int indent = 2) {
    std::string out;
    detail::dump_value(j, out, indent, 0);
    return out;
}

}  // namespace nicons
