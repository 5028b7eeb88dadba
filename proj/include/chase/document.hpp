#pragma once

// Versioned structured documents. Every persisted artifact (models, value
// tables, Q tables, bundles, beliefs, parameter packs) is a JSON object with
// a "schema_version" and a "kind". Floating-point numbers are written with
// exactly 12 decimal digits so regenerated files diff cleanly.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "chase/errors.hpp"

namespace chase {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline void writeFixed(std::ostringstream& os, double v) {
    if (!std::isfinite(v)) throw ModelError("cannot persist non-finite number");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", v);
    std::string_view s(buf);
    // "-0.000000000000" would make equal tables diff.
    if (s.find_first_not_of("-0.") == std::string_view::npos) s = "0.000000000000";
    os << s;
}

inline void writeNode(std::ostringstream& os, const json& node, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string closePad(static_cast<std::size_t>(indent * depth), ' ');
    switch (node.type()) {
    case json::value_t::object: {
        if (node.empty()) { os << "{}"; return; }
        os << "{\n";
        bool first = true;
        for (auto it = node.begin(); it != node.end(); ++it) {
            if (!first) os << ",\n";
            first = false;
            os << pad << json(it.key()).dump() << ": ";
            writeNode(os, it.value(), indent, depth + 1);
        }
        os << "\n" << closePad << "}";
        return;
    }
    case json::value_t::array: {
        if (node.empty()) { os << "[]"; return; }
        os << "[\n";
        for (std::size_t i = 0; i < node.size(); ++i) {
            if (i) os << ",\n";
            os << pad;
            writeNode(os, node[i], indent, depth + 1);
        }
        os << "\n" << closePad << "]";
        return;
    }
    case json::value_t::number_float:
        writeFixed(os, node.get<double>());
        return;
    default:
        os << node.dump();
    }
}

}  // namespace detail

/// Serializes with two-space indentation and fixed 12-digit floats.
inline std::string writeDocument(const json& doc) {
    std::ostringstream os;
    detail::writeNode(os, doc, 2, 0);
    os << "\n";
    return os.str();
}

inline json makeDocument(std::string_view kind) {
    json doc = json::object();
    doc["schema_version"] = kSchemaVersion;
    doc["kind"] = std::string(kind);
    return doc;
}

/// Checks schema_version and kind; throws ModelError on mismatch.
inline void requireDocument(const json& doc, std::string_view kind) {
    if (!doc.is_object()) throw ModelError("document is not an object");
    if (!doc.contains("schema_version") || doc["schema_version"] != kSchemaVersion)
        throw ModelError("unsupported or missing schema_version");
    if (!doc.contains("kind") || doc["kind"] != kind)
        throw ModelError("expected document kind '" + std::string(kind) + "'");
}

inline json parseDocument(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelError(std::string("malformed document: ") + e.what());
    }
}

inline json readDocumentFile(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parseDocument(ss.str());
}

inline void writeDocumentFile(const std::string& path, const json& doc) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path);
    out << writeDocument(doc);
}

/// FNV-1a 64, hex encoded. Links solved tables to the model text they came from.
inline std::string fingerprint(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

}  // namespace chase
