#pragma once

// Capture-archive (HAR 1.2) parsing into an immutable in-memory trace.
//
// Parsing is lenient per entry: a malformed entry is skipped and recorded as
// a warning, never aborts the archive. Archive-level malformation (not JSON,
// no log object, no page URL anywhere) raises NotAnArchive. Gzip input is
// detected by magic bytes and inflated transparently.

#include <zlib.h>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "credscan/url.hpp"
#include "credscan/util.hpp"

namespace credscan {

struct NotAnArchive : Error {
    using Error::Error;
};

struct HeaderField {
    std::string name;
    std::string value;
};

struct CaptureEntry {
    std::string request_url;
    Url url;
    std::string method;
    std::vector<HeaderField> request_headers;
    int response_status = 0;
    std::vector<HeaderField> response_headers;
    std::string mime_type;   // parameters stripped downstream; may be empty
    std::string body;        // decoded transport payload, never the archive's base64 wrapper
    bool body_truncated = false;
};

struct ParseWarning {
    size_t entry_index;
    std::string reason;
};

struct CaptureArchive {
    std::string page_url;
    Url page;
    std::string crawl_date;  // YYYY-MM-DD, may be empty when the archive has no dates
    std::vector<CaptureEntry> entries;
    std::vector<ParseWarning> warnings;
};

struct ParseOptions {
    // Bodies beyond the cap keep only their leading prefix and are flagged
    // truncated; the scanner works on what is available.
    size_t body_cap = 50ull * 1024 * 1024;
};

inline bool looks_gzip(std::string_view bytes) {
    return bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
           static_cast<unsigned char>(bytes[1]) == 0x8b;
}

inline std::string gunzip(std::string_view bytes) {
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK)
        throw NotAnArchive("zlib init failed");
    std::string out;
    char buf[1 << 16];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(bytes.data()));
    zs.avail_in = static_cast<uInt>(bytes.size());
    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw NotAnArchive("gzip stream corrupt");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
    } while (rc != Z_STREAM_END && zs.avail_in > 0);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw NotAnArchive("gzip stream truncated");
    return out;
}

namespace detail {

// Strict base64 decode used for HAR body unwrapping. Whitespace tolerated.
inline std::optional<std::string> base64_decode(std::string_view in) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::string out;
    out.reserve(in.size() / 4 * 3);
    uint32_t acc = 0;
    int bits = 0;
    bool done = false;
    for (char c : in) {
        if (c == '\n' || c == '\r' || c == ' ' || c == '\t') continue;
        if (c == '=') {
            done = true;
            continue;
        }
        if (done) return std::nullopt;  // data after padding
        int v = value_of(c);
        if (v < 0) return std::nullopt;
        acc = (acc << 6) | static_cast<uint32_t>(v);
        bits += 6;
        if (bits >= 8) {
            bits -= 8;
            out.push_back(static_cast<char>((acc >> bits) & 0xff));
        }
    }
    return out;
}

inline void read_headers(const nlohmann::json& j, const char* key, std::vector<HeaderField>& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_array()) return;
    for (const auto& h : *it) {
        if (!h.is_object()) continue;
        HeaderField f;
        f.name = h.value("name", "");
        f.value = h.value("value", "");
        if (!f.name.empty()) out.push_back(std::move(f));
    }
}

inline std::optional<CaptureEntry> parse_entry(const nlohmann::json& e, const ParseOptions& opts,
                                               std::string& reason) {
    if (!e.is_object()) {
        reason = "entry is not an object";
        return std::nullopt;
    }
    auto req = e.find("request");
    if (req == e.end() || !req->is_object()) {
        reason = "missing request record";
        return std::nullopt;
    }
    auto resp = e.find("response");
    if (resp == e.end() || !resp->is_object()) {
        reason = "missing response record";
        return std::nullopt;
    }
    CaptureEntry entry;
    entry.request_url = req->value("url", "");
    entry.url = Url::parse(entry.request_url);
    if (!entry.url.valid) {
        reason = "request url missing or unparsable";
        return std::nullopt;
    }
    entry.method = req->value("method", "GET");
    read_headers(*req, "headers", entry.request_headers);

    if (!resp->contains("status") || !(*resp)["status"].is_number()) {
        reason = "response status missing";
        return std::nullopt;
    }
    entry.response_status = (*resp)["status"].get<int>();
    read_headers(*resp, "headers", entry.response_headers);

    long long declared_size = -1;
    auto content = resp->find("content");
    if (content != resp->end() && content->is_object()) {
        entry.mime_type = content->value("mimeType", "");
        if (content->contains("size") && (*content)["size"].is_number_integer())
            declared_size = (*content)["size"].get<long long>();
        auto text = content->find("text");
        if (text != content->end() && text->is_string()) {
            std::string raw = text->get<std::string>();
            if (content->value("encoding", "") == "base64") {
                auto decoded = base64_decode(raw);
                if (!decoded) {
                    reason = "body base64 flag set but payload undecodable";
                    return std::nullopt;
                }
                entry.body = std::move(*decoded);
            } else {
                entry.body = std::move(raw);
            }
        }
    }
    if (declared_size >= 0 && static_cast<unsigned long long>(declared_size) > entry.body.size())
        entry.body_truncated = true;
    if (entry.body.size() > opts.body_cap) {
        entry.body.resize(opts.body_cap);
        entry.body_truncated = true;
    }
    return entry;
}

}  // namespace detail

inline CaptureArchive parse_archive(std::string_view bytes, const ParseOptions& opts = {}) {
    std::string inflated;
    if (looks_gzip(bytes)) {
        inflated = gunzip(bytes);
        bytes = inflated;
    }
    nlohmann::json doc = nlohmann::json::parse(bytes, nullptr, false);
    if (doc.is_discarded() || !doc.is_object())
        throw NotAnArchive("input is not a JSON document");
    auto log = doc.find("log");
    if (log == doc.end() || !log->is_object())
        throw NotAnArchive("no log object at the top level");
    auto entries = log->find("entries");
    if (entries == log->end() || !entries->is_array())
        throw NotAnArchive("log has no entries array");

    CaptureArchive archive;

    auto pages = log->find("pages");
    if (pages != log->end() && pages->is_array() && !pages->empty() && (*pages)[0].is_object()) {
        const auto& page0 = (*pages)[0];
        std::string title = page0.value("title", "");
        Url u = Url::parse(title);
        if (u.valid) {
            archive.page_url = title;
            archive.page = u;
        }
        archive.crawl_date = date_prefix(page0.value("startedDateTime", ""));
    }

    size_t index = 0;
    for (const auto& e : *entries) {
        std::string reason;
        auto entry = detail::parse_entry(e, opts, reason);
        if (entry) {
            if (archive.crawl_date.empty() && e.is_object())
                archive.crawl_date = date_prefix(e.value("startedDateTime", ""));
            archive.entries.push_back(std::move(*entry));
        } else {
            archive.warnings.push_back({index, reason});
        }
        ++index;
    }

    if (archive.page_url.empty()) {
        // fall back to the first parsed entry's URL
        if (!archive.entries.empty()) {
            archive.page_url = archive.entries.front().request_url;
            archive.page = archive.entries.front().url;
        } else if (entries->empty()) {
            throw NotAnArchive("archive has no page record and no entries");
        } else {
            throw NotAnArchive("archive has no usable page url");
        }
    }
    return archive;
}

inline CaptureArchive parse_archive_file(const std::string& path, const ParseOptions& opts = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open archive: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string bytes = buf.str();
    return parse_archive(bytes, opts);
}

}  // namespace credscan
