#pragma once

// Produces the decoded views of a buffer so detectors can match credentials
// hidden behind common encodings: escaped unicode (key),
// base64 (a2V5), percent-encoding. Views nest up to a depth cap, e.g.
// URL-encoded base64 at depth 2.
//
// Offset mapping notes:
//  - The depth-0 PLAIN view is offset-identical to the source buffer. Bytes
//    that are not valid UTF-8 are replaced with '?' (one byte per byte,
//    keeping offsets aligned, unlike U+FFFD).
//  - Escaped-unicode and percent views are whole-buffer substitutions with an
//    exact per-character map back to the parent.
//  - Base64 region views map through 4-character groups; spans that cross a
//    group map to the enclosing groups, so a decoded source span can carry up
//    to 2 bytes of slack per side.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "credscan/util.hpp"

namespace credscan {

enum class Encoding { Plain, EscapedUnicode, Base64, UrlEncoded };

inline const char* encoding_label(Encoding e) {
    switch (e) {
        case Encoding::Plain: return "PLAIN";
        case Encoding::EscapedUnicode: return "ESCAPED_UNICODE";
        case Encoding::Base64: return "BASE64";
        case Encoding::UrlEncoded: return "URL_ENCODED";
    }
    return "PLAIN";
}

inline std::optional<Encoding> parse_encoding_label(std::string_view s) {
    if (s == "PLAIN") return Encoding::Plain;
    if (s == "ESCAPED_UNICODE") return Encoding::EscapedUnicode;
    if (s == "BASE64") return Encoding::Base64;
    if (s == "URL_ENCODED") return Encoding::UrlEncoded;
    return std::nullopt;
}

struct DecodedSegment {
    Encoding encoding = Encoding::Plain;
    int depth = 0;
    int parent = -1;            // index into ViewSet::views, -1 for the root
    size_t src_begin = 0;       // span in the ORIGINAL buffer
    size_t src_end = 0;
    size_t parent_begin = 0;    // span in the parent view's text
    size_t parent_end = 0;
    std::string text;
    std::vector<uint32_t> offsets;  // per output char: start offset in parent text (substitution views)
};

class ViewSet {
public:
    std::vector<DecodedSegment> views;

    // Maps a half-open span in a view's text back to the original buffer.
    std::pair<size_t, size_t> span_to_original(int view, size_t begin, size_t end) const {
        while (view >= 0 && views[static_cast<size_t>(view)].parent >= 0) {
            const DecodedSegment& v = views[static_cast<size_t>(view)];
            std::tie(begin, end) = span_in_parent(v, begin, end);
            view = v.parent;
        }
        return {begin, end};
    }

private:
    static std::pair<size_t, size_t> span_in_parent(const DecodedSegment& v, size_t begin, size_t end) {
        if (begin > v.text.size()) begin = v.text.size();
        if (end > v.text.size()) end = v.text.size();
        if (!v.offsets.empty()) {
            size_t pb = begin < v.offsets.size() ? v.offsets[begin] : v.parent_end;
            size_t pe = end < v.offsets.size() ? v.offsets[end] : v.parent_end;
            if (pe < pb) pe = pb;
            return {pb, pe};
        }
        // base64 group mapping
        size_t run_len = v.parent_end - v.parent_begin;
        size_t pb = v.parent_begin + std::min((begin / 3) * 4, run_len);
        size_t pe = begin == end ? pb : v.parent_begin + std::min((((end - 1) / 3) + 1) * 4, run_len);
        return {pb, pe};
    }
};

namespace decode_detail {

inline bool printable_byte(unsigned char c) {
    return (c >= 0x20 && c <= 0x7e) || c == '\t' || c == '\n' || c == '\r';
}

inline bool base64_char(char c) {
    return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
           c == '+' || c == '/';
}

// Offset-preserving lossy UTF-8 pass for the root view.
inline std::string sanitize_utf8(std::string_view bytes) {
    std::string out(bytes);
    size_t i = 0;
    while (i < out.size()) {
        unsigned char c = static_cast<unsigned char>(out[i]);
        size_t len = c < 0x80 ? 1 : (c >> 5) == 0x6 ? 2 : (c >> 4) == 0xe ? 3 : (c >> 3) == 0x1e ? 4 : 0;
        if (len == 0 || i + len > out.size()) {
            out[i++] = '?';
            continue;
        }
        bool ok = true;
        for (size_t k = 1; k < len; ++k)
            if ((static_cast<unsigned char>(out[i + k]) >> 6) != 0x2) ok = false;
        if (!ok) {
            out[i++] = '?';
            continue;
        }
        i += len;
    }
    return out;
}

inline void append_codepoint(std::string& out, std::vector<uint32_t>& offsets, uint32_t cp, uint32_t src) {
    char buf[4];
    size_t n = 0;
    if (cp < 0x80) {
        buf[n++] = static_cast<char>(cp);
    } else if (cp < 0x800) {
        buf[n++] = static_cast<char>(0xc0 | (cp >> 6));
        buf[n++] = static_cast<char>(0x80 | (cp & 0x3f));
    } else if (cp < 0x10000) {
        buf[n++] = static_cast<char>(0xe0 | (cp >> 12));
        buf[n++] = static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        buf[n++] = static_cast<char>(0x80 | (cp & 0x3f));
    } else {
        buf[n++] = static_cast<char>(0xf0 | (cp >> 18));
        buf[n++] = static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
        buf[n++] = static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
        buf[n++] = static_cast<char>(0x80 | (cp & 0x3f));
    }
    for (size_t k = 0; k < n; ++k) {
        out.push_back(buf[k]);
        offsets.push_back(src);
    }
}

inline std::optional<uint32_t> hex4_at(std::string_view t, size_t pos) {
    if (pos + 4 > t.size()) return std::nullopt;
    uint32_t v = 0;
    for (size_t k = 0; k < 4; ++k) {
        int d = hex_value(t[pos + k]);
        if (d < 0) return std::nullopt;
        v = (v << 4) | static_cast<uint32_t>(d);
    }
    return v;
}

// \uXXXX substitution over the whole text. Returns nullopt when nothing decoded.
inline bool unescape_unicode(std::string_view t, std::string& out, std::vector<uint32_t>& offsets) {
    bool decoded_any = false;
    size_t i = 0;
    while (i < t.size()) {
        if (t[i] == '\\' && i + 1 < t.size() && t[i + 1] == 'u') {
            auto cp = hex4_at(t, i + 2);
            if (cp) {
                uint32_t code = *cp;
                size_t consumed = 6;
                if (code >= 0xd800 && code <= 0xdbff) {
                    // try the low half of a surrogate pair
                    if (i + 6 + 1 < t.size() && t[i + 6] == '\\' && t[i + 7] == 'u') {
                        auto lo = hex4_at(t, i + 8);
                        if (lo && *lo >= 0xdc00 && *lo <= 0xdfff) {
                            code = 0x10000 + ((code - 0xd800) << 10) + (*lo - 0xdc00);
                            consumed = 12;
                        } else {
                            code = 0xfffd;
                        }
                    } else {
                        code = 0xfffd;
                    }
                } else if (code >= 0xdc00 && code <= 0xdfff) {
                    code = 0xfffd;
                }
                append_codepoint(out, offsets, code, static_cast<uint32_t>(i));
                i += consumed;
                decoded_any = true;
                continue;
            }
        }
        out.push_back(t[i]);
        offsets.push_back(static_cast<uint32_t>(i));
        ++i;
    }
    return decoded_any;
}

// %XX substitution over the whole text.
inline bool percent_decode(std::string_view t, std::string& out, std::vector<uint32_t>& offsets) {
    bool decoded_any = false;
    size_t i = 0;
    while (i < t.size()) {
        if (t[i] == '%' && i + 2 < t.size() && is_hex_digit(t[i + 1]) && is_hex_digit(t[i + 2])) {
            out.push_back(static_cast<char>((hex_value(t[i + 1]) << 4) | hex_value(t[i + 2])));
            offsets.push_back(static_cast<uint32_t>(i));
            i += 3;
            decoded_any = true;
            continue;
        }
        out.push_back(t[i]);
        offsets.push_back(static_cast<uint32_t>(i));
        ++i;
    }
    return decoded_any;
}

inline std::optional<std::string> base64_decode_region(std::string_view run) {
    auto value_of = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '+') return 62;
        if (c == '/') return 63;
        return -1;
    };
    std::string out;
    out.reserve(run.size() / 4 * 3);
    uint32_t acc = 0;
    int bits = 0;
    for (char c : run) {
        if (c == '=') break;
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

struct Base64Region {
    size_t begin;
    size_t end;  // includes padding
};

// Maximal runs of the base64 alphabet, length >= 16, length (with padding)
// divisible by 4. Anything else is not considered a candidate region.
inline std::vector<Base64Region> find_base64_regions(std::string_view t) {
    std::vector<Base64Region> regions;
    size_t i = 0;
    while (i < t.size()) {
        if (!base64_char(t[i])) {
            ++i;
            continue;
        }
        size_t b = i;
        while (i < t.size() && base64_char(t[i])) ++i;
        size_t pads = 0;
        while (i < t.size() && t[i] == '=' && pads < 2) {
            ++i;
            ++pads;
        }
        size_t len = i - b;
        if (len >= 16 && len % 4 == 0) regions.push_back({b, i});
    }
    return regions;
}

}  // namespace decode_detail

// All plausibly decoded views of a buffer, breadth-first by depth. The
// depth-0 PLAIN view is always present; no two views share the same
// (encoding, source span, text).
inline ViewSet enumerate_views(std::string_view buffer, int max_depth = 2) {
    using namespace decode_detail;
    constexpr size_t kMaxViews = 256;

    ViewSet vs;
    DecodedSegment root;
    root.encoding = Encoding::Plain;
    root.depth = 0;
    root.parent = -1;
    root.src_begin = 0;
    root.src_end = buffer.size();
    root.parent_begin = 0;
    root.parent_end = buffer.size();
    root.text = sanitize_utf8(buffer);
    vs.views.push_back(std::move(root));

    std::set<std::tuple<Encoding, size_t, size_t, std::string>> seen;
    seen.insert({Encoding::Plain, 0, buffer.size(), vs.views[0].text});

    auto add_view = [&](DecodedSegment&& seg) {
        if (vs.views.size() >= kMaxViews) return;
        if (seg.text.empty()) return;
        auto key = std::make_tuple(seg.encoding, seg.src_begin, seg.src_end, seg.text);
        if (!seen.insert(key).second) return;
        vs.views.push_back(std::move(seg));
    };

    for (size_t qi = 0; qi < vs.views.size(); ++qi) {
        // note: views grows while iterating; index-based loop is the queue
        if (vs.views[qi].depth >= max_depth) continue;
        const int parent = static_cast<int>(qi);
        const int child_depth = vs.views[qi].depth + 1;
        const std::string parent_text = vs.views[qi].text;  // copy: vector may reallocate

        if (parent_text.find("\\u") != std::string::npos) {
            DecodedSegment seg;
            seg.offsets.reserve(parent_text.size());
            if (unescape_unicode(parent_text, seg.text, seg.offsets)) {
                seg.encoding = Encoding::EscapedUnicode;
                seg.depth = child_depth;
                seg.parent = parent;
                seg.parent_begin = 0;
                seg.parent_end = parent_text.size();
                std::tie(seg.src_begin, seg.src_end) =
                    vs.span_to_original(parent, 0, parent_text.size());
                add_view(std::move(seg));
            }
        }

        if (parent_text.find('%') != std::string::npos) {
            DecodedSegment seg;
            seg.offsets.reserve(parent_text.size());
            if (percent_decode(parent_text, seg.text, seg.offsets)) {
                seg.encoding = Encoding::UrlEncoded;
                seg.depth = child_depth;
                seg.parent = parent;
                seg.parent_begin = 0;
                seg.parent_end = parent_text.size();
                std::tie(seg.src_begin, seg.src_end) =
                    vs.span_to_original(parent, 0, parent_text.size());
                add_view(std::move(seg));
            }
        }

        for (const auto& region : find_base64_regions(parent_text)) {
            auto decoded = base64_decode_region(
                std::string_view(parent_text).substr(region.begin, region.end - region.begin));
            if (!decoded) continue;
            size_t printable = 0;
            for (char c : *decoded)
                if (printable_byte(static_cast<unsigned char>(c))) ++printable;
            if (decoded->empty() || printable * 10 < decoded->size() * 8) continue;
            DecodedSegment seg;
            seg.encoding = Encoding::Base64;
            seg.depth = child_depth;
            seg.parent = parent;
            seg.parent_begin = region.begin;
            seg.parent_end = region.end;
            seg.text = std::move(*decoded);
            std::tie(seg.src_begin, seg.src_end) =
                vs.span_to_original(parent, region.begin, region.end);
            add_view(std::move(seg));
        }
    }
    return vs;
}

// A finding is labeled by the innermost encoding that revealed it, which is
// exactly the encoding of the view it was matched in.
inline Encoding classify_encoding(const DecodedSegment& segment) {
    return segment.encoding;
}

}  // namespace credscan
