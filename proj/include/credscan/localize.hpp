#pragma once

// Where a candidate was exposed: the vector (request URL, headers, body),
// the content class of the resource, bundling status, and first/third party
// attribution.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "credscan/capture.hpp"
#include "credscan/detector.hpp"
#include "credscan/domains.hpp"

namespace credscan {

struct SpanOutOfRange : Error {
    using Error::Error;
};

enum class ExposureVector { RequestUrl, RequestHeader, ResponseBody, ResponseHeader };
enum class ContentClass { HtmlDom, Javascript, Json, Css, Other };
enum class Party { First, Third };

inline const char* vector_label(ExposureVector v) {
    switch (v) {
        case ExposureVector::RequestUrl: return "REQUEST_URL";
        case ExposureVector::RequestHeader: return "REQUEST_HEADER";
        case ExposureVector::ResponseBody: return "RESPONSE_BODY";
        case ExposureVector::ResponseHeader: return "RESPONSE_HEADER";
    }
    return "RESPONSE_BODY";
}

inline const char* content_class_label(ContentClass c) {
    switch (c) {
        case ContentClass::HtmlDom: return "HTML_DOM";
        case ContentClass::Javascript: return "JAVASCRIPT";
        case ContentClass::Json: return "JSON";
        case ContentClass::Css: return "CSS";
        case ContentClass::Other: return "OTHER";
    }
    return "OTHER";
}

inline const char* party_label(Party p) {
    return p == Party::First ? "FIRST" : "THIRD";
}

struct ExposureLocation {
    ExposureVector vector = ExposureVector::ResponseBody;
    ContentClass content_class = ContentClass::Other;
    bool bundled = false;
    std::optional<std::string> bundler_name;
    Party party = Party::Third;
    ResourceIdentity resource;
    ResourceIdentity page;
};

namespace localize_detail {

inline std::string strip_media_params(std::string_view mime) {
    size_t semi = mime.find(';');
    return to_lower(trim(semi == std::string_view::npos ? mime : mime.substr(0, semi)));
}

inline std::string_view skip_ws(std::string_view s) {
    size_t i = 0;
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    return s.substr(i);
}

inline bool istarts_with(std::string_view s, std::string_view prefix) {
    if (s.size() < prefix.size()) return false;
    return iequals(s.substr(0, prefix.size()), prefix);
}

}  // namespace localize_detail

// Media type first, then sniffing: a leading doctype/html tag means HTML, a
// leading brace or bracket that parses as structured data means JSON.
inline ContentClass classify_content(const CaptureEntry& entry) {
    using namespace localize_detail;
    std::string mime = strip_media_params(entry.mime_type);
    if (!mime.empty()) {
        if (mime == "text/javascript" || mime == "application/javascript" ||
            mime == "application/x-javascript" || mime == "text/ecmascript" ||
            mime == "application/ecmascript" || mime == "module")
            return ContentClass::Javascript;
        if (mime == "text/html" || mime == "application/xhtml+xml") return ContentClass::HtmlDom;
        if (mime == "application/json" || mime == "text/json" ||
            (mime.size() > 5 && mime.substr(mime.size() - 5) == "+json"))
            return ContentClass::Json;
        if (mime == "text/css") return ContentClass::Css;
    }
    std::string_view body = skip_ws(entry.body);
    if (istarts_with(body, "<!doctype") || istarts_with(body, "<html")) return ContentClass::HtmlDom;
    if (!body.empty() && (body.front() == '{' || body.front() == '[')) {
        nlohmann::json parsed = nlohmann::json::parse(entry.body, nullptr, false);
        if (!parsed.is_discarded()) return ContentClass::Json;
    }
    return ContentClass::Other;
}

// Bundler fingerprint list: one "name<TAB>literal-marker" per line, comments
// with '#'. First match wins by file order.
class BundlerFingerprints {
public:
    static BundlerFingerprints from_string(std::string_view text) {
        BundlerFingerprints f;
        for (const auto& raw : split(text, '\n')) {
            std::string_view line = trim(raw);
            if (line.empty() || line.front() == '#') continue;
            size_t tab = line.find('\t');
            if (tab == std::string_view::npos) continue;
            std::string name(trim(line.substr(0, tab)));
            std::string marker(trim(line.substr(tab + 1)));
            if (!name.empty() && !marker.empty()) f.entries_.emplace_back(name, marker);
        }
        return f;
    }

    static BundlerFingerprints from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open bundler fingerprint file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str());
    }

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

inline std::optional<std::string> detect_bundler(std::string_view body,
                                                 const BundlerFingerprints& fingerprints) {
    for (const auto& [name, marker] : fingerprints.entries())
        if (body.find(marker) != std::string_view::npos) return name;
    return std::nullopt;
}

// FIRST iff both registrable domains are equal; hosts without a registrable
// domain (IP literals, single labels) are compared by full hostname.
inline Party attribute_party(const Url& page_url, const Url& resource_url, const SuffixRules& rules) {
    auto page_dom = rules.registrable_domain(page_url.host);
    auto res_dom = rules.registrable_domain(resource_url.host);
    if (page_dom && res_dom) return *page_dom == *res_dom ? Party::First : Party::Third;
    return page_url.host == resource_url.host ? Party::First : Party::Third;
}

// Which entry field a scan buffer came from.
enum class ScanField { RequestUrl, RequestHeaders, ResponseHeaders, ResponseBody };

inline ExposureVector vector_for_field(ScanField field) {
    switch (field) {
        case ScanField::RequestUrl: return ExposureVector::RequestUrl;
        case ScanField::RequestHeaders: return ExposureVector::RequestHeader;
        case ScanField::ResponseHeaders: return ExposureVector::ResponseHeader;
        case ScanField::ResponseBody: return ExposureVector::ResponseBody;
    }
    return ExposureVector::ResponseBody;
}

inline ExposureLocation locate(const CandidateCredential& candidate, ScanField field,
                               size_t buffer_size, const CaptureEntry& entry,
                               const CaptureArchive& archive, const SuffixRules& rules,
                               const BundlerFingerprints& fingerprints) {
    for (const auto& [role, span] : candidate.spans) {
        if (span.src_end > buffer_size || span.src_begin > span.src_end)
            throw SpanOutOfRange(candidate.service + "/" + role + ": span outside scanned buffer");
    }
    ExposureLocation loc;
    loc.vector = vector_for_field(field);
    loc.content_class = classify_content(entry);
    loc.party = attribute_party(archive.page, entry.url, rules);
    loc.resource = make_identity(entry.url, rules);
    loc.page = make_identity(archive.page, rules);
    if (loc.vector == ExposureVector::ResponseBody && loc.content_class == ContentClass::Javascript) {
        loc.bundler_name = detect_bundler(entry.body, fingerprints);
        loc.bundled = loc.bundler_name.has_value();
    }
    return loc;
}

}  // namespace credscan
