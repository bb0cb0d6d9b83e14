#pragma once

// Ties the stages together: archive -> decoded views per field -> candidate
// scan -> compound assembly -> localization. Output order is deterministic
// for a given archive and configuration.

#include <algorithm>
#include <string>
#include <vector>

#include "credscan/capture.hpp"
#include "credscan/chronicle.hpp"
#include "credscan/decode.hpp"
#include "credscan/detector.hpp"
#include "credscan/localize.hpp"
#include "credscan/report.hpp"
#include "credscan/verify.hpp"

namespace credscan {

struct Finding {
    CandidateCredential candidate;
    ExposureLocation location;
    CredentialFingerprint fp;
    ValidationVerdict verdict;  // UNVERIFIED until the verifier runs
    std::string page_url;
    std::string resource_url;
};

struct ScanContext {
    const Registry& registry;
    const SuffixRules& rules;
    const BundlerFingerprints& bundlers;
    int max_view_depth = 2;
};

namespace pipeline_detail {

inline std::string join_headers(const std::vector<HeaderField>& headers) {
    std::string out;
    for (const auto& h : headers) {
        out += h.name;
        out += ": ";
        out += h.value;
        out += "\n";
    }
    return out;
}

}  // namespace pipeline_detail

// Scans one parsed archive. Compound parts pair only within the same field
// buffer of the same entry, so a key id in one resource never pairs with a
// secret in another.
inline std::vector<Finding> scan_archive(const CaptureArchive& archive, const ScanContext& ctx) {
    std::vector<Finding> findings;

    for (size_t entry_index = 0; entry_index < archive.entries.size(); ++entry_index) {
        const CaptureEntry& entry = archive.entries[entry_index];

        struct FieldBuffer {
            ScanField field;
            std::string text;
        };
        const FieldBuffer buffers[] = {
            {ScanField::RequestUrl, entry.request_url},
            {ScanField::RequestHeaders, pipeline_detail::join_headers(entry.request_headers)},
            {ScanField::ResponseHeaders, pipeline_detail::join_headers(entry.response_headers)},
            {ScanField::ResponseBody, entry.body},
        };

        for (const auto& buffer : buffers) {
            if (buffer.text.empty()) continue;
            ViewSet views = enumerate_views(buffer.text, ctx.max_view_depth);
            std::vector<CandidateCredential> raw = scan_views(ctx.registry, views);
            if (raw.empty()) continue;
            std::vector<CandidateCredential> assembled = assemble_compound(ctx.registry, raw);

            for (auto& cand : assembled) {
                Finding f;
                f.location = locate(cand, buffer.field, buffer.text.size(), entry, archive,
                                    ctx.rules, ctx.bundlers);
                f.fp = fingerprint(cand);
                f.page_url = archive.page_url;
                f.resource_url = entry.request_url;
                f.candidate = std::move(cand);
                findings.push_back(std::move(f));
            }
        }
    }
    return findings;
}

// URLs can themselves carry the credential (REQUEST_URL vector); stored and
// reported URLs get the token replaced by its redacted prefix.
inline std::string sanitize_url_for_report(std::string url, const CandidateCredential& candidate) {
    for (const auto& [role, token] : candidate.parts) {
        if (token.size() < 8) continue;
        size_t pos = 0;
        const std::string replacement =
            token.substr(0, std::min<size_t>(15, token.size())) + "…[REDACTED]";
        while ((pos = url.find(token, pos)) != std::string::npos) {
            url.replace(pos, token.size(), replacement);
            pos += replacement.size();
        }
    }
    return url;
}

inline ReportRecord to_record(const Finding& finding, const std::string& crawl_date) {
    ReportRecord r;
    r.page_url = sanitize_url_for_report(finding.page_url, finding.candidate);
    r.resource_url = sanitize_url_for_report(finding.resource_url, finding.candidate);
    r.service = finding.candidate.service;
    r.fingerprint = finding.fp.prefix15;
    r.encoding = encoding_label(finding.candidate.encoding);
    r.vector = vector_label(finding.location.vector);
    r.content_class = content_class_label(finding.location.content_class);
    r.bundled = finding.location.bundled;
    r.bundler_name = finding.location.bundler_name.value_or("");
    r.party = party_label(finding.location.party);
    r.verdict_state = finding.candidate.complete ? verdict_label(finding.verdict.state) : "INCOMPLETE";
    if (finding.verdict.status) r.verdict_status = finding.verdict.status;
    r.crawl_date = crawl_date;
    return r;
}

}  // namespace credscan
