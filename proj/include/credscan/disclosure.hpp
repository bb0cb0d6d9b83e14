#pragma once

// Disclosure workflow: contact discovery (security.txt with RFC 2142
// fallbacks), redacted artifact rendering into an outbox, follow-up
// scheduling, and daily remediation classification.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "credscan/chronicle.hpp"
#include "credscan/localize.hpp"
#include "credscan/securitytxt.hpp"
#include "credscan/util.hpp"

namespace credscan {

struct OptedOut : Error {
    using Error::Error;
};
struct EmptyFindings : Error {
    using Error::Error;
};
struct MissingBaseline : Error {
    using Error::Error;
};

enum class ContactSource { SecurityTxt, Rfc2142, Manual };

inline const char* contact_source_label(ContactSource s) {
    switch (s) {
        case ContactSource::SecurityTxt: return "SECURITY_TXT";
        case ContactSource::Rfc2142: return "RFC2142";
        case ContactSource::Manual: return "MANUAL";
    }
    return "MANUAL";
}

struct Contact {
    std::string email;
    ContactSource source = ContactSource::Rfc2142;
};

struct DisclosureTarget {
    std::string domain;  // registrable domain
    std::vector<Contact> contacts;
    Party party_role = Party::First;
    bool opt_out = false;
    std::vector<std::string> notes;  // e.g. web-form contact URLs
};

struct FetchResult {
    int status = 0;  // 0 = unreachable
    std::string body;
};

// Retrieves url -> (status, body). Implementations must not follow
// cross-domain redirects beyond 3 hops.
using Fetcher = std::function<FetchResult(const std::string& url)>;

// Tries /.well-known/security.txt then /security.txt, keeps mailto contacts,
// and always appends the RFC 2142 fallbacks plus info@. Unreachable hosts
// degrade to fallbacks only.
inline DisclosureTarget discover_contacts(const std::string& domain, const Fetcher& fetch) {
    DisclosureTarget target;
    target.domain = domain;

    const std::string candidates[] = {
        "https://" + domain + "/.well-known/security.txt",
        "https://" + domain + "/security.txt",
    };
    for (const auto& url : candidates) {
        FetchResult res;
        try {
            res = fetch(url);
        } catch (const std::exception&) {
            res.status = 0;
        }
        if (res.status != 200) continue;
        SecurityTxt parsed = parse_security_txt(res.body);
        for (const auto& email : parsed.emails)
            target.contacts.push_back({email, ContactSource::SecurityTxt});
        for (const auto& form : parsed.web_contacts)
            target.notes.push_back("contact form: " + form);
        break;  // well-known placement wins; the root copy is not consulted
    }

    for (const char* local : {"security", "abuse", "webmaster", "info"})
        target.contacts.push_back({std::string(local) + "@" + domain, ContactSource::Rfc2142});

    // dedup case-insensitively, first source wins
    std::vector<Contact> unique;
    std::set<std::string> seen;
    for (auto& c : target.contacts)
        if (seen.insert(to_lower(c.email)).second) unique.push_back(std::move(c));
    target.contacts = std::move(unique);
    return target;
}

// First min(15, length) characters plus a fixed mask.
inline std::string redact(std::string_view secret_part) {
    return std::string(secret_part.substr(0, std::min<size_t>(15, secret_part.size()))) +
           "…[REDACTED]";
}

struct FindingLine {
    std::string service;
    std::string redacted_prefix;
    std::string resource_url;
    std::string page_url;
};

struct DisclosureArtifact {
    std::string domain;
    std::vector<FindingLine> lines;
    std::string created_at;        // ISO timestamp
    std::string follow_up_due_at;  // created_at + 7 days
    std::string body;              // rendered email text
    std::string sidecar_json;      // machine-readable record
};

// Renders one artifact for one target. Placeholders: {{domain}},
// {{finding_count}}, {{findings}}, {{created_date}}, {{follow_up_date}}.
inline DisclosureArtifact render_disclosure(const DisclosureTarget& target,
                                            const std::vector<FindingLine>& findings,
                                            std::string_view template_text,
                                            std::chrono::system_clock::time_point created_at) {
    if (target.opt_out) throw OptedOut(target.domain + " has opted out");
    if (findings.empty()) throw EmptyFindings("no findings for " + target.domain);

    DisclosureArtifact artifact;
    artifact.domain = target.domain;
    artifact.lines = findings;
    artifact.created_at = iso_utc(created_at);
    artifact.follow_up_due_at = iso_utc(created_at + std::chrono::hours(24 * 7));

    std::string rendered_findings;
    for (const auto& f : findings) {
        rendered_findings += "  - " + f.service + ": " + f.redacted_prefix +
                             " | resource: " + f.resource_url + " | page: " + f.page_url + "\n";
    }

    std::string body(template_text);
    auto replace_all = [&body](std::string_view needle, const std::string& value) {
        size_t pos = 0;
        while ((pos = body.find(needle, pos)) != std::string::npos) {
            body.replace(pos, needle.size(), value);
            pos += value.size();
        }
    };
    replace_all("{{domain}}", target.domain);
    replace_all("{{finding_count}}", std::to_string(findings.size()));
    replace_all("{{findings}}", rendered_findings);
    replace_all("{{created_date}}", artifact.created_at);
    replace_all("{{follow_up_date}}", artifact.follow_up_due_at);
    artifact.body = std::move(body);

    nlohmann::ordered_json sidecar;
    sidecar["domain"] = target.domain;
    sidecar["partyRole"] = party_label(target.party_role);
    nlohmann::ordered_json contacts = nlohmann::ordered_json::array();
    for (const auto& c : target.contacts)
        contacts.push_back({{"email", c.email}, {"source", contact_source_label(c.source)}});
    sidecar["contacts"] = std::move(contacts);
    nlohmann::ordered_json lines = nlohmann::ordered_json::array();
    for (const auto& f : findings)
        lines.push_back({{"service", f.service},
                         {"redactedPrefix", f.redacted_prefix},
                         {"resourceUrl", f.resource_url},
                         {"pageUrl", f.page_url}});
    sidecar["findings"] = std::move(lines);
    sidecar["createdAt"] = artifact.created_at;
    sidecar["followUpDueAt"] = artifact.follow_up_due_at;
    for (const auto& note : target.notes) sidecar["notes"].push_back(note);
    artifact.sidecar_json = sidecar.dump(2) + "\n";
    return artifact;
}

namespace disclosure_detail {

inline std::string sanitize_filename(std::string_view domain) {
    std::string out;
    for (char c : domain)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_');
    return out;
}

inline void atomic_write(const std::filesystem::path& path, std::string_view content) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace disclosure_detail

// Writes <domain>.txt and <domain>.json into the outbox, atomically.
inline void write_outbox(const DisclosureArtifact& artifact, const std::string& outbox_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(outbox_dir);
    const std::string stem = disclosure_detail::sanitize_filename(artifact.domain);
    disclosure_detail::atomic_write(fs::path(outbox_dir) / (stem + ".txt"), artifact.body);
    disclosure_detail::atomic_write(fs::path(outbox_dir) / (stem + ".json"), artifact.sidecar_json);
}

// Appends the follow-up due dates to the outbox manifest.
inline void append_followup_manifest(const std::vector<DisclosureArtifact>& artifacts,
                                     const std::string& outbox_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(outbox_dir);
    std::ofstream out(fs::path(outbox_dir) / "followups.tsv", std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot write follow-up manifest");
    for (const auto& a : artifacts)
        out << a.domain << "\t" << a.created_at << "\t" << a.follow_up_due_at << "\n";
}

// Opt-out list: one domain per line, '#' comments.
inline std::set<std::string> load_opt_out_list(const std::string& path) {
    std::set<std::string> domains;
    std::ifstream in(path, std::ios::binary);
    if (!in) return domains;
    std::string line;
    while (std::getline(in, line)) {
        std::string_view t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        domains.insert(to_lower(t));
    }
    return domains;
}

// --- remediation ------------------------------------------------------------

enum class RemediationClass { RemovedOnly, RevokedOnly, Both, Neither, Unknown };

inline const char* remediation_label(RemediationClass c) {
    switch (c) {
        case RemediationClass::RemovedOnly: return "REMOVED_ONLY";
        case RemediationClass::RevokedOnly: return "REVOKED_ONLY";
        case RemediationClass::Both: return "BOTH";
        case RemediationClass::Neither: return "NEITHER";
        case RemediationClass::Unknown: return "UNKNOWN";
    }
    return "UNKNOWN";
}

struct DayObservation {
    bool present = true;
    std::optional<bool> valid;  // nullopt = verification was INDETERMINATE
};

// (absent, invalid) -> BOTH; (absent, valid) -> REMOVED_ONLY;
// (present, invalid) -> REVOKED_ONLY; (present, valid) -> NEITHER;
// indeterminate validity -> UNKNOWN.
inline RemediationClass classify_remediation(const DayObservation& obs) {
    if (!obs.valid.has_value()) return RemediationClass::Unknown;
    if (!obs.present && !*obs.valid) return RemediationClass::Both;
    if (!obs.present && *obs.valid) return RemediationClass::RemovedOnly;
    if (obs.present && !*obs.valid) return RemediationClass::RevokedOnly;
    return RemediationClass::Neither;
}

struct RemediationStatus {
    CredentialFingerprint fp;
    std::string website;  // page registrable domain the exposure was reported on
    int day = 0;          // 0 = pre-disclosure baseline
    bool present = true;
    std::optional<bool> valid;
    RemediationClass cls = RemediationClass::Unknown;
    std::string reason;  // set when UNKNOWN
};

struct BaselineEntry {
    CredentialFingerprint fp;
    std::string website;
};

// One day's diff against the Day-0 baseline. `present_today` holds the
// fingerprints the re-scan of each page produced; pages missing from
// `reachable_websites` could not be captured today and yield UNKNOWN.
inline std::vector<RemediationStatus> diff_daily(
    const std::vector<BaselineEntry>& baseline,
    const std::set<std::pair<CredentialFingerprint, std::string>>& present_today,
    const std::map<CredentialFingerprint, std::optional<bool>>& validity_today,
    const std::set<std::string>& reachable_websites, int day) {
    if (baseline.empty()) throw MissingBaseline("no Day-0 baseline entries");
    std::vector<RemediationStatus> out;
    out.reserve(baseline.size());
    for (const auto& entry : baseline) {
        RemediationStatus st;
        st.fp = entry.fp;
        st.website = entry.website;
        st.day = day;
        if (!reachable_websites.count(entry.website)) {
            st.present = false;
            st.valid = std::nullopt;
            st.cls = RemediationClass::Unknown;
            st.reason = "page unreachable today";
            out.push_back(std::move(st));
            continue;
        }
        st.present = present_today.count({entry.fp, entry.website}) > 0;
        auto it = validity_today.find(entry.fp);
        st.valid = it == validity_today.end() ? std::nullopt : it->second;
        st.cls = classify_remediation({st.present, st.valid});
        if (st.cls == RemediationClass::Unknown && st.reason.empty())
            st.reason = "verification indeterminate";
        out.push_back(std::move(st));
    }
    return out;
}

}  // namespace credscan
