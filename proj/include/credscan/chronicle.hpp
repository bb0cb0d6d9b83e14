#pragma once

// Longitudinal tracking. Credentials are matched across crawl snapshots by a
// truncated fingerprint (service + first 15 characters of the identifying
// part) so full secrets never have to be stored or compared. Lifetimes count
// months inclusively: a single sighting is 1 month, Jan..Mar is 3.
//
// Prefix collisions between distinct secrets are an accepted trade-off of
// the truncation.

#include <algorithm>
#include <cmath>
#include <compare>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "credscan/detector.hpp"
#include "credscan/util.hpp"

namespace credscan {

struct EmptyInput : Error {
    using Error::Error;
};
struct ObservationFormatError : Error {
    using Error::Error;
};

struct CredentialFingerprint {
    std::string service;
    std::string prefix15;

    auto operator<=>(const CredentialFingerprint&) const = default;
};

inline CredentialFingerprint fingerprint(const CandidateCredential& candidate) {
    const std::string& part = candidate.fingerprint_part();
    return {candidate.service, part.substr(0, std::min<size_t>(15, part.size()))};
}

struct Month {
    int year = 0;
    int month = 0;  // 1..12

    static std::optional<Month> parse(std::string_view s) {
        if (s.size() != 7 || s[4] != '-') return std::nullopt;
        auto y = parse_ll(s.substr(0, 4));
        auto m = parse_ll(s.substr(5, 2));
        if (!y || !m || *m < 1 || *m > 12) return std::nullopt;
        return Month{static_cast<int>(*y), static_cast<int>(*m)};
    }

    int index() const { return year * 12 + (month - 1); }

    std::string str() const {
        char buf[8];
        std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
        return buf;
    }

    auto operator<=>(const Month& o) const { return index() <=> o.index(); }
    bool operator==(const Month& o) const { return index() == o.index(); }
};

struct SnapshotObservation {
    CredentialFingerprint fp;
    std::string website;  // registrable domain
    Month crawl_month;

    auto operator<=>(const SnapshotObservation&) const = default;
};

struct LifetimeRecord {
    CredentialFingerprint fp;
    std::string website;
    Month first_seen;
    Month last_seen;
    int lifetime_months = 1;  // inclusive month count, always >= 1
};

// One record per (fingerprint, website); gaps between sightings do not split
// a record. Output order is deterministic regardless of input order.
inline std::vector<LifetimeRecord> match_snapshots(
    const std::vector<SnapshotObservation>& observations,
    const std::set<CredentialFingerprint>* only = nullptr) {
    std::map<std::pair<CredentialFingerprint, std::string>, std::pair<Month, Month>> spans;
    for (const auto& obs : observations) {
        if (only && !only->count(obs.fp)) continue;
        auto key = std::make_pair(obs.fp, obs.website);
        auto it = spans.find(key);
        if (it == spans.end()) {
            spans.emplace(key, std::make_pair(obs.crawl_month, obs.crawl_month));
        } else {
            if (obs.crawl_month < it->second.first) it->second.first = obs.crawl_month;
            if (it->second.second < obs.crawl_month) it->second.second = obs.crawl_month;
        }
    }
    std::vector<LifetimeRecord> records;
    records.reserve(spans.size());
    for (const auto& [key, span] : spans) {
        LifetimeRecord rec;
        rec.fp = key.first;
        rec.website = key.second;
        rec.first_seen = span.first;
        rec.last_seen = span.second;
        rec.lifetime_months = span.second.index() - span.first.index() + 1;
        records.push_back(std::move(rec));
    }
    return records;
}

inline std::vector<LifetimeRecord> match_snapshots(const std::set<CredentialFingerprint>& fingerprints,
                                                   const std::vector<SnapshotObservation>& observations) {
    return match_snapshots(observations, &fingerprints);
}

struct LifetimeStats {
    double mean = 0.0;
    double sd = 0.0;  // population
    int min = 0;
    int max = 0;
};

inline LifetimeStats lifetime_stats(const std::vector<LifetimeRecord>& records) {
    if (records.empty()) throw EmptyInput("no lifetime records");
    LifetimeStats s;
    s.min = records.front().lifetime_months;
    s.max = records.front().lifetime_months;
    double sum = 0.0;
    for (const auto& r : records) {
        sum += r.lifetime_months;
        s.min = std::min(s.min, r.lifetime_months);
        s.max = std::max(s.max, r.lifetime_months);
    }
    s.mean = sum / static_cast<double>(records.size());
    double sq = 0.0;
    for (const auto& r : records) {
        double d = r.lifetime_months - s.mean;
        sq += d * d;
    }
    s.sd = std::sqrt(sq / static_cast<double>(records.size()));
    return s;
}

// --- observation files -------------------------------------------------
// One record per line: service TAB prefix15 TAB website TAB YYYY-MM.
// Append-only; re-ingestion deduplicates on full record equality.

namespace chronicle_detail {

inline void check_field(std::string_view field, const char* what) {
    if (field.find('\t') != std::string_view::npos || field.find('\n') != std::string_view::npos)
        throw ObservationFormatError(std::string(what) + " may not contain tab or newline");
}

}  // namespace chronicle_detail

inline std::string observation_line(const SnapshotObservation& obs) {
    chronicle_detail::check_field(obs.fp.service, "service");
    chronicle_detail::check_field(obs.fp.prefix15, "prefix15");
    chronicle_detail::check_field(obs.website, "website");
    return obs.fp.service + "\t" + obs.fp.prefix15 + "\t" + obs.website + "\t" +
           obs.crawl_month.str();
}

inline std::vector<SnapshotObservation> parse_observations(std::string_view text) {
    std::vector<SnapshotObservation> out;
    std::set<SnapshotObservation> seen;
    size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        if (trim(raw).empty()) continue;
        auto fields = split(raw, '\t');
        if (fields.size() != 4)
            throw ObservationFormatError("line " + std::to_string(line_no) + ": expected 4 fields");
        auto month = Month::parse(trim(fields[3]));
        if (!month)
            throw ObservationFormatError("line " + std::to_string(line_no) + ": bad month " + fields[3]);
        SnapshotObservation obs;
        obs.fp.service = fields[0];
        obs.fp.prefix15 = fields[1];
        obs.website = fields[2];
        obs.crawl_month = *month;
        if (seen.insert(obs).second) out.push_back(std::move(obs));
    }
    return out;
}

inline std::vector<SnapshotObservation> load_observations(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open observation file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_observations(buf.str());
}

inline void append_observations(const std::string& path, const std::vector<SnapshotObservation>& obs) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot open observation file for append: " + path);
    for (const auto& o : obs) out << observation_line(o) << "\n";
}

}  // namespace credscan
