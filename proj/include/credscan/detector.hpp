#pragma once

// Per-service credential grammars and the scanner that applies them to
// decoded views. Single-part services produce complete candidates directly;
// two-part services (key id + secret) produce part matches that
// assemble_compound pairs up afterwards.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "credscan/decode.hpp"
#include "credscan/util.hpp"

namespace credscan {

struct DuplicateService : Error {
    using Error::Error;
};
struct MalformedPattern : Error {
    using Error::Error;
};
struct MalformedSpecFile : Error {
    using Error::Error;
};
struct EmptyToken : Error {
    using Error::Error;
};

struct PartPattern {
    std::string role;
    std::string pattern;  // prefix literal + charset + length bounds; bounded length
};

struct DetectorSpec {
    std::string service;
    std::vector<PartPattern> parts;                 // 1 part, or 2 for key-pair services
    std::vector<std::string> keyword_prefilters;    // cheap literal gate, case-insensitive
    std::optional<double> min_entropy;              // bits/char threshold on the secret part
    size_t pairing_window = 4096;                   // max byte distance between paired parts
    std::string secret_role;                        // part the entropy gate applies to
    std::string fingerprint_role;                   // part used for prefix-15 fingerprints

    bool compound() const { return parts.size() > 1; }
};

inline double shannon_entropy(std::string_view token) {
    if (token.empty()) throw EmptyToken("entropy of empty token");
    int freq[256] = {0};
    for (unsigned char c : token) ++freq[c];
    double h = 0.0;
    const double n = static_cast<double>(token.size());
    for (int f : freq) {
        if (f == 0) continue;
        double p = f / n;
        h -= p * std::log2(p);
    }
    return h;
}

struct SpanRef {
    int view = 0;          // index into the ViewSet the match came from
    size_t begin = 0;      // span in the view's text
    size_t end = 0;
    size_t src_begin = 0;  // span mapped back to the original buffer
    size_t src_end = 0;
    int depth = 0;

    bool operator<(const SpanRef& o) const {
        return std::tie(src_begin, src_end, view, begin) <
               std::tie(o.src_begin, o.src_end, o.view, o.begin);
    }
    bool operator==(const SpanRef& o) const {
        return src_begin == o.src_begin && src_end == o.src_end && view == o.view &&
               begin == o.begin && end == o.end;
    }
};

struct CandidateCredential {
    std::string service;
    std::map<std::string, std::string> parts;  // role -> raw token
    std::map<std::string, SpanRef> spans;      // role -> where it matched
    Encoding encoding = Encoding::Plain;
    double entropy_bits = 0.0;                 // of the secret part
    bool complete = true;                      // false: unpaired compound part
    std::string secret_role;
    std::string fingerprint_role;

    size_t first_src_begin() const {
        size_t b = SIZE_MAX;
        for (const auto& [role, span] : spans) b = std::min(b, span.src_begin);
        return b == SIZE_MAX ? 0 : b;
    }

    // Part used for prefix-15 fingerprints and redaction. Falls back to the
    // first present part for unpaired compounds that lack it.
    const std::string& fingerprint_part() const {
        auto it = parts.find(fingerprint_role);
        if (it != parts.end()) return it->second;
        return parts.begin()->second;
    }

    const std::string* secret_part() const {
        auto it = parts.find(secret_role);
        return it == parts.end() ? nullptr : &it->second;
    }
};

namespace detector_detail {

// Rejects unbounded quantifiers so every pattern matches a bounded token.
inline void check_bounded(const std::string& service, const std::string& pattern) {
    bool in_class = false;
    for (size_t i = 0; i < pattern.size(); ++i) {
        char c = pattern[i];
        if (c == '\\') {
            ++i;
            continue;
        }
        if (in_class) {
            if (c == ']') in_class = false;
            continue;
        }
        if (c == '[') {
            in_class = true;
            continue;
        }
        if (c == '*' || c == '+')
            throw MalformedPattern(service + ": unbounded quantifier in pattern: " + pattern);
        if (c == '{') {
            size_t close = pattern.find('}', i);
            if (close == std::string::npos)
                throw MalformedPattern(service + ": unterminated repetition in pattern");
            std::string_view body(pattern.data() + i + 1, close - i - 1);
            size_t comma = body.find(',');
            if (comma != std::string_view::npos && trim(body.substr(comma + 1)).empty())
                throw MalformedPattern(service + ": open-ended repetition in pattern: " + pattern);
            i = close;
        }
    }
}

struct CompiledPart {
    PartPattern def;
    std::regex re;
};

struct CompiledSpec {
    DetectorSpec def;
    std::vector<CompiledPart> parts;
    std::vector<std::string> keywords_lower;
};

}  // namespace detector_detail

class Registry {
public:
    static Registry build(const std::vector<DetectorSpec>& specs) {
        Registry reg;
        std::set<std::string> names;
        for (const auto& spec : specs) {
            if (spec.service.empty()) throw MalformedSpecFile("detector with empty service name");
            if (!names.insert(spec.service).second)
                throw DuplicateService("duplicate detector: " + spec.service);
            if (spec.parts.empty())
                throw MalformedSpecFile(spec.service + ": detector has no parts");
            if (spec.parts.size() > 2)
                throw MalformedSpecFile(spec.service + ": more than two parts is not supported");

            detector_detail::CompiledSpec cs;
            cs.def = spec;
            if (cs.def.secret_role.empty())
                cs.def.secret_role = spec.parts.size() == 1 ? spec.parts[0].role : "secret";
            if (cs.def.fingerprint_role.empty()) cs.def.fingerprint_role = cs.def.secret_role;

            std::set<std::string> roles;
            for (const auto& part : spec.parts) {
                if (part.role.empty())
                    throw MalformedSpecFile(spec.service + ": part with empty role");
                if (!roles.insert(part.role).second)
                    throw MalformedSpecFile(spec.service + ": duplicate role " + part.role);
                detector_detail::check_bounded(spec.service, part.pattern);
                detector_detail::CompiledPart cp;
                cp.def = part;
                try {
                    cp.re.assign(part.pattern, std::regex::ECMAScript | std::regex::optimize);
                } catch (const std::regex_error& e) {
                    throw MalformedPattern(spec.service + ": " + part.pattern + ": " + e.what());
                }
                cs.parts.push_back(std::move(cp));
            }
            if (!roles.count(cs.def.secret_role))
                throw MalformedSpecFile(spec.service + ": secretRole names no part");
            if (!roles.count(cs.def.fingerprint_role))
                throw MalformedSpecFile(spec.service + ": fingerprintRole names no part");
            for (const auto& kw : spec.keyword_prefilters)
                cs.keywords_lower.push_back(to_lower(kw));
            reg.specs_.push_back(std::move(cs));
        }
        return reg;
    }

    size_t size() const { return specs_.size(); }

    const DetectorSpec* find(std::string_view service) const {
        for (const auto& cs : specs_)
            if (cs.def.service == service) return &cs.def;
        return nullptr;
    }

    const std::vector<detector_detail::CompiledSpec>& compiled() const { return specs_; }

private:
    std::vector<detector_detail::CompiledSpec> specs_;
};

namespace detector_detail {

inline bool boundary_ok(const std::string& text, size_t begin, size_t end) {
    if (begin > 0 && is_word_char(text[begin - 1])) return false;
    if (end < text.size() && is_word_char(text[end])) return false;
    return true;
}

struct RawMatch {
    size_t begin;
    size_t end;
};

inline std::vector<RawMatch> find_part_matches(const std::string& text, const std::regex& re) {
    std::vector<RawMatch> out;
    size_t pos = 0;
    std::cmatch m;
    while (pos < text.size() &&
           std::regex_search(text.c_str() + pos, text.c_str() + text.size(), m, re)) {
        size_t b = pos + static_cast<size_t>(m.position(0));
        size_t e = b + static_cast<size_t>(m.length(0));
        if (!boundary_ok(text, b, e)) {
            pos = b + 1;  // a rejected start may still hide a later valid match
            continue;
        }
        out.push_back({b, e});
        pos = e;
    }
    return out;
}

inline std::string dedup_key(const CandidateCredential& c) {
    std::string key = c.service;
    for (const auto& [role, token] : c.parts) {
        key += '\x1f';
        key += role;
        key += '=';
        key += token;
    }
    for (const auto& [role, span] : c.spans) {
        key += '\x1f';
        key += role;
        key += ':';
        key += std::to_string(span.src_begin);
        key += '-';
        key += std::to_string(span.src_end);
    }
    return key;
}

}  // namespace detector_detail

// Scans every view with every registered pattern. Matches are reported once
// per (service, tokens, source spans); when the same token is visible in
// several views of the same bytes, the shallowest view wins, so plainly
// visible credentials are labeled PLAIN.
inline std::vector<CandidateCredential> scan_views(const Registry& registry, const ViewSet& views) {
    using namespace detector_detail;
    std::vector<CandidateCredential> out;
    std::map<std::string, size_t> seen;  // dedup key -> index in out

    for (size_t vi = 0; vi < views.views.size(); ++vi) {
        const DecodedSegment& view = views.views[vi];
        if (view.text.empty()) continue;
        const std::string lowered = to_lower(view.text);

        for (const auto& cs : registry.compiled()) {
            if (!cs.keywords_lower.empty()) {
                bool hit = false;
                for (const auto& kw : cs.keywords_lower)
                    if (lowered.find(kw) != std::string::npos) {
                        hit = true;
                        break;
                    }
                if (!hit) continue;
            }
            for (const auto& part : cs.parts) {
                for (const auto& m : find_part_matches(view.text, part.re)) {
                    std::string token = view.text.substr(m.begin, m.end - m.begin);
                    bool is_secret_part = part.def.role == cs.def.secret_role;
                    double entropy = shannon_entropy(token);
                    if (is_secret_part && cs.def.min_entropy && entropy < *cs.def.min_entropy)
                        continue;

                    CandidateCredential cand;
                    cand.service = cs.def.service;
                    cand.secret_role = cs.def.secret_role;
                    cand.fingerprint_role = cs.def.fingerprint_role;
                    cand.parts[part.def.role] = std::move(token);
                    SpanRef span;
                    span.view = static_cast<int>(vi);
                    span.begin = m.begin;
                    span.end = m.end;
                    span.depth = view.depth;
                    std::tie(span.src_begin, span.src_end) =
                        views.span_to_original(static_cast<int>(vi), m.begin, m.end);
                    cand.spans[part.def.role] = span;
                    cand.encoding = view.encoding;
                    if (is_secret_part) cand.entropy_bits = entropy;
                    cand.complete = !cs.def.compound();

                    std::string key = dedup_key(cand);
                    auto it = seen.find(key);
                    if (it != seen.end()) continue;  // views are depth-ordered; first wins
                    seen.emplace(std::move(key), out.size());
                    out.push_back(std::move(cand));
                }
            }
        }
    }

    std::stable_sort(out.begin(), out.end(), [](const CandidateCredential& a, const CandidateCredential& b) {
        return std::tie(a.service, a.spans.begin()->second, a.parts.begin()->first) <
               std::tie(b.service, b.spans.begin()->second, b.parts.begin()->first);
    });
    return out;
}

namespace detector_detail {

constexpr size_t kUnpaired = SIZE_MAX;

// Pairing objective, applied per service within one resource buffer:
// maximize the number of id/secret pairs within the window, then minimize
// total |idStart - secretStart|, ties broken by the lexicographically
// smallest assignment vector (ids in span order, secrets indexed in span
// order, unpaired = +inf).
struct PairingResult {
    size_t pair_count = 0;
    uint64_t total_distance = 0;
    std::vector<size_t> assignment;  // per id: secret index or kUnpaired
};

inline uint64_t span_distance(size_t a, size_t b) {
    return a > b ? a - b : b - a;
}

inline PairingResult pair_exact(const std::vector<size_t>& id_starts,
                                const std::vector<size_t>& secret_starts, uint64_t window) {
    const size_t ni = id_starts.size();
    const size_t ns = secret_starts.size();
    struct State {
        bool computed = false;
        size_t count = 0;
        uint64_t dist = 0;
        size_t choice = kUnpaired;
    };
    std::vector<State> memo(ni * (size_t(1) << ns));

    auto solve = [&](auto&& self, size_t idx, uint32_t mask) -> std::pair<size_t, uint64_t> {
        if (idx == ni) return {0, 0};
        State& st = memo[idx * (size_t(1) << ns) + mask];
        if (st.computed) return {st.count, st.dist};

        // skip this id
        auto [bc, bd] = self(self, idx + 1, mask);
        size_t best_count = bc;
        uint64_t best_dist = bd;
        size_t best_choice = kUnpaired;

        for (size_t s = 0; s < ns; ++s) {
            if (mask & (1u << s)) continue;
            uint64_t d = span_distance(id_starts[idx], secret_starts[s]);
            if (d > window) continue;
            auto [c2, d2] = self(self, idx + 1, mask | (1u << s));
            size_t count = c2 + 1;
            uint64_t dist = d2 + d;
            if (count > best_count || (count == best_count && dist < best_dist) ||
                (count == best_count && dist == best_dist && s < best_choice)) {
                best_count = count;
                best_dist = dist;
                best_choice = s;
            }
        }
        st.computed = true;
        st.count = best_count;
        st.dist = best_dist;
        st.choice = best_choice;
        return {best_count, best_dist};
    };
    solve(solve, 0, 0);

    PairingResult result;
    uint32_t mask = 0;
    for (size_t idx = 0; idx < ni; ++idx) {
        const State& st = memo[idx * (size_t(1) << ns) + mask];
        result.assignment.push_back(st.choice);
        if (st.choice != kUnpaired) {
            ++result.pair_count;
            result.total_distance += span_distance(id_starts[idx], secret_starts[st.choice]);
            mask |= (1u << st.choice);
        }
    }
    return result;
}

// Nearest-available fallback for pathologically many tokens.
inline PairingResult pair_greedy(const std::vector<size_t>& id_starts,
                                 const std::vector<size_t>& secret_starts, uint64_t window) {
    PairingResult result;
    result.assignment.assign(id_starts.size(), kUnpaired);
    std::vector<bool> used(secret_starts.size(), false);
    for (size_t i = 0; i < id_starts.size(); ++i) {
        size_t best = kUnpaired;
        uint64_t best_d = window + 1;
        for (size_t s = 0; s < secret_starts.size(); ++s) {
            if (used[s]) continue;
            uint64_t d = span_distance(id_starts[i], secret_starts[s]);
            if (d < best_d) {
                best_d = d;
                best = s;
            }
        }
        if (best != kUnpaired) {
            used[best] = true;
            result.assignment[i] = best;
            ++result.pair_count;
            result.total_distance += best_d;
        }
    }
    return result;
}

}  // namespace detector_detail

// Joins compound part matches (from one resource buffer) into credentials.
// Unpaired parts are kept as INCOMPLETE candidates so they still show up in
// reports, but they are never sent to the verifier.
inline std::vector<CandidateCredential> assemble_compound(const Registry& registry,
                                                          const std::vector<CandidateCredential>& candidates) {
    using namespace detector_detail;
    std::vector<CandidateCredential> out;
    std::map<std::string, std::vector<CandidateCredential>> partials;  // service -> part matches

    for (const auto& c : candidates) {
        const DetectorSpec* spec = registry.find(c.service);
        if (spec && spec->compound())
            partials[c.service].push_back(c);
        else
            out.push_back(c);
    }

    for (auto& [service, items] : partials) {
        const DetectorSpec* spec = registry.find(service);
        const std::string id_role = spec->parts[0].role == spec->secret_role
                                        ? spec->parts[1].role
                                        : spec->parts[0].role;
        const std::string& secret_role = spec->secret_role;

        std::vector<CandidateCredential> ids, secrets;
        for (auto& item : items) {
            if (item.parts.count(id_role))
                ids.push_back(item);
            else
                secrets.push_back(item);
        }
        auto by_start = [](const CandidateCredential& a, const CandidateCredential& b) {
            return a.first_src_begin() < b.first_src_begin();
        };
        std::sort(ids.begin(), ids.end(), by_start);
        std::sort(secrets.begin(), secrets.end(), by_start);

        std::vector<size_t> id_starts, secret_starts;
        for (const auto& c : ids) id_starts.push_back(c.spans.at(id_role).src_begin);
        for (const auto& c : secrets) secret_starts.push_back(c.spans.at(secret_role).src_begin);

        const bool exact_feasible =
            secrets.size() <= 16 &&
            ids.size() * (size_t(1) << secrets.size()) <= (size_t(1) << 22);
        PairingResult pairing =
            exact_feasible ? pair_exact(id_starts, secret_starts, spec->pairing_window)
                           : pair_greedy(id_starts, secret_starts, spec->pairing_window);

        std::vector<bool> secret_used(secrets.size(), false);
        for (size_t i = 0; i < ids.size(); ++i) {
            size_t s = pairing.assignment[i];
            if (s == kUnpaired) {
                CandidateCredential leftover = ids[i];
                leftover.complete = false;
                out.push_back(std::move(leftover));
                continue;
            }
            secret_used[s] = true;
            CandidateCredential pair = ids[i];
            pair.parts[secret_role] = secrets[s].parts.at(secret_role);
            pair.spans[secret_role] = secrets[s].spans.at(secret_role);
            pair.encoding = secrets[s].encoding;  // label follows the secret part
            pair.entropy_bits = secrets[s].entropy_bits;
            pair.complete = true;
            out.push_back(std::move(pair));
        }
        for (size_t s = 0; s < secrets.size(); ++s) {
            if (secret_used[s]) continue;
            CandidateCredential leftover = secrets[s];
            leftover.complete = false;
            out.push_back(std::move(leftover));
        }
    }

    std::stable_sort(out.begin(), out.end(), [](const CandidateCredential& a, const CandidateCredential& b) {
        return std::tie(a.service, a.spans.begin()->second) <
               std::tie(b.service, b.spans.begin()->second);
    });
    return out;
}

// --- spec file loading -----------------------------------------------------

inline std::vector<DetectorSpec> parse_detector_specs(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("detectors") || !doc["detectors"].is_array())
        throw MalformedSpecFile("detector file needs a top-level detectors array");
    std::vector<DetectorSpec> specs;
    for (const auto& d : doc["detectors"]) {
        if (!d.is_object()) throw MalformedSpecFile("detector entry is not an object");
        DetectorSpec spec;
        spec.service = d.value("service", "");
        if (!d.contains("parts") || !d["parts"].is_array())
            throw MalformedSpecFile(spec.service + ": missing parts array");
        for (const auto& p : d["parts"]) {
            PartPattern part;
            part.role = p.value("role", "");
            part.pattern = p.value("pattern", "");
            if (part.pattern.empty())
                throw MalformedSpecFile(spec.service + ": part with empty pattern");
            spec.parts.push_back(std::move(part));
        }
        if (d.contains("prefilters"))
            for (const auto& k : d["prefilters"]) spec.keyword_prefilters.push_back(k.get<std::string>());
        if (d.contains("minEntropy") && !d["minEntropy"].is_null())
            spec.min_entropy = d["minEntropy"].get<double>();
        spec.pairing_window = d.value("pairingWindow", size_t{4096});
        spec.secret_role = d.value("secretRole", "");
        spec.fingerprint_role = d.value("fingerprintRole", "");
        specs.push_back(std::move(spec));
    }
    return specs;
}

inline std::vector<DetectorSpec> parse_detector_specs_text(std::string_view text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw MalformedSpecFile("detector file is not valid JSON");
    return parse_detector_specs(doc);
}

inline std::vector<DetectorSpec> load_detector_specs(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedSpecFile("cannot open detector file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_detector_specs_text(buf.str());
}

}  // namespace credscan
