#pragma once

// Non-destructive credential liveness checks. A profile per service names
// the introspection endpoint, the auth scheme, and which status codes mean
// valid/invalid; the verdict is decided on the status code alone and no
// response content is ever kept. Offline mode refuses every endpoint that
// was not explicitly overridden.

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "credscan/chronicle.hpp"
#include "credscan/detector.hpp"
#include "credscan/signing.hpp"
#include "credscan/url.hpp"
#include "credscan/util.hpp"

namespace credscan {

struct DestructiveProfileRejected : Error {
    using Error::Error;
};
struct MalformedTemplate : Error {
    using Error::Error;
};

enum class AuthScheme { BearerHeader, BasicPair, UrlEmbedded, SignedRequest };

inline const char* auth_scheme_label(AuthScheme a) {
    switch (a) {
        case AuthScheme::BearerHeader: return "BEARER_HEADER";
        case AuthScheme::BasicPair: return "BASIC_PAIR";
        case AuthScheme::UrlEmbedded: return "URL_EMBEDDED";
        case AuthScheme::SignedRequest: return "SIGNED_REQUEST";
    }
    return "BEARER_HEADER";
}

inline std::optional<AuthScheme> parse_auth_scheme(std::string_view s) {
    if (s == "BEARER_HEADER") return AuthScheme::BearerHeader;
    if (s == "BASIC_PAIR") return AuthScheme::BasicPair;
    if (s == "URL_EMBEDDED") return AuthScheme::UrlEmbedded;
    if (s == "SIGNED_REQUEST") return AuthScheme::SignedRequest;
    return std::nullopt;
}

struct VerificationProfile {
    std::string service;
    std::string method = "GET";        // GET or a token-introspection POST, nothing else
    std::string endpoint_template;     // full URL, {TOKEN}/{dc}/{role} placeholders
    std::string body_template;         // optional form body (placeholders allowed)
    std::string content_type = "application/x-www-form-urlencoded";
    std::string basic_user;            // fixed basic-auth user for single-part services
    AuthScheme auth = AuthScheme::BearerHeader;
    std::set<int> success_statuses{200};
    std::set<int> invalid_statuses{401};
    bool destructive = false;          // loader rejects true
};

enum class VerdictState { Unverified, Valid, Invalid, Indeterminate };

inline const char* verdict_label(VerdictState s) {
    switch (s) {
        case VerdictState::Unverified: return "UNVERIFIED";
        case VerdictState::Valid: return "VALID";
        case VerdictState::Invalid: return "INVALID";
        case VerdictState::Indeterminate: return "INDETERMINATE";
    }
    return "UNVERIFIED";
}

// Carries no body content and no headers beyond the status code.
struct ValidationVerdict {
    VerdictState state = VerdictState::Unverified;
    std::optional<int> status;
    std::string reason;      // set for INDETERMINATE
    std::string checked_at;  // ISO timestamp
    int attempts = 0;
};

struct RateBudget {
    int per_service_concurrency = 4;
    int min_interval_millis = 250;
    int max_retries = 2;           // on 429/5xx
    int backoff_base_millis = 1000;
    int timeout_millis = 10000;
};

// --- profile files ----------------------------------------------------------

inline std::vector<VerificationProfile> parse_profiles(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("profiles") || !doc["profiles"].is_array())
        throw MalformedTemplate("profile file needs a top-level profiles array");
    std::vector<VerificationProfile> out;
    for (const auto& p : doc["profiles"]) {
        VerificationProfile prof;
        prof.service = p.value("service", "");
        if (prof.service.empty()) throw MalformedTemplate("profile with empty service");
        prof.method = p.value("method", "GET");
        if (prof.method != "GET" && prof.method != "POST")
            throw MalformedTemplate(prof.service + ": method must be GET or POST");
        prof.endpoint_template = p.value("endpoint", "");
        prof.body_template = p.value("body", "");
        prof.content_type = p.value("contentType", prof.content_type);
        prof.basic_user = p.value("basicUser", "");
        auto auth = parse_auth_scheme(p.value("auth", "BEARER_HEADER"));
        if (!auth) throw MalformedTemplate(prof.service + ": unknown auth scheme");
        prof.auth = *auth;
        prof.success_statuses.clear();
        for (const auto& s : p.value("success", nlohmann::json::array()))
            prof.success_statuses.insert(s.get<int>());
        prof.invalid_statuses.clear();
        for (const auto& s : p.value("invalid", nlohmann::json::array()))
            prof.invalid_statuses.insert(s.get<int>());
        if (prof.success_statuses.empty()) prof.success_statuses = {200};
        prof.destructive = p.value("destructive", false);
        if (prof.destructive)
            throw DestructiveProfileRejected(prof.service + ": destructive profiles are rejected");
        for (int s : prof.success_statuses)
            if (prof.invalid_statuses.count(s))
                throw MalformedTemplate(prof.service + ": status sets overlap");

        // template sanity: URL shape, balanced placeholders
        std::string probe = prof.endpoint_template;
        size_t open = 0;
        for (char c : probe) {
            if (c == '{') ++open;
            if (c == '}') {
                if (open == 0) throw MalformedTemplate(prof.service + ": unbalanced placeholder");
                --open;
            }
        }
        if (open != 0) throw MalformedTemplate(prof.service + ": unbalanced placeholder");
        std::string neutral;
        for (char c : probe) {
            if (c == '{' || c == '}') continue;
            neutral.push_back(c);
        }
        Url u = Url::parse(neutral);
        if (!u.valid || (u.scheme != "http" && u.scheme != "https"))
            throw MalformedTemplate(prof.service + ": endpoint is not an http(s) URL");
        out.push_back(std::move(prof));
    }
    return out;
}

inline std::vector<VerificationProfile> parse_profiles_text(std::string_view text) {
    nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
    if (doc.is_discarded()) throw MalformedTemplate("profile file is not valid JSON");
    return parse_profiles(doc);
}

inline std::vector<VerificationProfile> load_profiles(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MalformedTemplate("cannot open profile file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_profiles_text(buf.str());
}

// --- request construction ---------------------------------------------------

namespace verify_detail {

inline std::string amz_timestamp(std::chrono::system_clock::time_point tp) {
    std::time_t t = std::chrono::system_clock::to_time_t(tp);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[24];
    std::strftime(buf, sizeof(buf), "%Y%m%dT%H%M%SZ", &tm);
    return buf;
}

inline const std::string* part_for_placeholder(const CandidateCredential& cand,
                                               const std::string& name) {
    if (name == "TOKEN") {
        auto it = cand.parts.find(cand.secret_role);
        if (it != cand.parts.end()) return &it->second;
        return nullptr;
    }
    auto it = cand.parts.find(name);
    if (it != cand.parts.end()) return &it->second;
    return nullptr;
}

// Substitutes {NAME} placeholders. {dc} resolves to the token suffix after
// the last '-' (Mailchimp datacenter convention).
inline bool substitute(const std::string& tmpl, const CandidateCredential& cand, std::string& out,
                       std::string& missing) {
    out.clear();
    size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] != '{') {
            out.push_back(tmpl[i++]);
            continue;
        }
        size_t close = tmpl.find('}', i);
        if (close == std::string::npos) {
            missing = "unbalanced placeholder";
            return false;
        }
        std::string name = tmpl.substr(i + 1, close - i - 1);
        if (name == "dc") {
            const std::string* token = part_for_placeholder(cand, "TOKEN");
            if (!token) {
                missing = "dc";
                return false;
            }
            size_t dash = token->rfind('-');
            if (dash == std::string::npos || dash + 1 >= token->size()) {
                missing = "dc (token has no datacenter suffix)";
                return false;
            }
            out += token->substr(dash + 1);
        } else {
            const std::string* part = part_for_placeholder(cand, name);
            if (!part) {
                missing = name;
                return false;
            }
            out += *part;
        }
        i = close + 1;
    }
    return true;
}

struct BuiltRequest {
    std::string base;  // scheme://host[:port]
    std::string path_query;
    httplib::Headers headers;
    std::string body;
    std::string content_type;
    std::string basic_user;
    std::string basic_pass;
    bool use_basic = false;
    std::string method;
};

inline std::string id_part_role(const CandidateCredential& cand) {
    for (const auto& [role, token] : cand.parts)
        if (role != cand.secret_role) return role;
    return cand.secret_role;
}

inline std::optional<BuiltRequest> build_request(const VerificationProfile& profile,
                                                 const CandidateCredential& cand,
                                                 const std::optional<std::string>& endpoint_override,
                                                 std::string& error) {
    std::string endpoint;
    if (!substitute(profile.endpoint_template, cand, endpoint, error)) {
        error = "endpoint placeholder unresolved: " + error;
        return std::nullopt;
    }
    Url url = Url::parse(endpoint);
    if (!url.valid) {
        error = "endpoint does not parse as a URL";
        return std::nullopt;
    }
    BuiltRequest req;
    req.method = profile.method;
    req.base = url.origin();
    req.path_query = url.path_and_query();
    if (endpoint_override) {
        Url ov = Url::parse(*endpoint_override);
        if (!ov.valid) {
            error = "endpoint override does not parse as a URL";
            return std::nullopt;
        }
        req.base = ov.origin();
        if (ov.path != "/") req.path_query = ov.path + req.path_query;
    }

    const std::string* token = part_for_placeholder(cand, "TOKEN");
    switch (profile.auth) {
        case AuthScheme::BearerHeader: {
            if (!token) {
                error = "candidate has no token part";
                return std::nullopt;
            }
            req.headers.emplace("Authorization", "Bearer " + *token);
            break;
        }
        case AuthScheme::BasicPair: {
            if (!profile.body_template.empty()) {
                if (!substitute(profile.body_template, cand, req.body, error)) {
                    error = "body placeholder unresolved: " + error;
                    return std::nullopt;
                }
                req.content_type = profile.content_type;
                break;
            }
            if (!token) {
                error = "candidate has no secret part";
                return std::nullopt;
            }
            std::string user = profile.basic_user;
            if (user.empty()) {
                const std::string id_role = id_part_role(cand);
                auto it = cand.parts.find(id_role);
                if (it == cand.parts.end() || id_role == cand.secret_role) {
                    error = "candidate has no id part for basic auth";
                    return std::nullopt;
                }
                user = it->second;
            }
            req.use_basic = true;
            req.basic_user = user;
            req.basic_pass = *token;
            break;
        }
        case AuthScheme::UrlEmbedded:
            break;  // the template substitution already embedded the token
        case AuthScheme::SignedRequest: {
            Url target = Url::parse(req.base + req.path_query);
            if (profile.service == "AWS") {
                auto it_id = cand.parts.find("keyId");
                if (it_id == cand.parts.end() || !token) {
                    error = "signed request needs keyId and secret";
                    return std::nullopt;
                }
                signing::SigV4Request sreq;
                sreq.method = profile.method;
                sreq.host = target.authority();
                sreq.path = target.path;
                sreq.canonical_query = target.query;
                sreq.amz_date = amz_timestamp(std::chrono::system_clock::now());
                auto sig = signing::sigv4_sign(sreq, it_id->second, *token);
                req.headers.emplace("x-amz-date", sig.amz_date);
                req.headers.emplace("Authorization", sig.authorization);
            } else {
                // Alibaba-style RPC query signature
                auto it_id = cand.parts.find("keyId");
                if (it_id == cand.parts.end() || !token) {
                    error = "signed request needs keyId and secret";
                    return std::nullopt;
                }
                std::time_t now = std::time(nullptr);
                std::tm tm{};
                gmtime_r(&now, &tm);
                char ts[24];
                std::strftime(ts, sizeof(ts), "%Y-%m-%dT%H:%M:%SZ", &tm);
                static std::atomic<uint64_t> nonce_counter{1};
                std::map<std::string, std::string> params{
                    {"Action", "DescribeRegions"},
                    {"Version", "2014-05-26"},
                    {"Format", "JSON"},
                    {"AccessKeyId", it_id->second},
                    {"SignatureMethod", "HMAC-SHA1"},
                    {"SignatureVersion", "1.0"},
                    {"SignatureNonce", std::to_string(nonce_counter.fetch_add(1)) + "-" +
                                           std::to_string(now)},
                    {"Timestamp", ts},
                };
                req.path_query = target.path + "?" + signing::alibaba_signed_query(params, *token);
            }
            break;
        }
    }
    return req;
}

}  // namespace verify_detail

// One liveness check. VALID/INVALID strictly by the profile's status sets;
// everything else (429 after retries, 5xx, timeouts, other statuses) is
// INDETERMINATE. The response body is received and dropped.
inline ValidationVerdict verify(const VerificationProfile& profile, const CandidateCredential& candidate,
                                const RateBudget& budget,
                                const std::optional<std::string>& endpoint_override = std::nullopt,
                                bool offline = false) {
    ValidationVerdict verdict;
    verdict.checked_at = iso_utc_now();
    if (!candidate.complete) {
        verdict.state = VerdictState::Indeterminate;
        verdict.reason = "incomplete candidate is never verified";
        return verdict;
    }
    if (offline && !endpoint_override) {
        verdict.state = VerdictState::Indeterminate;
        verdict.reason = "offline mode and no endpoint override";
        return verdict;
    }
    std::string error;
    auto req = verify_detail::build_request(profile, candidate, endpoint_override, error);
    if (!req) {
        verdict.state = VerdictState::Indeterminate;
        verdict.reason = error;
        return verdict;
    }

    for (int attempt = 0; attempt <= budget.max_retries; ++attempt) {
        ++verdict.attempts;
        httplib::Client client(req->base);
        const time_t timeout_sec = budget.timeout_millis / 1000;
        const time_t timeout_usec = (budget.timeout_millis % 1000) * 1000;
        client.set_connection_timeout(timeout_sec, timeout_usec);
        client.set_read_timeout(timeout_sec, timeout_usec);
        client.set_write_timeout(timeout_sec, timeout_usec);
        client.set_follow_location(false);
        if (req->use_basic) client.set_basic_auth(req->basic_user, req->basic_pass);

        httplib::Result res = req->method == "POST"
                                  ? client.Post(req->path_query, req->headers, req->body,
                                                req->content_type)
                                  : client.Get(req->path_query, req->headers);
        if (!res) {
            verdict.state = VerdictState::Indeterminate;
            verdict.reason = httplib::to_string(res.error());
            return verdict;
        }
        int status = res->status;
        verdict.status = status;
        if (profile.success_statuses.count(status)) {
            verdict.state = VerdictState::Valid;
            return verdict;
        }
        if (profile.invalid_statuses.count(status)) {
            verdict.state = VerdictState::Invalid;
            return verdict;
        }
        if ((status == 429 || status >= 500) && attempt < budget.max_retries) {
            std::this_thread::sleep_for(
                std::chrono::milliseconds(budget.backoff_base_millis << attempt));
            continue;
        }
        verdict.state = VerdictState::Indeterminate;
        verdict.reason = "status " + std::to_string(status) +
                         (status == 403 ? " (needs manual review)" : "");
        return verdict;
    }
    return verdict;
}

// Batch verification with per-service admission control and fingerprint
// memoization: identical candidates are checked once per run.
class Verifier {
public:
    Verifier(std::vector<VerificationProfile> profiles, RateBudget budget, bool offline,
             std::map<std::string, std::string> endpoint_overrides = {})
        : budget_(budget), offline_(offline), overrides_(std::move(endpoint_overrides)) {
        for (auto& p : profiles) profiles_.emplace(p.service, std::move(p));
    }

    static std::string memo_key(const CandidateCredential& cand) {
        auto fp = fingerprint(cand);
        return fp.service + "\x1f" + fp.prefix15;
    }

    const VerificationProfile* profile_for(const std::string& service) const {
        auto it = profiles_.find(service);
        return it == profiles_.end() ? nullptr : &it->second;
    }

    std::optional<std::string> override_for(const std::string& service) const {
        auto it = overrides_.find(service);
        if (it == overrides_.end()) return std::nullopt;
        return it->second;
    }

    ValidationVerdict verify_one(const CandidateCredential& cand) {
        const VerificationProfile* profile = profile_for(cand.service);
        if (!profile) {
            ValidationVerdict v;
            v.state = VerdictState::Indeterminate;
            v.reason = "no verification profile for " + cand.service;
            v.checked_at = iso_utc_now();
            return v;
        }
        return verify(*profile, cand, budget_, override_for(cand.service), offline_);
    }

    // Returns verdicts keyed by memo_key. Incomplete candidates are skipped.
    std::map<std::string, ValidationVerdict> verify_batch(
        const std::vector<CandidateCredential>& candidates) {
        std::map<std::string, ValidationVerdict> results;
        std::map<std::string, std::vector<std::pair<std::string, const CandidateCredential*>>> per_service;
        {
            std::lock_guard<std::mutex> lock(memo_mutex_);
            std::set<std::string> queued;
            for (const auto& cand : candidates) {
                if (!cand.complete) continue;
                std::string key = memo_key(cand);
                auto memo = memo_.find(key);
                if (memo != memo_.end()) {
                    results.emplace(key, memo->second);
                    continue;
                }
                if (queued.insert(key).second)
                    per_service[cand.service].emplace_back(key, &cand);
            }
        }

        std::mutex results_mutex;
        for (auto& [service, items] : per_service) {
            const size_t workers =
                std::min<size_t>(static_cast<size_t>(std::max(1, budget_.per_service_concurrency)),
                                 items.size());
            std::atomic<size_t> next{0};
            std::mutex pace_mutex;
            auto next_allowed = std::chrono::steady_clock::now();
            std::vector<std::thread> pool;
            pool.reserve(workers);
            for (size_t w = 0; w < workers; ++w) {
                pool.emplace_back([&]() {
                    while (true) {
                        size_t i = next.fetch_add(1);
                        if (i >= items.size()) break;
                        {
                            std::unique_lock<std::mutex> lock(pace_mutex);
                            auto now = std::chrono::steady_clock::now();
                            auto slot = std::max(now, next_allowed);
                            next_allowed =
                                slot + std::chrono::milliseconds(budget_.min_interval_millis);
                            lock.unlock();
                            std::this_thread::sleep_until(slot);
                        }
                        ValidationVerdict verdict = verify_one(*items[i].second);
                        {
                            std::lock_guard<std::mutex> lock(results_mutex);
                            results.emplace(items[i].first, verdict);
                        }
                        {
                            std::lock_guard<std::mutex> lock(memo_mutex_);
                            memo_.emplace(items[i].first, verdict);
                        }
                    }
                });
            }
            for (auto& t : pool) t.join();
        }
        return results;
    }

private:
    std::map<std::string, VerificationProfile> profiles_;
    RateBudget budget_;
    bool offline_;
    std::map<std::string, std::string> overrides_;
    std::mutex memo_mutex_;
    std::map<std::string, ValidationVerdict> memo_;
};

// Environment variable naming for per-service endpoint overrides:
// uppercased service, non-alphanumerics as '_', suffix _VERIFY_BASE.
inline std::string override_env_name(std::string_view service) {
    std::string name;
    for (char c : service)
        name.push_back(std::isalnum(static_cast<unsigned char>(c)) ? ascii_upper(c) : '_');
    return name + "_VERIFY_BASE";
}

}  // namespace credscan
