#pragma once

// Public-suffix evaluation and registrable-domain (eTLD+1) semantics.
//
// Rules come from a file in the standard public-suffix format: one rule per
// line, comments starting with "//", "*" wildcard labels, "!" exception
// rules. Rules are an input, not embedded, so snapshots can be pinned.

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "credscan/url.hpp"
#include "credscan/util.hpp"

namespace credscan {

struct SuffixRuleError : Error {
    using Error::Error;
};

namespace detail {

inline bool looks_like_ipv4(std::string_view host) {
    int dots = 0;
    for (char c : host) {
        if (c == '.') ++dots;
        else if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return dots == 3;
}

inline bool looks_like_ip(std::string_view host) {
    if (host.empty()) return false;
    if (host.front() == '[') return true;                       // bracketed IPv6
    if (host.find(':') != std::string_view::npos) return true;  // bare IPv6
    return looks_like_ipv4(host);
}

}  // namespace detail

class SuffixRules {
public:
    static SuffixRules from_string(std::string_view text) {
        SuffixRules rules;
        size_t start = 0;
        while (start <= text.size()) {
            size_t end = text.find('\n', start);
            std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
            rules.add_rule_line(line);
            if (end == std::string_view::npos) break;
            start = end + 1;
        }
        return rules;
    }

    static SuffixRules from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw SuffixRuleError("cannot open suffix rule file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return from_string(buf.str());
    }

    size_t size() const { return exact_.size() + wildcard_.size() + exception_.size(); }

    // Longest public suffix of `hostname` under the loaded rules plus the
    // implicit "*" default. nullopt for hosts that have no meaningful suffix
    // (IP literals, empty labels).
    std::optional<std::string> public_suffix(std::string_view hostname) const {
        std::string host = normalize(hostname);
        if (host.empty() || detail::looks_like_ip(host)) return std::nullopt;
        std::vector<std::string> labels = split(host, '.');
        for (const auto& l : labels)
            if (l.empty()) return std::nullopt;

        size_t n = labels.size();
        // Exception rules win outright; the suffix is the rule minus its
        // leftmost label.
        for (size_t i = 0; i < n; ++i) {
            if (exception_.count(join(labels, i)))
                return i + 1 < n ? std::optional<std::string>(join(labels, i + 1)) : std::nullopt;
        }
        size_t best = 1;  // implicit "*" rule: the last label
        for (size_t i = 0; i < n; ++i) {
            size_t len = n - i;
            if (exact_.count(join(labels, i)) && len > best) best = len;
            // "*.foo" is stored as "foo"; it matches a suffix one label longer.
            if (i + 1 <= n && len >= 2 && wildcard_.count(join(labels, i + 1)) && len > best) best = len;
        }
        return join(labels, n - best);
    }

    // eTLD+1. nullopt means the host is unlistable (IP literal, single
    // label, or the host is itself a public suffix); callers treat such a
    // resource as its own party.
    std::optional<std::string> registrable_domain(std::string_view hostname) const {
        std::string host = normalize(hostname);
        auto ps = public_suffix(host);
        if (!ps) return std::nullopt;
        if (host == *ps) return std::nullopt;
        size_t suffix_start = host.size() - ps->size();
        // one label before the suffix
        size_t label_start = host.rfind('.', suffix_start - 2);
        return host.substr(label_start == std::string::npos ? 0 : label_start + 1);
    }

private:
    static std::string normalize(std::string_view hostname) {
        std::string host = to_lower(trim(hostname));
        while (!host.empty() && host.back() == '.') host.pop_back();
        return host;
    }

    static std::string join(const std::vector<std::string>& labels, size_t from) {
        std::string out;
        for (size_t i = from; i < labels.size(); ++i) {
            if (i > from) out.push_back('.');
            out += labels[i];
        }
        return out;
    }

    void add_rule_line(std::string_view raw) {
        std::string_view line = trim(raw);
        if (line.empty() || line.substr(0, 2) == "//") return;
        // rule text ends at the first whitespace
        size_t ws = line.find_first_of(" \t");
        if (ws != std::string_view::npos) line = line.substr(0, ws);
        std::string rule = to_lower(line);
        if (rule[0] == '!') {
            exception_.insert(rule.substr(1));
        } else if (rule.rfind("*.", 0) == 0) {
            wildcard_.insert(rule.substr(2));
        } else if (rule == "*") {
            // implicit default already applies
        } else {
            exact_.insert(rule);
        }
    }

    std::unordered_set<std::string> exact_;
    std::unordered_set<std::string> wildcard_;   // stored without the "*." prefix
    std::unordered_set<std::string> exception_;  // stored without the "!"
};

struct ResourceIdentity {
    std::string hostname;
    std::string registrable_domain;  // equals hostname when unlistable
    std::string path;
    bool listable = true;
};

inline ResourceIdentity make_identity(const Url& url, const SuffixRules& rules) {
    ResourceIdentity id;
    id.hostname = url.host;
    id.path = url.path;
    auto reg = rules.registrable_domain(url.host);
    if (reg) {
        id.registrable_domain = *reg;
    } else {
        id.registrable_domain = url.host;
        id.listable = false;
    }
    return id;
}

}  // namespace credscan
