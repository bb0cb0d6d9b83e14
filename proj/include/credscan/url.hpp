#pragma once

// Minimal URL splitter. Good enough for scheme/host/path work on crawl
// data; not a general-purpose normalizer.

#include <string>
#include <string_view>

#include "credscan/util.hpp"

namespace credscan {

struct Url {
    std::string scheme;
    std::string host;  // lowercased, brackets kept for IPv6 literals
    std::string port;
    std::string path;  // "/" when absent
    std::string query;
    std::string fragment;
    bool valid = false;

    static Url parse(std::string_view s) {
        Url u;
        size_t scheme_end = s.find("://");
        if (scheme_end == std::string_view::npos || scheme_end == 0) return u;
        u.scheme = to_lower(s.substr(0, scheme_end));
        size_t pos = scheme_end + 3;

        size_t auth_end = s.find_first_of("/?#", pos);
        std::string_view authority = s.substr(pos, auth_end == std::string_view::npos ? std::string_view::npos : auth_end - pos);
        size_t at = authority.rfind('@');
        if (at != std::string_view::npos) authority = authority.substr(at + 1);
        if (authority.empty()) return u;

        if (authority.front() == '[') {
            size_t close = authority.find(']');
            if (close == std::string_view::npos) return u;
            u.host = to_lower(authority.substr(0, close + 1));
            if (close + 1 < authority.size() && authority[close + 1] == ':')
                u.port = std::string(authority.substr(close + 2));
        } else {
            size_t colon = authority.find(':');
            if (colon == std::string_view::npos) {
                u.host = to_lower(authority);
            } else {
                u.host = to_lower(authority.substr(0, colon));
                u.port = std::string(authority.substr(colon + 1));
            }
        }
        if (u.host.empty()) return u;

        u.path = "/";
        if (auth_end != std::string_view::npos) {
            std::string_view rest = s.substr(auth_end);
            size_t frag = rest.find('#');
            if (frag != std::string_view::npos) {
                u.fragment = std::string(rest.substr(frag + 1));
                rest = rest.substr(0, frag);
            }
            size_t q = rest.find('?');
            if (q != std::string_view::npos) {
                u.query = std::string(rest.substr(q + 1));
                rest = rest.substr(0, q);
            }
            if (!rest.empty()) u.path = std::string(rest);
        }
        u.valid = true;
        return u;
    }

    std::string authority() const {
        return port.empty() ? host : host + ":" + port;
    }

    // scheme://host[:port]
    std::string origin() const {
        return scheme + "://" + authority();
    }

    std::string path_and_query() const {
        return query.empty() ? path : path + "?" + query;
    }
};

}  // namespace credscan
