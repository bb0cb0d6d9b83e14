#pragma once

// security.txt parsing (RFC 9116 subset): Contact and Expires fields.
// Everything else is ignored.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "credscan/util.hpp"

namespace credscan {

struct SecurityTxt {
    std::vector<std::string> emails;        // from mailto: contacts
    std::vector<std::string> web_contacts;  // http(s) contact URLs (web forms)
    std::optional<std::string> expires;
};

inline SecurityTxt parse_security_txt(std::string_view text) {
    SecurityTxt result;
    for (const auto& raw : split(text, '\n')) {
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        size_t colon = line.find(':');
        if (colon == std::string_view::npos) continue;
        std::string_view field = trim(line.substr(0, colon));
        std::string_view value = trim(line.substr(colon + 1));
        if (iequals(field, "Contact")) {
            std::string v(value);
            if (iequals(std::string_view(v).substr(0, std::min<size_t>(7, v.size())), "mailto:")) {
                std::string addr = std::string(trim(v.substr(7)));
                // drop ?subject=... style suffixes
                size_t q = addr.find('?');
                if (q != std::string::npos) addr = addr.substr(0, q);
                if (addr.find('@') != std::string::npos) result.emails.push_back(addr);
            } else if (v.rfind("https://", 0) == 0 || v.rfind("http://", 0) == 0) {
                result.web_contacts.push_back(v);
            } else if (v.find('@') != std::string::npos && v.find('/') == std::string::npos) {
                // bare address without the mailto scheme; seen in the wild
                result.emails.push_back(v);
            }
        } else if (iequals(field, "Expires")) {
            result.expires = std::string(value);
        }
    }
    return result;
}

}  // namespace credscan
