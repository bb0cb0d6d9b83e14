#pragma once

// Synthetic capture corpus with a ground-truth manifest: plants credentials
// for every service across exposure vectors, encodings, bundling states and
// parties. The manifest is the oracle the scanner is checked against.

#include <zlib.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "credscan/detector.hpp"
#include "credscan/signing.hpp"

namespace testsupport {

struct Rng {
    std::mt19937 gen;
    explicit Rng(unsigned seed) : gen(seed) {}

    int range(int lo, int hi) {  // inclusive
        return std::uniform_int_distribution<int>(lo, hi)(gen);
    }

    std::string pick(std::string_view alphabet, size_t n) {
        std::string out;
        out.reserve(n);
        for (size_t i = 0; i < n; ++i)
            out.push_back(alphabet[static_cast<size_t>(range(0, static_cast<int>(alphabet.size()) - 1))]);
        return out;
    }
};

inline const std::string kAlnum = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
inline const std::string kHex = "0123456789abcdef";
inline const std::string kUpperDigits = "ABCDEFGHIJKLMNOPQRSTUVWXYZ234567";
inline const std::string kB64Url = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789_-";
inline const std::string kAwsSecretChars =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789/+";

// All 14 services, in a fixed order.
inline const std::vector<std::string>& corpus_services() {
    static const std::vector<std::string> services = {
        "Alibaba", "AWS",      "Azure",  "Bitly", "Cloudflare", "GitHub", "Mailchimp",
        "OpenAI",  "Razorpay", "SendGrid", "Slack", "Stripe",   "Telegram", "Twilio"};
    return services;
}

inline std::string entropy_guarded(Rng& rng, const std::function<std::string(Rng&)>& make,
                                   double min_bits = 3.2) {
    for (int i = 0; i < 64; ++i) {
        std::string token = make(rng);
        if (credscan::shannon_entropy(token) >= min_bits) return token;
    }
    return make(rng);
}

// role -> token, matching the service grammar
inline std::map<std::string, std::string> make_parts(const std::string& service, Rng& rng) {
    std::map<std::string, std::string> parts;
    if (service == "Alibaba") {
        parts["keyId"] = "LTAI" + rng.pick(kAlnum, 18);
        parts["secret"] = entropy_guarded(rng, [](Rng& r) { return r.pick(kAlnum, 30); });
    } else if (service == "AWS") {
        parts["keyId"] = "AKIA" + rng.pick(kUpperDigits, 16);
        parts["secret"] = entropy_guarded(rng, [](Rng& r) { return r.pick(kAwsSecretChars, 40); });
    } else if (service == "Azure") {
        parts["keyId"] = rng.pick(kHex, 8) + "-" + rng.pick(kHex, 4) + "-" + rng.pick(kHex, 4) +
                         "-" + rng.pick(kHex, 4) + "-" + rng.pick(kHex, 12);
        parts["secret"] = entropy_guarded(
            rng, [](Rng& r) { return r.pick(kAlnum, 3) + "8Q~" + r.pick(kAlnum, 34); });
    } else if (service == "Bitly") {
        parts["token"] = entropy_guarded(rng, [](Rng& r) { return r.pick(kHex, 40); });
    } else if (service == "Cloudflare") {
        parts["token"] = entropy_guarded(rng, [](Rng& r) { return r.pick(kB64Url, 40); });
    } else if (service == "GitHub") {
        parts["token"] = entropy_guarded(
            rng, [](Rng& r) { return std::string(r.range(0, 1) ? "ghp_" : "gho_") + r.pick(kAlnum, 36); });
    } else if (service == "Mailchimp") {
        parts["token"] = entropy_guarded(
            rng, [](Rng& r) { return r.pick(kHex, 32) + "-us" + std::to_string(r.range(1, 20)); });
    } else if (service == "OpenAI") {
        parts["token"] = entropy_guarded(
            rng, [](Rng& r) { return "sk-" + r.pick(kAlnum, 20) + "T3BlbkFJ" + r.pick(kAlnum, 20); });
    } else if (service == "Razorpay") {
        parts["keyId"] = "rzp_live_" + rng.pick(kAlnum, 14);
        parts["secret"] = entropy_guarded(rng, [](Rng& r) { return r.pick(kAlnum, 24); });
    } else if (service == "SendGrid") {
        parts["token"] = entropy_guarded(
            rng, [](Rng& r) { return "SG." + r.pick(kB64Url, 22) + "." + r.pick(kB64Url, 43); });
    } else if (service == "Slack") {
        parts["token"] = entropy_guarded(rng, [](Rng& r) {
            return "xoxb-" + r.pick("0123456789", 12) + "-" + r.pick("0123456789", 12) + "-" +
                   r.pick(kAlnum, 24);
        });
    } else if (service == "Stripe") {
        parts["token"] = entropy_guarded(rng, [](Rng& r) { return "sk_live_" + r.pick(kAlnum, 24); });
    } else if (service == "Telegram") {
        parts["token"] = rng.pick("123456789", 1) + rng.pick("0123456789", 8) + ":" +
                         rng.pick(kB64Url, 35);
    } else if (service == "Twilio") {
        parts["keyId"] = "AC" + rng.pick(kHex, 32);
        parts["secret"] = entropy_guarded(rng, [](Rng& r) { return r.pick(kHex, 32); });
    }
    return parts;
}

inline std::string fingerprint_role_of(const std::string& service) {
    if (service == "Alibaba" || service == "AWS" || service == "Azure" || service == "Razorpay" ||
        service == "Twilio")
        return "keyId";
    return "token";
}

inline bool is_compound(const std::string& service) {
    return fingerprint_role_of(service) == "keyId";
}

struct PlantedCredential {
    std::string service;
    std::map<std::string, std::string> parts;
    std::string prefix15;
    // expected localization
    std::string vector;
    std::string content_class;
    std::string encoding;
    std::string party;
    bool bundled = false;
    std::string page_url;
    std::string resource_url;
};

inline std::string escape_unicode_all(std::string_view s) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (unsigned char c : s) {
        out += "\\u00";
        out.push_back(digits[c >> 4]);
        out.push_back(digits[c & 0x0f]);
    }
    return out;
}

// Keyword context a detector's prefilter needs, by service.
inline std::string context_label(const std::string& service) {
    if (service == "Bitly") return "bitly_access_token";
    if (service == "Cloudflare") return "cloudflare_api_token";
    return credscan::to_lower(service) + "_credential";
}

// Renders the token material for one plant: the raw text that carries the
// credential under the requested encoding. Compound parts stay close
// together so pairing stays inside the window.
inline std::string plant_payload(const PlantedCredential& plant, const std::string& encoding) {
    const std::string label = context_label(plant.service);
    if (encoding == "PLAIN") {
        std::string out;
        size_t i = 0;
        for (const auto& [role, token] : plant.parts) {
            out += "var " + label + "_" + role + " = \"" + token + "\";\n";
            ++i;
        }
        return out;
    }
    if (encoding == "ESCAPED_UNICODE") {
        std::string out;
        for (const auto& [role, token] : plant.parts)
            out += "var " + label + "_" + role + " = \"" + escape_unicode_all(token) + "\";\n";
        return out;
    }
    // BASE64: one JSON blob holding every part plus the keyword context
    nlohmann::ordered_json blob;
    for (const auto& [role, token] : plant.parts) blob[label + "_" + role] = token;
    std::string encoded = credscan::signing::base64_encode(blob.dump());
    return "var " + label + "_blob = atob(\"" + encoded + "\");\n";
}

inline std::string js_filler(Rng& rng) {
    static const std::vector<std::string> lines = {
        "function renderWidget(n){return n < 4 ? n : n - 1;}",
        "const palette = ['teal', 'ochre', 'slate'];",
        "let counter = 0;",
        "function onReady(cb){window.setTimeout(cb, 50);}",
        "const routes = {home: '/', cart: '/cart', help: '/help'};",
        "function clamp(v, lo, hi){return v < lo ? lo : (v > hi ? hi : v);}",
    };
    std::string out;
    int n = rng.range(2, 4);
    for (int i = 0; i < n; ++i) out += lines[static_cast<size_t>(rng.range(0, static_cast<int>(lines.size()) - 1))] + "\n";
    return out;
}

struct CorpusEntrySpec {
    std::string url;
    std::string method = "GET";
    std::vector<std::pair<std::string, std::string>> request_headers;
    std::vector<std::pair<std::string, std::string>> response_headers;
    int status = 200;
    std::string mime;
    std::string body;
};

inline nlohmann::ordered_json har_entry(const CorpusEntrySpec& spec) {
    nlohmann::ordered_json e;
    e["startedDateTime"] = "2025-09-01T10:00:00.000Z";
    e["request"]["method"] = spec.method;
    e["request"]["url"] = spec.url;
    e["request"]["headers"] = nlohmann::ordered_json::array();
    for (const auto& [name, value] : spec.request_headers)
        e["request"]["headers"].push_back({{"name", name}, {"value", value}});
    e["response"]["status"] = spec.status;
    e["response"]["headers"] = nlohmann::ordered_json::array();
    for (const auto& [name, value] : spec.response_headers)
        e["response"]["headers"].push_back({{"name", name}, {"value", value}});
    e["response"]["content"]["size"] = static_cast<long long>(spec.body.size());
    e["response"]["content"]["mimeType"] = spec.mime;
    e["response"]["content"]["text"] = spec.body;
    return e;
}

inline nlohmann::ordered_json har_document(const std::string& page_url,
                                           const std::vector<CorpusEntrySpec>& entries) {
    nlohmann::ordered_json doc;
    doc["log"]["version"] = "1.2";
    doc["log"]["creator"] = {{"name", "corpus-generator"}, {"version", "1"}};
    doc["log"]["pages"] = nlohmann::ordered_json::array();
    doc["log"]["pages"].push_back({{"id", "page_1"},
                                   {"title", page_url},
                                   {"startedDateTime", "2025-09-01T10:00:00.000Z"}});
    doc["log"]["entries"] = nlohmann::ordered_json::array();
    for (const auto& e : entries) doc["log"]["entries"].push_back(har_entry(e));
    return doc;
}

struct Corpus {
    std::vector<std::string> archive_paths;
    std::vector<PlantedCredential> manifest;
};

// 15 plants per service: all four vectors, the three encodings, bundled and
// unbundled JavaScript, HTML/JSON/CSS bodies, both parties.
inline Corpus generate_corpus(const std::string& dir, unsigned seed = 42) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    Rng rng(seed);
    Corpus corpus;

    struct PlantShape {
        const char* vector;
        const char* content;  // of the resource
        const char* encoding;
        bool bundled;
        bool first_party;
    };
    const PlantShape shapes[] = {
        {"REQUEST_URL", "JAVASCRIPT", "PLAIN", false, true},
        {"REQUEST_HEADER", "JSON", "PLAIN", false, false},
        {"RESPONSE_HEADER", "OTHER", "PLAIN", false, true},
        {"RESPONSE_BODY", "JAVASCRIPT", "PLAIN", false, true},
        {"RESPONSE_BODY", "JAVASCRIPT", "PLAIN", true, false},
        {"RESPONSE_BODY", "JAVASCRIPT", "ESCAPED_UNICODE", true, true},
        {"RESPONSE_BODY", "JAVASCRIPT", "BASE64", false, false},
        {"RESPONSE_BODY", "HTML_DOM", "PLAIN", false, true},
        {"RESPONSE_BODY", "JSON", "PLAIN", false, false},
        {"RESPONSE_BODY", "CSS", "PLAIN", false, true},
        {"RESPONSE_BODY", "JAVASCRIPT", "ESCAPED_UNICODE", false, false},
        {"RESPONSE_BODY", "JAVASCRIPT", "BASE64", true, true},
        {"REQUEST_URL", "JAVASCRIPT", "PLAIN", false, false},
        {"RESPONSE_BODY", "HTML_DOM", "PLAIN", false, false},
        {"RESPONSE_BODY", "JAVASCRIPT", "PLAIN", false, true},
    };

    for (const auto& service : corpus_services()) {
        const std::string site = credscan::to_lower(service) + "-site.example";
        const std::string page_url = "https://www." + site + "/";
        std::vector<CorpusEntrySpec> entries;

        // landing page; one HTML_DOM first-party plant lives in its body
        CorpusEntrySpec page;
        page.url = page_url;
        page.mime = "text/html";
        page.body = "<!doctype html><html><head><title>shop</title></head><body>\n";

        size_t plant_index = 0;
        for (const auto& shape : shapes) {
            PlantedCredential plant;
            plant.service = service;
            plant.parts = make_parts(service, rng);
            const std::string& fp_part = plant.parts.at(fingerprint_role_of(service));
            plant.prefix15 = fp_part.substr(0, std::min<size_t>(15, fp_part.size()));
            plant.vector = shape.vector;
            plant.content_class = shape.content;
            plant.encoding = shape.encoding;
            plant.bundled = shape.bundled;
            plant.party = shape.first_party ? "FIRST" : "THIRD";
            plant.page_url = page_url;

            const std::string host =
                shape.first_party ? ("assets." + site) : "cdn.shared-widgets.net";
            const std::string res_path = "/r" + std::to_string(plant_index);

            if (std::string(shape.vector) == "REQUEST_URL") {
                CorpusEntrySpec e;
                std::string query;
                for (const auto& [role, token] : plant.parts) {
                    if (!query.empty()) query += "&";
                    query += context_label(service) + "_" + role + "=" + token;
                }
                e.url = "https://" + host + res_path + ".js?" + query;
                e.mime = "application/javascript";
                e.body = js_filler(rng);
                plant.resource_url = e.url;
                entries.push_back(std::move(e));
            } else if (std::string(shape.vector) == "REQUEST_HEADER") {
                CorpusEntrySpec e;
                e.url = "https://" + host + res_path + "/api";
                e.mime = "application/json";
                e.body = "{\"ok\": true}";
                std::string value;
                for (const auto& [role, token] : plant.parts) {
                    if (!value.empty()) value += ", ";
                    value += context_label(service) + "_" + role + "=" + token;
                }
                e.request_headers.emplace_back("Authorization", value);
                e.request_headers.emplace_back("Accept", "application/json");
                plant.resource_url = e.url;
                entries.push_back(std::move(e));
            } else if (std::string(shape.vector) == "RESPONSE_HEADER") {
                CorpusEntrySpec e;
                e.url = "https://" + host + res_path + ".txt";
                e.mime = "text/plain";
                e.body = "status: ok\n";
                std::string value;
                for (const auto& [role, token] : plant.parts) {
                    if (!value.empty()) value += "; ";
                    value += role + "=" + token;
                }
                e.response_headers.emplace_back("X-" + context_label(service), value);
                plant.resource_url = e.url;
                entries.push_back(std::move(e));
            } else {
                // RESPONSE_BODY
                const std::string payload = plant_payload(plant, shape.encoding);
                if (std::string(shape.content) == "JAVASCRIPT") {
                    CorpusEntrySpec e;
                    e.url = "https://" + host + res_path + ".js";
                    e.mime = "application/javascript";
                    e.body = js_filler(rng);
                    if (shape.bundled)
                        e.body += "(function(){var m = __webpack_require__(42); return m;})();\n";
                    e.body += payload;
                    e.body += js_filler(rng);
                    plant.resource_url = e.url;
                    entries.push_back(std::move(e));
                } else if (std::string(shape.content) == "HTML_DOM") {
                    if (shape.first_party) {
                        page.body += "<script>\n" + payload + "</script>\n";
                        plant.resource_url = page_url;
                    } else {
                        CorpusEntrySpec e;
                        e.url = "https://" + host + res_path + ".html";
                        e.mime = "text/html";
                        e.body = "<!doctype html><html><body><script>\n" + payload +
                                 "</script></body></html>";
                        plant.resource_url = e.url;
                        entries.push_back(std::move(e));
                    }
                } else if (std::string(shape.content) == "JSON") {
                    CorpusEntrySpec e;
                    e.url = "https://" + host + res_path + ".json";
                    e.mime = "application/json";
                    nlohmann::ordered_json j;
                    for (const auto& [role, token] : plant.parts)
                        j[context_label(service) + "_" + role] = token;
                    j["theme"] = "dark";
                    e.body = j.dump(2);
                    plant.resource_url = e.url;
                    entries.push_back(std::move(e));
                } else {  // CSS
                    CorpusEntrySpec e;
                    e.url = "https://" + host + res_path + ".css";
                    e.mime = "text/css";
                    std::string comment = "/*";
                    for (const auto& [role, token] : plant.parts)
                        comment += " " + context_label(service) + "_" + role + ": " + token;
                    comment += " */";
                    e.body = "body { margin: 0; }\n" + comment + "\n.card { padding: 4px; }\n";
                    plant.resource_url = e.url;
                    entries.push_back(std::move(e));
                }
            }
            corpus.manifest.push_back(std::move(plant));
            ++plant_index;
        }

        page.body += "</body></html>\n";
        std::vector<CorpusEntrySpec> all_entries;
        all_entries.push_back(std::move(page));
        for (auto& e : entries) all_entries.push_back(std::move(e));

        const std::string path = dir + "/" + credscan::to_lower(service) + ".har";
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << har_document(page_url, all_entries).dump(1);
        corpus.archive_paths.push_back(path);
    }
    return corpus;
}

// --- decoys ------------------------------------------------------------

// Structured non-credentials: identifier-style names, base64 blobs of random
// bytes, hex digests, UUIDs, long URLs, JWT-shaped strings.
inline std::vector<std::string> generate_decoys(size_t count, unsigned seed = 7) {
    Rng rng(seed);
    static const std::vector<std::string> words = {
        "Quick", "Order",  "Line",   "Quantity", "View",   "Manager", "Handler", "Widget",
        "Cache", "Buffer", "Stream", "Config",   "Loader", "Render",  "Index",   "Session"};
    std::vector<std::string> decoys;
    decoys.reserve(count);
    decoys.push_back("QuickOrderLineQuantityView");
    while (decoys.size() < count) {
        switch (decoys.size() % 6) {
            case 0: {  // camel-case identifier
                std::string id;
                int n = rng.range(3, 6);
                for (int i = 0; i < n; ++i)
                    id += words[static_cast<size_t>(rng.range(0, static_cast<int>(words.size()) - 1))];
                decoys.push_back(id);
                break;
            }
            case 1: {  // base64 of random bytes
                std::string raw;
                int n = rng.range(24, 60);
                for (int i = 0; i < n; ++i) raw.push_back(static_cast<char>(rng.range(0, 255)));
                decoys.push_back(credscan::signing::base64_encode(raw));
                break;
            }
            case 2:
                decoys.push_back(rng.pick(kHex, rng.range(0, 1) ? 40 : 64));  // sha1 / sha256
                break;
            case 3:
                decoys.push_back(rng.pick(kHex, 8) + "-" + rng.pick(kHex, 4) + "-" +
                                 rng.pick(kHex, 4) + "-" + rng.pick(kHex, 4) + "-" +
                                 rng.pick(kHex, 12));
                break;
            case 4:
                decoys.push_back("https://static.widget-host.net/assets/" + rng.pick(kAlnum, 24) +
                                 "/bundle.min.js?v=" + rng.pick(kHex, 12));
                break;
            default:
                decoys.push_back("eyJ" + rng.pick(kB64Url, 20) + "." + "eyJ" + rng.pick(kB64Url, 28) +
                                 "." + rng.pick(kB64Url, 32));
                break;
        }
    }
    decoys.resize(count);
    return decoys;
}

// --- misc helpers ------------------------------------------------------

inline std::string gzip_compress(std::string_view data) {
    z_stream zs{};
    deflateInit2(&zs, Z_BEST_SPEED, Z_DEFLATED, 16 + MAX_WBITS, 8, Z_DEFAULT_STRATEGY);
    std::string out;
    out.resize(deflateBound(&zs, static_cast<uLong>(data.size())));
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
    zs.avail_in = static_cast<uInt>(data.size());
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    deflate(&zs, Z_FINISH);
    out.resize(out.size() - zs.avail_out);
    deflateEnd(&zs);
    return out;
}

inline std::string write_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return path;
}

inline std::string make_temp_dir(const std::string& tag) {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / ("credscan_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir.string();
}

}  // namespace testsupport
