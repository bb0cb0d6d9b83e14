#pragma once

// Request signing for the two verification endpoints that need it: AWS
// Signature Version 4 (STS GetCallerIdentity) and the Alibaba Cloud RPC
// HMAC-SHA1 query signature (ECS DescribeRegions). Hash/HMAC primitives come
// from OpenSSL; canonicalization is built here and pinned by known-answer
// tests.

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/sha.h>

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "credscan/util.hpp"

namespace credscan {
namespace signing {

inline std::string sha256_hex(std::string_view data) {
    unsigned char digest[SHA256_DIGEST_LENGTH];
    SHA256(reinterpret_cast<const unsigned char*>(data.data()), data.size(), digest);
    return hex_lower(digest, sizeof(digest));
}

inline std::string hmac_sha256(std::string_view key, std::string_view msg) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()),
         reinterpret_cast<const unsigned char*>(msg.data()), msg.size(), digest, &len);
    return std::string(reinterpret_cast<char*>(digest), len);
}

inline std::string hmac_sha1(std::string_view key, std::string_view msg) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    HMAC(EVP_sha1(), key.data(), static_cast<int>(key.size()),
         reinterpret_cast<const unsigned char*>(msg.data()), msg.size(), digest, &len);
    return std::string(reinterpret_cast<char*>(digest), len);
}

inline std::string base64_encode(std::string_view data) {
    static const char* table = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    while (i + 3 <= data.size()) {
        uint32_t v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8) |
                     static_cast<unsigned char>(data[i + 2]);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back(table[v & 63]);
        i += 3;
    }
    size_t rem = data.size() - i;
    if (rem == 1) {
        uint32_t v = static_cast<unsigned char>(data[i]) << 16;
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out += "==";
    } else if (rem == 2) {
        uint32_t v = (static_cast<unsigned char>(data[i]) << 16) |
                     (static_cast<unsigned char>(data[i + 1]) << 8);
        out.push_back(table[(v >> 18) & 63]);
        out.push_back(table[(v >> 12) & 63]);
        out.push_back(table[(v >> 6) & 63]);
        out.push_back('=');
    }
    return out;
}

// RFC 3986 unreserved set, everything else percent-encoded uppercase. This
// is the encoding both AWS and Alibaba canonicalization use.
inline std::string uri_encode(std::string_view s) {
    static const char* digits = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') ||
            c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            out.push_back('%');
            out.push_back(digits[c >> 4]);
            out.push_back(digits[c & 0x0f]);
        }
    }
    return out;
}

struct SigV4Request {
    std::string method = "GET";
    std::string host;
    std::string path = "/";
    std::string canonical_query;  // already sorted and encoded
    std::string payload;
    std::string amz_date;  // 20250101T000000Z
    std::string region = "us-east-1";
    std::string service = "sts";
};

struct SigV4Result {
    std::string authorization;
    std::string amz_date;
    std::string signature;
};

// Canonical request -> string to sign -> signing key chain -> signature.
// Signs host and x-amz-date only; the verification calls need nothing else.
inline SigV4Result sigv4_sign(const SigV4Request& req, std::string_view access_key_id,
                              std::string_view secret_key) {
    const std::string canonical_headers =
        "host:" + req.host + "\n" + "x-amz-date:" + req.amz_date + "\n";
    const std::string signed_headers = "host;x-amz-date";
    const std::string canonical_request = req.method + "\n" + req.path + "\n" +
                                          req.canonical_query + "\n" + canonical_headers + "\n" +
                                          signed_headers + "\n" + sha256_hex(req.payload);

    const std::string datestamp = req.amz_date.substr(0, 8);
    const std::string scope = datestamp + "/" + req.region + "/" + req.service + "/aws4_request";
    const std::string string_to_sign =
        "AWS4-HMAC-SHA256\n" + req.amz_date + "\n" + scope + "\n" + sha256_hex(canonical_request);

    std::string k = hmac_sha256("AWS4" + std::string(secret_key), datestamp);
    k = hmac_sha256(k, req.region);
    k = hmac_sha256(k, req.service);
    k = hmac_sha256(k, "aws4_request");
    const std::string signature_raw = hmac_sha256(k, string_to_sign);
    SigV4Result result;
    result.signature = hex_lower(reinterpret_cast<const unsigned char*>(signature_raw.data()),
                                 signature_raw.size());
    result.amz_date = req.amz_date;
    result.authorization = "AWS4-HMAC-SHA256 Credential=" + std::string(access_key_id) + "/" +
                           scope + ", SignedHeaders=" + signed_headers +
                           ", Signature=" + result.signature;
    return result;
}

// Alibaba Cloud RPC-style GET signature: sorted percent-encoded query,
// HMAC-SHA1 with "<secret>&", base64 signature appended as Signature=.
inline std::string alibaba_signed_query(std::map<std::string, std::string> params,
                                        std::string_view access_key_secret) {
    std::string canonical;
    for (const auto& [k, v] : params) {
        if (!canonical.empty()) canonical.push_back('&');
        canonical += uri_encode(k) + "=" + uri_encode(v);
    }
    const std::string string_to_sign = "GET&%2F&" + uri_encode(canonical);
    const std::string mac = hmac_sha1(std::string(access_key_secret) + "&", string_to_sign);
    const std::string signature = base64_encode(mac);
    return canonical + "&Signature=" + uri_encode(signature);
}

}  // namespace signing
}  // namespace credscan
