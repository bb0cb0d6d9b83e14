#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <nlohmann/json.hpp>

#include "credscan/capture.hpp"
#include "support/corpus.hpp"

using namespace credscan;
using nlohmann::ordered_json;

namespace {

ordered_json minimal_entry(const std::string& url, const std::string& body) {
    ordered_json e;
    e["startedDateTime"] = "2025-09-01T10:00:00.000Z";
    e["request"] = {{"method", "GET"}, {"url", url}, {"headers", ordered_json::array()}};
    e["response"] = {{"status", 200},
                     {"headers", ordered_json::array()},
                     {"content", {{"size", static_cast<long long>(body.size())},
                                  {"mimeType", "text/plain"},
                                  {"text", body}}}};
    return e;
}

ordered_json minimal_archive(std::vector<ordered_json> entries) {
    ordered_json doc;
    doc["log"]["version"] = "1.2";
    doc["log"]["pages"] = ordered_json::array(
        {{{"id", "p1"}, {"title", "https://www.site.example/"}, {"startedDateTime", "2025-09-01T10:00:00.000Z"}}});
    doc["log"]["entries"] = std::move(entries);
    return doc;
}

}  // namespace

TEST_CASE("an entry missing its response is skipped with one warning") {
    auto good = minimal_entry("https://www.site.example/a", "hello");
    ordered_json bad;
    bad["request"] = {{"method", "GET"}, {"url", "https://www.site.example/b"}};
    // no response record
    auto doc = minimal_archive({good, bad});
    CaptureArchive archive = parse_archive(doc.dump());
    CHECK(archive.entries.size() == 1);
    REQUIRE(archive.warnings.size() == 1);
    CHECK(archive.warnings[0].entry_index == 1);
}

TEST_CASE("base64-encoded body content is unwrapped") {
    auto entry = minimal_entry("https://www.site.example/bin", "");
    entry["response"]["content"]["text"] = "aGVsbG8gd29ybGQ=";
    entry["response"]["content"]["encoding"] = "base64";
    entry["response"]["content"]["size"] = 11;
    auto doc = minimal_archive({entry});
    CaptureArchive archive = parse_archive(doc.dump());
    REQUIRE(archive.entries.size() == 1);
    CHECK(archive.entries[0].body == "hello world");
    CHECK_FALSE(archive.entries[0].body_truncated);
}

TEST_CASE("archive order is preserved across many entries") {
    std::vector<ordered_json> entries;
    const size_t n = 10000;
    for (size_t i = 0; i < n; ++i)
        entries.push_back(minimal_entry("https://www.site.example/seq/" + std::to_string(i),
                                        "marker-" + std::to_string(i)));
    auto doc = minimal_archive(std::move(entries));
    CaptureArchive archive = parse_archive(doc.dump());
    REQUIRE(archive.entries.size() == n);
    for (size_t i = 0; i < n; ++i) {
        CHECK(archive.entries[i].request_url == "https://www.site.example/seq/" + std::to_string(i));
        CHECK(archive.entries[i].body == "marker-" + std::to_string(i));
    }
    CHECK(archive.warnings.empty());
}

TEST_CASE("gzip input is detected by magic bytes and inflated") {
    auto doc = minimal_archive({minimal_entry("https://www.site.example/x", "payload")});
    std::string gz = testsupport::gzip_compress(doc.dump());
    REQUIRE(looks_gzip(gz));
    CaptureArchive archive = parse_archive(gz);
    REQUIRE(archive.entries.size() == 1);
    CHECK(archive.entries[0].body == "payload");

    CHECK_THROWS_AS(parse_archive(gz.substr(0, gz.size() / 2)), NotAnArchive);
}

TEST_CASE("archive-level malformation raises NotAnArchive") {
    CHECK_THROWS_AS(parse_archive("this is not json"), NotAnArchive);
    CHECK_THROWS_AS(parse_archive("[1,2,3]"), NotAnArchive);
    CHECK_THROWS_AS(parse_archive("{\"nolog\": {}}"), NotAnArchive);
    CHECK_THROWS_AS(parse_archive("{\"log\": {\"pages\": []}}"), NotAnArchive);  // no entries array
}

TEST_CASE("an archive with zero entries is valid, not an error") {
    auto doc = minimal_archive({});
    CaptureArchive archive = parse_archive(doc.dump());
    CHECK(archive.entries.empty());
    CHECK(archive.warnings.empty());
    CHECK(archive.page_url == "https://www.site.example/");
    CHECK(archive.crawl_date == "2025-09-01");
}

TEST_CASE("page url falls back to the first entry when pages are absent") {
    ordered_json doc;
    doc["log"]["entries"] = ordered_json::array({minimal_entry("https://fallback.example/x", "b")});
    CaptureArchive archive = parse_archive(doc.dump());
    CHECK(archive.page_url == "https://fallback.example/x");
    CHECK(archive.crawl_date == "2025-09-01");

    ordered_json empty;
    empty["log"]["entries"] = ordered_json::array();
    CHECK_THROWS_AS(parse_archive(empty.dump()), NotAnArchive);  // no page url anywhere
}

TEST_CASE("entry and warning counts cover every raw entry record") {
    std::vector<ordered_json> entries;
    std::mt19937 gen(5);
    size_t raw_count = 40;
    for (size_t i = 0; i < raw_count; ++i) {
        if (gen() % 3 == 0) {
            ordered_json broken;
            broken["request"] = {{"method", "GET"}, {"url", "::not a url::"}};
            broken["response"] = {{"status", 200}};
            entries.push_back(broken);
        } else {
            entries.push_back(minimal_entry("https://www.site.example/e" + std::to_string(i), "x"));
        }
    }
    auto doc = minimal_archive(std::move(entries));
    CaptureArchive archive = parse_archive(doc.dump());
    CHECK(archive.entries.size() + archive.warnings.size() == raw_count);
}

TEST_CASE("parsing is total: mutated inputs either parse or raise NotAnArchive") {
    auto doc = minimal_archive({minimal_entry("https://www.site.example/x", "body text here")});
    std::string bytes = doc.dump();
    std::mt19937 gen(11);
    for (int round = 0; round < 300; ++round) {
        std::string mutated = bytes;
        switch (round % 3) {
            case 0:
                mutated = mutated.substr(0, gen() % mutated.size());
                break;
            case 1:
                mutated[gen() % mutated.size()] = static_cast<char>(gen() % 256);
                break;
            default:
                mutated.insert(gen() % mutated.size(), 1, static_cast<char>(gen() % 256));
                break;
        }
        try {
            CaptureArchive archive = parse_archive(mutated);
            CHECK(archive.page_url.size() > 0);
        } catch (const NotAnArchive&) {
            // acceptable outcome
        }
    }
}

TEST_CASE("bodies beyond the cap keep a prefix and are flagged truncated") {
    std::string big(1000, 'a');
    auto entry = minimal_entry("https://www.site.example/big", big);
    auto doc = minimal_archive({entry});
    ParseOptions opts;
    opts.body_cap = 100;
    CaptureArchive archive = parse_archive(doc.dump(), opts);
    REQUIRE(archive.entries.size() == 1);
    CHECK(archive.entries[0].body.size() == 100);
    CHECK(archive.entries[0].body_truncated);
}

TEST_CASE("declared size larger than delivered text flags truncation") {
    auto entry = minimal_entry("https://www.site.example/t", "short");
    entry["response"]["content"]["size"] = 5000;
    auto doc = minimal_archive({entry});
    CaptureArchive archive = parse_archive(doc.dump());
    REQUIRE(archive.entries.size() == 1);
    CHECK(archive.entries[0].body == "short");
    CHECK(archive.entries[0].body_truncated);
}

TEST_CASE("headers keep order and are matchable case-insensitively") {
    auto entry = minimal_entry("https://www.site.example/h", "x");
    entry["request"]["headers"] = ordered_json::array(
        {{{"name", "X-First"}, {"value", "1"}}, {{"name", "x-second"}, {"value", "2"}}});
    auto doc = minimal_archive({entry});
    CaptureArchive archive = parse_archive(doc.dump());
    REQUIRE(archive.entries.size() == 1);
    const auto& headers = archive.entries[0].request_headers;
    REQUIRE(headers.size() == 2);
    CHECK(headers[0].name == "X-First");
    CHECK(iequals(headers[1].name, "X-SECOND"));
}
