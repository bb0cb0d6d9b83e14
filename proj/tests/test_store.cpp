#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "credscan/config.hpp"
#include "credscan/report.hpp"
#include "support/corpus.hpp"

using namespace credscan;

namespace {

ReportRecord sample_record(int i) {
    ReportRecord r;
    r.page_url = "https://www.site" + std::to_string(i) + ".example/";
    r.resource_url = "https://cdn.site" + std::to_string(i) + ".example/app.js";
    r.service = i % 2 == 0 ? "Stripe" : "AWS";
    r.fingerprint = "prefix15chars" + std::to_string(i % 10);
    r.encoding = "PLAIN";
    r.vector = "RESPONSE_BODY";
    r.content_class = "JAVASCRIPT";
    r.bundled = i % 3 == 0;
    r.bundler_name = r.bundled ? "webpack" : "";
    r.party = i % 2 == 0 ? "FIRST" : "THIRD";
    r.crawl_date = "2025-09-01";
    return r;
}

}  // namespace

TEST_CASE("records round-trip byte-identically") {
    testsupport::Rng rng(61);
    for (int i = 0; i < 100; ++i) {
        ReportRecord r = sample_record(i);
        if (i % 4 == 0) {
            r.verdict_state = "VALID";
            r.verdict_status = 200;
        }
        std::string line = r.to_json_line();
        ReportRecord parsed = ReportRecord::from_json_line(line);
        CHECK(parsed.to_json_line() == line);
    }
}

TEST_CASE("malformed store lines carry file context") {
    std::string dir = testsupport::make_temp_dir("store_bad");
    std::string path = dir + "/findings.jsonl";
    testsupport::write_file(path, "{\"schemaVersion\":1}\nnot json\n");
    CHECK_THROWS_AS(ReportStore::read_all(path), MalformedRecord);
    try {
        ReportStore::read_all(path);
    } catch (const MalformedRecord& e) {
        CHECK(std::string(e.what()).find(":2") != std::string::npos);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("reading a missing store yields no records") {
    CHECK(ReportStore::read_all("/nonexistent/store.jsonl").empty());
}

TEST_CASE("verification appends superseding records, reads resolve latest-wins") {
    std::string dir = testsupport::make_temp_dir("store_latest");
    std::string path = dir + "/findings.jsonl";

    ReportRecord original = sample_record(1);
    ReportStore::append(path, {original});

    ReportRecord update = original;
    update.verdict_state = "VALID";
    update.verdict_status = 200;
    ReportStore::append(path, {update});

    auto all = ReportStore::read_all(path);
    CHECK(all.size() == 2);  // append-only, no in-place mutation

    auto latest = ReportStore::read_latest(path);
    REQUIRE(latest.size() == 1);
    CHECK(latest[0].verdict_state == "VALID");
    CHECK(latest[0].verdict_status == 200);
    CHECK(latest[0].identity_key() == original.identity_key());
    std::filesystem::remove_all(dir);
}

TEST_CASE("identity ignores verdict fields, nothing else") {
    ReportRecord a = sample_record(2);
    ReportRecord b = a;
    b.verdict_state = "INVALID";
    b.verdict_status = 401;
    CHECK(a.identity_key() == b.identity_key());
    b.fingerprint = "different_prefix";
    CHECK(a.identity_key() != b.identity_key());
}

TEST_CASE("the store lock is exclusive and released on destruction") {
    std::string dir = testsupport::make_temp_dir("store_lock");
    std::string path = dir + "/findings.jsonl";
    {
        StoreLock lock(path);
        CHECK_THROWS_AS(StoreLock(path), StoreLocked);
    }
    StoreLock reacquired(path);  // released by the destructor above
    std::filesystem::remove_all(dir);
}

TEST_CASE("config files parse key = value lines") {
    RunConfig cfg = parse_config(R"(# comment
detector_specs = data/detectors.json
suffix_rules = data/public_suffix.dat
offline = true
store = out/findings.jsonl
outbox = out/outbox
per_service_concurrency = 2
min_interval_millis = 10
max_retries = 1
timeout_millis = 500
override.Stripe = http://127.0.0.1:9999
)");
    CHECK(cfg.detector_spec_file == "data/detectors.json");
    CHECK(cfg.suffix_rule_file == "data/public_suffix.dat");
    CHECK(cfg.offline);
    CHECK(cfg.store_path == "out/findings.jsonl");
    CHECK(cfg.budget.per_service_concurrency == 2);
    CHECK(cfg.budget.max_retries == 1);
    REQUIRE(cfg.endpoint_overrides.count("Stripe") == 1);
    CHECK(cfg.endpoint_overrides.at("Stripe") == "http://127.0.0.1:9999");
}

TEST_CASE("config validation rejects nonsense") {
    CHECK_THROWS_AS(parse_config("no equals sign"), ConfigError);
    CHECK_THROWS_AS(parse_config("unknown_key = 1"), ConfigError);
    CHECK_THROWS_AS(parse_config("offline = maybe"), ConfigError);
    CHECK_THROWS_AS(parse_config("max_retries = many"), ConfigError);
    CHECK_THROWS_AS(parse_config("per_service_concurrency = 0"), ConfigError);
}

TEST_CASE("environment overrides beat config overrides") {
    RunConfig cfg = parse_config("override.Stripe = http://config-value\n");
    ::setenv("STRIPE_VERIFY_BASE", "http://env-value", 1);
    apply_env_overrides(cfg, {"Stripe", "AWS"});
    ::unsetenv("STRIPE_VERIFY_BASE");
    CHECK(cfg.endpoint_overrides.at("Stripe") == "http://env-value");
    CHECK(cfg.endpoint_overrides.count("AWS") == 0);
}
