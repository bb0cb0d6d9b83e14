#include <catch2/catch_amalgamated.hpp>

#include <map>

#include "credscan/builtin_data.hpp"
#include "credscan/verify.hpp"
#include "support/corpus.hpp"
#include "support/mock_service.hpp"

using namespace credscan;
using testsupport::MockService;

namespace {

RateBudget fast_budget() {
    RateBudget b;
    b.per_service_concurrency = 4;
    b.min_interval_millis = 1;
    b.max_retries = 2;
    b.backoff_base_millis = 5;
    b.timeout_millis = 2000;
    return b;
}

CandidateCredential make_candidate(const std::string& service, testsupport::Rng& rng) {
    CandidateCredential c;
    c.service = service;
    c.parts = testsupport::make_parts(service, rng);
    c.secret_role = testsupport::is_compound(service) ? "secret" : "token";
    c.fingerprint_role = testsupport::fingerprint_role_of(service);
    c.complete = true;
    return c;
}

const VerificationProfile& profile_of(const std::vector<VerificationProfile>& profiles,
                                      const std::string& service) {
    for (const auto& p : profiles)
        if (p.service == service) return p;
    throw std::runtime_error("no profile " + service);
}

}  // namespace

TEST_CASE("builtin profiles cover the 14 services and match the shipped file") {
    auto builtin = builtin_verification_profiles();
    CHECK(builtin.size() == 14);
    auto from_file = load_profiles(std::string(CREDSCAN_DATA_DIR) + "/profiles.json");
    REQUIRE(from_file.size() == builtin.size());
    for (size_t i = 0; i < builtin.size(); ++i) {
        CHECK(from_file[i].service == builtin[i].service);
        CHECK(from_file[i].endpoint_template == builtin[i].endpoint_template);
        CHECK(from_file[i].method == builtin[i].method);
        CHECK(from_file[i].auth == builtin[i].auth);
        CHECK(from_file[i].success_statuses == builtin[i].success_statuses);
        CHECK(from_file[i].invalid_statuses == builtin[i].invalid_statuses);
    }
    // the Telegram template embeds the token in the path
    CHECK(profile_of(builtin, "Telegram").endpoint_template ==
          "https://api.telegram.org/bot{TOKEN}/getMe");
    CHECK(profile_of(builtin, "Mailchimp").endpoint_template.find("{dc}") != std::string::npos);
    for (const auto& p : builtin) CHECK_FALSE(p.destructive);
}

TEST_CASE("destructive or malformed profiles are rejected at load") {
    CHECK_THROWS_AS(parse_profiles_text(R"({"profiles":[{"service":"X","endpoint":
        "https://x.example/","destructive":true}]})"),
                    DestructiveProfileRejected);
    CHECK_THROWS_AS(parse_profiles_text(R"({"profiles":[{"service":"X","endpoint":"not-a-url"}]})"),
                    MalformedTemplate);
    CHECK_THROWS_AS(parse_profiles_text(R"({"profiles":[{"service":"X","endpoint":
        "https://x.example/{unbalanced"}]})"),
                    MalformedTemplate);
    CHECK_THROWS_AS(parse_profiles_text(R"({"profiles":[{"service":"X","endpoint":
        "https://x.example/","method":"DELETE"}]})"),
                    MalformedTemplate);
    CHECK_THROWS_AS(parse_profiles_text(R"({"profiles":[{"service":"X","endpoint":
        "https://x.example/","success":[200],"invalid":[200]}]})"),
                    MalformedTemplate);
}

TEST_CASE("status codes map to verdicts per profile") {
    auto profiles = builtin_verification_profiles();
    testsupport::Rng rng(10);
    auto stripe = make_candidate("Stripe", rng);
    const auto& profile = profile_of(profiles, "Stripe");

    SECTION("success status means VALID") {
        MockService mock("SENTINEL-BODY", 200);
        auto verdict = verify(profile, stripe, fast_budget(), mock.base_url());
        CHECK(verdict.state == VerdictState::Valid);
        CHECK(verdict.status == 200);
        CHECK(verdict.attempts == 1);
        CHECK_FALSE(verdict.checked_at.empty());
    }

    SECTION("invalid status means INVALID") {
        MockService mock("SENTINEL-BODY", 401);
        auto verdict = verify(profile, stripe, fast_budget(), mock.base_url());
        CHECK(verdict.state == VerdictState::Invalid);
        CHECK(verdict.status == 401);
    }

    SECTION("429 retries with backoff, then succeeds") {
        MockService mock("SENTINEL-BODY", 401);
        mock.script("/", {429, 200});
        auto verdict = verify(profile, stripe, fast_budget(), mock.base_url());
        CHECK(verdict.state == VerdictState::Valid);
        CHECK(verdict.attempts == 2);
    }

    SECTION("persistent 5xx ends INDETERMINATE after retries") {
        MockService mock("SENTINEL-BODY", 503);
        auto verdict = verify(profile, stripe, fast_budget(), mock.base_url());
        CHECK(verdict.state == VerdictState::Indeterminate);
        CHECK(verdict.attempts == 3);  // 1 + maxRetries
    }

    SECTION("unlisted 403 is INDETERMINATE and flagged for review") {
        MockService mock("SENTINEL-BODY", 403);
        auto verdict = verify(profile, stripe, fast_budget(), mock.base_url());
        CHECK(verdict.state == VerdictState::Indeterminate);
        CHECK(verdict.reason.find("manual review") != std::string::npos);
    }

    SECTION("connection failure is INDETERMINATE, never a crash") {
        auto verdict =
            verify(profile, stripe, fast_budget(), testsupport::unreachable_base_url());
        CHECK(verdict.state == VerdictState::Indeterminate);
        CHECK_FALSE(verdict.reason.empty());
    }
}

TEST_CASE("telegram embeds the token in the request path") {
    auto profiles = builtin_verification_profiles();
    testsupport::Rng rng(11);
    auto telegram = make_candidate("Telegram", rng);
    MockService mock("SENTINEL-BODY", 200);
    auto verdict = verify(profile_of(profiles, "Telegram"), telegram, fast_budget(), mock.base_url());
    CHECK(verdict.state == VerdictState::Valid);
    REQUIRE(mock.paths().size() == 1);
    CHECK(mock.paths()[0] == "/bot" + telegram.parts.at("token") + "/getMe");
}

TEST_CASE("signed requests verify against scripted statuses") {
    auto profiles = builtin_verification_profiles();
    testsupport::Rng rng(12);
    MockService mock("SENTINEL-BODY", 200);
    for (const char* service : {"AWS", "Alibaba"}) {
        auto cand = make_candidate(service, rng);
        auto verdict = verify(profile_of(profiles, service), cand, fast_budget(), mock.base_url());
        CHECK(verdict.state == VerdictState::Valid);
    }
    // AWS treats 403 as invalid: GetCallerIdentity needs no permissions
    MockService denied("SENTINEL-BODY", 403);
    auto aws = make_candidate("AWS", rng);
    auto verdict = verify(profile_of(profiles, "AWS"), aws, fast_budget(), denied.base_url());
    CHECK(verdict.state == VerdictState::Invalid);
}

TEST_CASE("incomplete candidates are never verified") {
    auto profiles = builtin_verification_profiles();
    testsupport::Rng rng(13);
    auto aws = make_candidate("AWS", rng);
    aws.parts.erase("secret");
    aws.complete = false;
    MockService mock("SENTINEL-BODY", 200);
    auto verdict = verify(profile_of(profiles, "AWS"), aws, fast_budget(), mock.base_url());
    CHECK(verdict.state == VerdictState::Indeterminate);
    CHECK(mock.hits() == 0);
}

TEST_CASE("batch verification memoizes by fingerprint") {
    testsupport::Rng rng(14);
    MockService mock("SENTINEL-BODY", 200);
    std::vector<CandidateCredential> candidates;
    auto shared = make_candidate("Stripe", rng);
    for (int i = 0; i < 30; ++i) candidates.push_back(shared);
    for (int i = 0; i < 70; ++i) candidates.push_back(make_candidate("Stripe", rng));

    Verifier verifier(builtin_verification_profiles(), fast_budget(), false,
                      {{"Stripe", mock.base_url()}});
    auto verdicts = verifier.verify_batch(candidates);
    CHECK(verdicts.size() == 71);
    CHECK(mock.hits() == 71);

    // a second batch inside the same run stays memoized
    auto again = verifier.verify_batch(candidates);
    CHECK(again.size() == 71);
    CHECK(mock.hits() == 71);
}

TEST_CASE("per-service concurrency respects the budget") {
    testsupport::Rng rng(15);
    MockService mock("SENTINEL-BODY", 200, /*handler_delay_ms=*/40);
    std::vector<CandidateCredential> candidates;
    for (int i = 0; i < 8; ++i) candidates.push_back(make_candidate("Stripe", rng));
    RateBudget budget = fast_budget();
    budget.per_service_concurrency = 2;

    Verifier verifier(builtin_verification_profiles(), budget, false,
                      {{"Stripe", mock.base_url()}});
    auto verdicts = verifier.verify_batch(candidates);
    CHECK(verdicts.size() == 8);
    CHECK(mock.hits() == 8);
    CHECK(mock.max_concurrent() <= 2);
}

TEST_CASE("offline mode with no overrides opens zero connections") {
    testsupport::SocketCounter counter;
    // profiles whose real endpoints point at the counting listener
    auto profiles = builtin_verification_profiles();
    for (auto& p : profiles) {
        Url u = Url::parse(p.endpoint_template);
        std::string path = p.endpoint_template.substr(u.origin().size());
        p.endpoint_template = counter.base_url() + path;
    }
    testsupport::Rng rng(16);
    std::vector<CandidateCredential> candidates;
    for (const auto& service : testsupport::corpus_services())
        candidates.push_back(make_candidate(service, rng));

    Verifier verifier(profiles, fast_budget(), /*offline=*/true, {});
    auto verdicts = verifier.verify_batch(candidates);
    REQUIRE(verdicts.size() == candidates.size());
    for (const auto& [key, verdict] : verdicts) {
        CHECK(verdict.state == VerdictState::Indeterminate);
        CHECK(verdict.reason.find("offline") != std::string::npos);
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    CHECK(counter.accepted() == 0);

    // with an override, offline mode does reach the override endpoint
    MockService mock("SENTINEL-BODY", 200);
    Verifier with_override(builtin_verification_profiles(), fast_budget(), true,
                           {{"Stripe", mock.base_url()}});
    auto one = with_override.verify_batch({make_candidate("Stripe", rng)});
    REQUIRE(one.size() == 1);
    CHECK(one.begin()->second.state == VerdictState::Valid);
    CHECK(mock.hits() == 1);
}

TEST_CASE("verdicts carry no response content") {
    testsupport::Rng rng(17);
    MockService mock("SENTINEL-b0dy-8d777f38", 200);
    Verifier verifier(builtin_verification_profiles(), fast_budget(), false,
                      {{"Stripe", mock.base_url()}});
    auto verdicts = verifier.verify_batch({make_candidate("Stripe", rng)});
    REQUIRE(verdicts.size() == 1);
    const auto& verdict = verdicts.begin()->second;
    CHECK(verdict.state == VerdictState::Valid);
    CHECK(verdict.reason.find(mock.sentinel()) == std::string::npos);
    CHECK(verdict.checked_at.find(mock.sentinel()) == std::string::npos);
}

TEST_CASE("empty batch yields empty output and no traffic") {
    MockService mock("SENTINEL-BODY", 200);
    Verifier verifier(builtin_verification_profiles(), fast_budget(), false,
                      {{"Stripe", mock.base_url()}});
    CHECK(verifier.verify_batch({}).empty());
    CHECK(mock.hits() == 0);
}

TEST_CASE("batch verification touches only profile paths") {
    testsupport::Rng rng(18);
    MockService mock("SENTINEL-BODY", 200);
    std::map<std::string, std::string> overrides;
    for (const auto& service : testsupport::corpus_services())
        overrides[service] = mock.base_url();
    Verifier verifier(builtin_verification_profiles(), fast_budget(), false, overrides);
    std::vector<CandidateCredential> candidates;
    for (const auto& service : testsupport::corpus_services())
        candidates.push_back(make_candidate(service, rng));
    verifier.verify_batch(candidates);

    const std::vector<std::string> allowed_prefixes = {
        "/",           "/v4/user",     "/client/v4/user/tokens/verify",
        "/user",       "/3.0/",        "/v1/me",
        "/v1/items",   "/v3/scopes",   "/api/auth.test",
        "/v1/charges", "/bot",         "/v2/Services",
        "/common/oauth2/v2.0/token"};
    for (const auto& path : mock.paths()) {
        bool ok = false;
        for (const auto& prefix : allowed_prefixes)
            if (path.rfind(prefix, 0) == 0) ok = true;
        CAPTURE(path);
        CHECK(ok);
    }
}

TEST_CASE("override environment variable names are derived from the service") {
    CHECK(override_env_name("AWS") == "AWS_VERIFY_BASE");
    CHECK(override_env_name("OpenAI") == "OPENAI_VERIFY_BASE");
    CHECK(override_env_name("My Service") == "MY_SERVICE_VERIFY_BASE");
}
