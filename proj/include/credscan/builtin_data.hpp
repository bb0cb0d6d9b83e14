#pragma once

// Built-in copies of the data documents the pipeline needs. The same
// documents ship under data/ for review and per-deployment override; the
// loaders here and the file loaders share one parser, and tests pin the two
// copies against each other.

#include <string_view>

#include "credscan/detector.hpp"
#include "credscan/disclosure.hpp"
#include "credscan/localize.hpp"
#include "credscan/verify.hpp"

namespace credscan {

inline constexpr std::string_view kBuiltinDetectorSpecs = R"json({
  "version": 1,
  "detectors": [
    {
      "service": "Alibaba",
      "parts": [
        {"role": "keyId", "pattern": "LTAI[A-Za-z0-9]{16,20}"},
        {"role": "secret", "pattern": "[A-Za-z0-9]{30}"}
      ],
      "prefilters": ["LTAI"],
      "minEntropy": 3.0,
      "pairingWindow": 4096,
      "secretRole": "secret",
      "fingerprintRole": "keyId"
    },
    {
      "service": "AWS",
      "parts": [
        {"role": "keyId", "pattern": "AKIA[0-9A-Z]{16}"},
        {"role": "secret", "pattern": "[A-Za-z0-9/+]{40}"}
      ],
      "prefilters": ["AKIA"],
      "minEntropy": 3.0,
      "pairingWindow": 4096,
      "secretRole": "secret",
      "fingerprintRole": "keyId"
    },
    {
      "service": "Azure",
      "parts": [
        {"role": "keyId", "pattern": "[0-9a-fA-F]{8}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{4}-[0-9a-fA-F]{12}"},
        {"role": "secret", "pattern": "[A-Za-z0-9_~.-]{3}8Q~[A-Za-z0-9_~.-]{31,37}"}
      ],
      "prefilters": ["8Q~"],
      "minEntropy": 3.0,
      "pairingWindow": 4096,
      "secretRole": "secret",
      "fingerprintRole": "keyId"
    },
    {
      "service": "Bitly",
      "parts": [
        {"role": "token", "pattern": "[a-f0-9]{40}"}
      ],
      "prefilters": ["bitly"],
      "minEntropy": 3.0
    },
    {
      "service": "Cloudflare",
      "parts": [
        {"role": "token", "pattern": "[A-Za-z0-9_-]{40}"}
      ],
      "prefilters": ["cloudflare"],
      "minEntropy": 3.0
    },
    {
      "service": "GitHub",
      "parts": [
        {"role": "token", "pattern": "gh[po]_[A-Za-z0-9]{36}"}
      ],
      "prefilters": ["ghp_", "gho_"],
      "minEntropy": 3.0
    },
    {
      "service": "Mailchimp",
      "parts": [
        {"role": "token", "pattern": "[0-9a-f]{32}-us[0-9]{1,2}"}
      ],
      "prefilters": ["-us"],
      "minEntropy": 3.0
    },
    {
      "service": "OpenAI",
      "parts": [
        {"role": "token", "pattern": "sk-[A-Za-z0-9]{20}T3BlbkFJ[A-Za-z0-9]{20}"}
      ],
      "prefilters": ["T3BlbkFJ"],
      "minEntropy": 3.0
    },
    {
      "service": "Razorpay",
      "parts": [
        {"role": "keyId", "pattern": "rzp_(live|test)_[A-Za-z0-9]{14}"},
        {"role": "secret", "pattern": "[A-Za-z0-9]{24}"}
      ],
      "prefilters": ["rzp_"],
      "minEntropy": 3.0,
      "pairingWindow": 4096,
      "secretRole": "secret",
      "fingerprintRole": "keyId"
    },
    {
      "service": "SendGrid",
      "parts": [
        {"role": "token", "pattern": "SG\\.[A-Za-z0-9_-]{22}\\.[A-Za-z0-9_-]{43}"}
      ],
      "prefilters": ["SG."],
      "minEntropy": 3.0
    },
    {
      "service": "Slack",
      "parts": [
        {"role": "token", "pattern": "xox[baprs]-[0-9A-Za-z-]{10,72}"}
      ],
      "prefilters": ["xox"],
      "minEntropy": 3.0
    },
    {
      "service": "Stripe",
      "parts": [
        {"role": "token", "pattern": "sk_live_[A-Za-z0-9]{24,99}"}
      ],
      "prefilters": ["sk_live_"],
      "minEntropy": 3.0
    },
    {
      "service": "Telegram",
      "parts": [
        {"role": "token", "pattern": "[0-9]{8,10}:[A-Za-z0-9_-]{35}"}
      ],
      "prefilters": [],
      "minEntropy": null
    },
    {
      "service": "Twilio",
      "parts": [
        {"role": "keyId", "pattern": "AC[0-9a-f]{32}"},
        {"role": "secret", "pattern": "[0-9a-f]{32}"}
      ],
      "prefilters": ["AC"],
      "minEntropy": 3.0,
      "pairingWindow": 4096,
      "secretRole": "secret",
      "fingerprintRole": "keyId"
    }
  ]
}
)json";

inline constexpr std::string_view kBuiltinProfiles = R"json({
  "version": 1,
  "profiles": [
    {
      "service": "Alibaba",
      "method": "GET",
      "endpoint": "https://ecs.aliyuncs.com/",
      "auth": "SIGNED_REQUEST",
      "success": [200],
      "invalid": [400, 401, 404]
    },
    {
      "service": "AWS",
      "method": "GET",
      "endpoint": "https://sts.amazonaws.com/?Action=GetCallerIdentity&Version=2011-06-15",
      "auth": "SIGNED_REQUEST",
      "success": [200],
      "invalid": [403]
    },
    {
      "service": "Azure",
      "method": "POST",
      "endpoint": "https://login.microsoftonline.com/common/oauth2/v2.0/token",
      "auth": "BASIC_PAIR",
      "body": "grant_type=client_credentials&client_id={keyId}&client_secret={secret}&scope=https%3A%2F%2Fgraph.microsoft.com%2F.default",
      "contentType": "application/x-www-form-urlencoded",
      "success": [200],
      "invalid": [400, 401]
    },
    {
      "service": "Bitly",
      "method": "GET",
      "endpoint": "https://api-ssl.bitly.com/v4/user",
      "auth": "BEARER_HEADER",
      "success": [200],
      "invalid": [401, 403]
    },
    {
      "service": "Cloudflare",
      "method": "GET",
      "endpoint": "https://api.cloudflare.com/client/v4/user/tokens/verify",
      "auth": "BEARER_HEADER",
      "success": [200],
      "invalid": [400, 401]
    },
    {
      "service": "GitHub",
      "method": "GET",
      "endpoint": "https://api.github.com/user",
      "auth": "BEARER_HEADER",
      "success": [200],
      "invalid": [401]
    },
    {
      "service": "Mailchimp",
      "method": "GET",
      "endpoint": "https://{dc}.api.mailchimp.com/3.0/",
      "auth": "BASIC_PAIR",
      "basicUser": "anystring",
      "success": [200],
      "invalid": [401]
    },
    {
      "service": "OpenAI",
      "method": "GET",
      "endpoint": "https://api.openai.com/v1/me",
      "auth": "BEARER_HEADER",
      "success": [200],
      "invalid": [401]
    },
    {
      "service": "Razorpay",
      "method": "GET",
      "endpoint": "https://api.razorpay.com/v1/items?count=1",
      "auth": "BASIC_PAIR",
      "success": [200],
      "invalid": [401]
    },
    {
      "service": "SendGrid",
      "method": "GET",
      "endpoint": "https://api.sendgrid.com/v3/scopes",
      "auth": "BEARER_HEADER",
      "success": [200],
      "invalid": [401, 403]
    },
    {
      "service": "Slack",
      "method": "POST",
      "endpoint": "https://slack.com/api/auth.test",
      "auth": "BEARER_HEADER",
      "success": [200],
      "invalid": [401, 403]
    },
    {
      "service": "Stripe",
      "method": "GET",
      "endpoint": "https://api.stripe.com/v1/charges",
      "auth": "BEARER_HEADER",
      "success": [200],
      "invalid": [401]
    },
    {
      "service": "Telegram",
      "method": "GET",
      "endpoint": "https://api.telegram.org/bot{TOKEN}/getMe",
      "auth": "URL_EMBEDDED",
      "success": [200],
      "invalid": [401, 404]
    },
    {
      "service": "Twilio",
      "method": "GET",
      "endpoint": "https://verify.twilio.com/v2/Services",
      "auth": "BASIC_PAIR",
      "success": [200],
      "invalid": [401]
    }
  ]
}
)json";

inline constexpr std::string_view kBuiltinBundlers =
    "# bundler fingerprints: name<TAB>literal-marker, first match wins\n"
    "webpack\t__webpack_require__\n"
    "rollup\tROLLUP_ASSET_URL_\n"
    "parcel\tparcelRequire\n"
    "vite\t__vite__mapDeps\n"
    "browserify\t_dereq_\n";

inline constexpr std::string_view kBuiltinDisclosureTemplate =
    R"(Subject: Exposed API credentials on {{domain}}

Hello,

During an automated review of publicly reachable web resources we found
API credentials exposed on pages of {{domain}}. Anyone who loads these
pages can read the credentials, so they should be treated as compromised.

Exposed credentials ({{finding_count}}):

{{findings}}
Each line lists the service, a partial credential prefix (truncated for
safety; the full value is not included in this message), the resource that
exposes it, and the page where it was observed.

Suggested remediation:
  1. Remove the credential from the affected resource and redeploy.
  2. Revoke or rotate the credential with the issuing service. Removal
     alone does not invalidate copies that were already retrieved.

To help us understand how such exposures happen, we would appreciate short
answers to two questions:
  1. What caused the credential to be included in a public resource?
  2. Were you aware of this exposure before receiving this message?

We will re-check the affected pages and follow up with a reminder in one
week ({{follow_up_date}}).

Sent {{created_date}}.
)";

inline std::vector<DetectorSpec> builtin_detector_specs() {
    return parse_detector_specs_text(kBuiltinDetectorSpecs);
}

inline std::vector<VerificationProfile> builtin_verification_profiles() {
    return parse_profiles_text(kBuiltinProfiles);
}

inline BundlerFingerprints builtin_bundler_fingerprints() {
    return BundlerFingerprints::from_string(kBuiltinBundlers);
}

inline const char* default_disclosure_template() {
    return kBuiltinDisclosureTemplate.data();
}

}  // namespace credscan
