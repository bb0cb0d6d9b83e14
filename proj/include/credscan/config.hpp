#pragma once

// Run configuration: key = value lines, '#' comments. Per-service endpoint
// overrides come from "override.<Service>" keys or <SERVICE>_VERIFY_BASE
// environment variables (environment wins).

#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "credscan/util.hpp"
#include "credscan/verify.hpp"

namespace credscan {

struct ConfigError : Error {
    using Error::Error;
};

struct RunConfig {
    std::string detector_spec_file;  // empty: builtin
    std::string profile_file;        // empty: builtin
    std::string suffix_rule_file;    // required for scanning; never embedded
    std::string bundler_file;        // empty: builtin
    std::string template_file;       // empty: builtin
    std::string opt_out_file;
    bool offline = false;
    RateBudget budget;
    std::string outbox_path = "outbox";
    std::string store_path = "findings.jsonl";
    int max_view_depth = 2;
    std::map<std::string, std::string> endpoint_overrides;  // service -> base URL
};

inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string_view line = trim(raw);
        if (line.empty() || line.front() == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key(trim(line.substr(0, eq)));
        std::string value(trim(line.substr(eq + 1)));

        auto as_int = [&](const std::string& v) {
            auto n = parse_ll(v);
            if (!n) throw ConfigError("config line " + std::to_string(line_no) + ": not a number");
            return static_cast<int>(*n);
        };
        auto as_bool = [&](const std::string& v) {
            if (v == "true" || v == "1" || v == "yes") return true;
            if (v == "false" || v == "0" || v == "no") return false;
            throw ConfigError("config line " + std::to_string(line_no) + ": not a boolean");
        };

        if (key == "detector_specs") cfg.detector_spec_file = value;
        else if (key == "profiles") cfg.profile_file = value;
        else if (key == "suffix_rules") cfg.suffix_rule_file = value;
        else if (key == "bundlers") cfg.bundler_file = value;
        else if (key == "template") cfg.template_file = value;
        else if (key == "opt_out") cfg.opt_out_file = value;
        else if (key == "offline") cfg.offline = as_bool(value);
        else if (key == "outbox") cfg.outbox_path = value;
        else if (key == "store") cfg.store_path = value;
        else if (key == "max_view_depth") cfg.max_view_depth = as_int(value);
        else if (key == "per_service_concurrency") cfg.budget.per_service_concurrency = as_int(value);
        else if (key == "min_interval_millis") cfg.budget.min_interval_millis = as_int(value);
        else if (key == "max_retries") cfg.budget.max_retries = as_int(value);
        else if (key == "backoff_base_millis") cfg.budget.backoff_base_millis = as_int(value);
        else if (key == "timeout_millis") cfg.budget.timeout_millis = as_int(value);
        else if (key.rfind("override.", 0) == 0) cfg.endpoint_overrides[key.substr(9)] = value;
        else throw ConfigError("config line " + std::to_string(line_no) + ": unknown key " + key);
    }
    if (cfg.budget.per_service_concurrency < 1 || cfg.budget.min_interval_millis < 0 ||
        cfg.budget.max_retries < 0 || cfg.budget.timeout_millis < 1)
        throw ConfigError("budget values out of range");
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

// Applies <SERVICE>_VERIFY_BASE environment overrides on top of the config.
inline void apply_env_overrides(RunConfig& cfg, const std::vector<std::string>& services) {
    for (const auto& service : services) {
        const char* v = std::getenv(override_env_name(service).c_str());
        if (v && *v) cfg.endpoint_overrides[service] = v;
    }
}

}  // namespace credscan
