// credscan: scan capture archives for exposed API credentials, verify them
// non-destructively, track exposure lifetimes, and produce redacted
// disclosure artifacts with daily remediation monitoring.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "credscan/builtin_data.hpp"
#include "credscan/capture.hpp"
#include "credscan/chronicle.hpp"
#include "credscan/config.hpp"
#include "credscan/detector.hpp"
#include "credscan/disclosure.hpp"
#include "credscan/localize.hpp"
#include "credscan/pipeline.hpp"
#include "credscan/report.hpp"
#include "credscan/stats.hpp"
#include "credscan/verify.hpp"

namespace {

using namespace credscan;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct ToolContext {
    RunConfig cfg;
    std::vector<DetectorSpec> specs;
    Registry registry;
    SuffixRules rules;
    BundlerFingerprints bundlers;
    std::vector<VerificationProfile> profiles;
    std::string template_text;
    std::set<std::string> opt_out;
};

ToolContext load_context(const RunConfig& cfg) {
    ToolContext ctx{cfg,
                    cfg.detector_spec_file.empty() ? builtin_detector_specs()
                                                   : load_detector_specs(cfg.detector_spec_file),
                    Registry{},
                    SuffixRules{},
                    BundlerFingerprints{},
                    {},
                    {},
                    {}};
    ctx.registry = Registry::build(ctx.specs);
    if (cfg.suffix_rule_file.empty())
        throw ConfigError("suffix_rules is required (set it in the config or pass --suffix-rules)");
    ctx.rules = SuffixRules::from_file(cfg.suffix_rule_file);
    ctx.bundlers = cfg.bundler_file.empty() ? builtin_bundler_fingerprints()
                                            : BundlerFingerprints::from_file(cfg.bundler_file);
    ctx.profiles = cfg.profile_file.empty() ? builtin_verification_profiles()
                                            : load_profiles(cfg.profile_file);
    if (cfg.template_file.empty()) {
        ctx.template_text = default_disclosure_template();
    } else {
        std::ifstream in(cfg.template_file, std::ios::binary);
        if (!in) throw ConfigError("cannot open template file: " + cfg.template_file);
        ctx.template_text.assign(std::istreambuf_iterator<char>(in), {});
    }
    if (!cfg.opt_out_file.empty()) ctx.opt_out = load_opt_out_list(cfg.opt_out_file);

    std::vector<std::string> services;
    for (const auto& p : ctx.profiles) services.push_back(p.service);
    apply_env_overrides(ctx.cfg, services);
    return ctx;
}

std::string registrable_or_host(const SuffixRules& rules, const std::string& url_text) {
    Url url = Url::parse(url_text);
    if (!url.valid) return url_text;
    auto reg = rules.registrable_domain(url.host);
    return reg ? *reg : url.host;
}

struct ScannedArchive {
    std::string path;
    CaptureArchive archive;
    std::vector<Finding> findings;
};

// Archives are parsed and scanned in parallel; results keep input order so
// runs stay deterministic.
std::vector<ScannedArchive> scan_paths(const std::vector<std::string>& paths, const ToolContext& ctx) {
    std::vector<ScannedArchive> out(paths.size());
    const ScanContext scan_ctx{ctx.registry, ctx.rules, ctx.bundlers, ctx.cfg.max_view_depth};

    const size_t workers = std::max<size_t>(
        1, std::min<size_t>(paths.size(), std::thread::hardware_concurrency()));
    std::atomic<size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;

    auto work = [&]() {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= paths.size()) break;
            try {
                out[i].path = paths[i];
                out[i].archive = parse_archive_file(paths[i]);
                out[i].findings = scan_archive(out[i].archive, scan_ctx);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

Verifier make_verifier(const ToolContext& ctx) {
    return Verifier(ctx.profiles, ctx.cfg.budget, ctx.cfg.offline, ctx.cfg.endpoint_overrides);
}

// --- scan --------------------------------------------------------------

int cmd_scan(const ToolContext& ctx, const std::vector<std::string>& archives) {
    StoreLock lock(ctx.cfg.store_path);
    std::map<std::string, size_t> per_service;
    std::vector<ReportRecord> records;
    size_t warnings = 0;

    for (const auto& sa : scan_paths(archives, ctx)) {
        warnings += sa.archive.warnings.size();
        for (const auto& f : sa.findings) {
            records.push_back(to_record(f, sa.archive.crawl_date));
            ++per_service[f.candidate.service];
        }
    }
    ReportStore::append(ctx.cfg.store_path, records);

    std::ostringstream summary;
    summary << "scanned " << archives.size() << " archive(s): " << records.size()
            << " finding(s), " << warnings << " parse warning(s)";
    if (!per_service.empty()) {
        summary << " [";
        bool first = true;
        for (const auto& [service, count] : per_service) {
            if (!first) summary << ", ";
            summary << service << "=" << count;
            first = false;
        }
        summary << "]";
    }
    std::cout << summary.str() << "\n";
    return kExitOk;
}

// --- verify ------------------------------------------------------------

int cmd_verify(const ToolContext& ctx, const std::vector<std::string>& archives, bool force) {
    StoreLock lock(ctx.cfg.store_path);
    std::vector<ReportRecord> latest = ReportStore::read_latest(ctx.cfg.store_path);
    std::map<std::string, ReportRecord*> by_identity;
    for (auto& r : latest) by_identity[r.identity_key()] = &r;

    Verifier verifier = make_verifier(ctx);
    std::vector<CandidateCredential> to_check;
    std::vector<std::pair<ReportRecord, std::string>> pending;  // record + memo key

    for (const auto& sa : scan_paths(archives, ctx)) {
        for (const auto& f : sa.findings) {
            if (!f.candidate.complete) continue;
            ReportRecord probe = to_record(f, sa.archive.crawl_date);
            auto it = by_identity.find(probe.identity_key());
            if (it == by_identity.end()) continue;  // not in the store; scan first
            const std::string& state = it->second->verdict_state;
            if (!force && state != "UNVERIFIED" && state != "INDETERMINATE") continue;
            pending.emplace_back(*it->second, Verifier::memo_key(f.candidate));
            to_check.push_back(f.candidate);
        }
    }

    auto verdicts = verifier.verify_batch(to_check);
    std::vector<ReportRecord> updates;
    std::set<std::string> written;
    std::map<std::string, size_t> outcome_counts;
    for (auto& [record, key] : pending) {
        if (!written.insert(record.identity_key()).second) continue;
        auto it = verdicts.find(key);
        if (it == verdicts.end()) continue;
        ReportRecord update = record;
        update.verdict_state = verdict_label(it->second.state);
        update.verdict_status = it->second.status;
        ++outcome_counts[update.verdict_state];
        updates.push_back(std::move(update));
    }
    ReportStore::append(ctx.cfg.store_path, updates);

    std::cout << "verified " << updates.size() << " finding(s)";
    for (const auto& [state, count] : outcome_counts) std::cout << " " << state << "=" << count;
    std::cout << "\n";
    return kExitOk;
}

// --- track -------------------------------------------------------------

int cmd_track(const std::vector<std::string>& observation_files, std::ostream& out) {
    std::vector<SnapshotObservation> observations;
    for (const auto& path : observation_files) {
        auto batch = load_observations(path);
        observations.insert(observations.end(), batch.begin(), batch.end());
    }
    auto records = match_snapshots(observations);
    out << "# lifetime records\n";
    out << "service\tprefix15\twebsite\tfirstSeen\tlastSeen\tlifetimeMonths\n";
    std::map<std::string, std::vector<double>> by_service;
    std::map<std::string, std::vector<LifetimeRecord>> recs_by_service;
    for (const auto& r : records) {
        out << r.fp.service << "\t" << r.fp.prefix15 << "\t" << r.website << "\t"
            << r.first_seen.str() << "\t" << r.last_seen.str() << "\t" << r.lifetime_months << "\n";
        by_service[r.fp.service].push_back(r.lifetime_months);
        recs_by_service[r.fp.service].push_back(r);
    }

    out << "# per-service lifetime stats (months)\n";
    out << "service\tn\tmean\tsd\tmin\tmax\n";
    char buf[64];
    for (const auto& [service, recs] : recs_by_service) {
        LifetimeStats s = lifetime_stats(recs);
        std::snprintf(buf, sizeof(buf), "%.4f\t%.4f", s.mean, s.sd);
        out << service << "\t" << recs.size() << "\t" << buf << "\t" << s.min << "\t" << s.max
            << "\n";
    }

    if (by_service.size() >= 2) {
        std::vector<std::vector<double>> groups;
        for (const auto& [service, values] : by_service) groups.push_back(values);
        auto kw = kruskal_wallis(groups);
        std::snprintf(buf, sizeof(buf), "H=%.6f dof=%d p=%.6g", kw.h, kw.dof, kw.p_value);
        out << "# kruskal-wallis across services\n" << buf;
        if (kw.degenerate) out << " (degenerate: all lifetimes identical)";
        out << "\n";
    } else {
        out << "# kruskal-wallis requires at least 2 services\n";
    }
    return kExitOk;
}

// --- disclose ------------------------------------------------------------

std::chrono::system_clock::time_point parse_date_or_now(const std::string& date) {
    if (date.empty()) return std::chrono::system_clock::now();
    std::tm tm{};
    if (sscanf(date.c_str(), "%4d-%2d-%2d", &tm.tm_year, &tm.tm_mon, &tm.tm_mday) != 3)
        throw ConfigError("bad --date, expected YYYY-MM-DD");
    tm.tm_year -= 1900;
    tm.tm_mon -= 1;
    return std::chrono::system_clock::from_time_t(timegm(&tm));
}

int cmd_disclose(const ToolContext& ctx, bool include_unverified, const std::string& date,
                 const std::string& integration_responsible_file) {
    std::vector<ReportRecord> latest = ReportStore::read_latest(ctx.cfg.store_path);

    std::set<std::string> integration_responsible;
    if (!integration_responsible_file.empty()) {
        std::ifstream in(integration_responsible_file);
        std::string line;
        while (std::getline(in, line)) {
            auto t = trim(line);
            if (!t.empty() && t.front() != '#') integration_responsible.insert(to_lower(t));
        }
    }

    // route each finding to the responsible party's domain
    struct Routed {
        std::map<std::string, std::vector<FindingLine>> first_party;
        std::map<std::string, std::vector<FindingLine>> third_party;
    } routed;
    for (const auto& r : latest) {
        if (r.verdict_state == "INCOMPLETE") continue;
        if (!include_unverified && r.verdict_state != "VALID") continue;
        FindingLine line{r.service, r.fingerprint + "…[REDACTED]", r.resource_url, r.page_url};
        std::string page_domain = registrable_or_host(ctx.rules, r.page_url);
        if (r.party == "FIRST") {
            routed.first_party[page_domain].push_back(line);
        } else {
            std::string resource_domain = registrable_or_host(ctx.rules, r.resource_url);
            routed.third_party[resource_domain].push_back(line);
            if (integration_responsible.count(to_lower(page_domain)))
                routed.first_party[page_domain].push_back(line);
        }
    }

    Fetcher fetcher;
    if (ctx.cfg.offline) {
        fetcher = [](const std::string&) { return FetchResult{0, ""}; };
    } else {
        fetcher = [&ctx](const std::string& url_text) {
            std::string current = url_text;
            for (int hop = 0; hop <= 3; ++hop) {
                Url url = Url::parse(current);
                if (!url.valid) return FetchResult{0, ""};
                httplib::Client client(url.origin());
                client.set_connection_timeout(0, ctx.cfg.budget.timeout_millis * 1000);
                client.set_follow_location(false);
                auto res = client.Get(url.path_and_query());
                if (!res) return FetchResult{0, ""};
                if (res->status >= 300 && res->status < 400 && res->has_header("Location") &&
                    hop < 3) {
                    current = res->get_header_value("Location");
                    continue;
                }
                return FetchResult{res->status, res->body};
            }
            return FetchResult{0, ""};
        };
    }

    auto created = parse_date_or_now(date);
    std::vector<DisclosureArtifact> artifacts;
    size_t skipped_opt_out = 0;
    auto emit = [&](const std::map<std::string, std::vector<FindingLine>>& groups, Party role) {
        for (const auto& [domain, lines] : groups) {
            if (ctx.opt_out.count(to_lower(domain))) {
                ++skipped_opt_out;
                continue;
            }
            DisclosureTarget target = discover_contacts(domain, fetcher);
            target.party_role = role;
            DisclosureArtifact artifact =
                render_disclosure(target, lines, ctx.template_text, created);
            write_outbox(artifact, ctx.cfg.outbox_path);
            artifacts.push_back(std::move(artifact));
        }
    };
    emit(routed.first_party, Party::First);
    emit(routed.third_party, Party::Third);
    append_followup_manifest(artifacts, ctx.cfg.outbox_path);

    std::cout << "wrote " << artifacts.size() << " disclosure artifact(s) to " << ctx.cfg.outbox_path
              << " (" << skipped_opt_out << " opted-out domain(s) skipped)\n";
    return kExitOk;
}

// --- monitor-diff --------------------------------------------------------

nlohmann::ordered_json remediation_json(const RemediationStatus& st) {
    nlohmann::ordered_json j;
    j["day"] = st.day;
    j["service"] = st.fp.service;
    j["fingerprint"] = st.fp.prefix15;
    j["website"] = st.website;
    j["present"] = st.present;
    if (st.valid.has_value())
        j["valid"] = *st.valid;
    else
        j["valid"] = nullptr;
    j["class"] = remediation_label(st.cls);
    j["reason"] = st.reason;
    return j;
}

int cmd_monitor_diff(const ToolContext& ctx, const std::string& baseline_store,
                     const std::vector<std::string>& todays_archives,
                     const std::vector<std::string>& baseline_archives, int day,
                     const std::string& out_path, bool include_unverified) {
    std::vector<ReportRecord> baseline_records = ReportStore::read_latest(baseline_store);
    std::vector<BaselineEntry> baseline;
    for (const auto& r : baseline_records) {
        if (r.verdict_state == "INCOMPLETE") continue;
        if (!include_unverified && r.verdict_state != "VALID") continue;
        baseline.push_back({{r.service, r.fingerprint}, registrable_or_host(ctx.rules, r.page_url)});
    }
    if (baseline.empty()) throw MissingBaseline("baseline store has no disclosable findings");

    std::set<std::pair<CredentialFingerprint, std::string>> present_today;
    std::set<std::string> reachable;
    std::map<CredentialFingerprint, CandidateCredential> candidates_by_fp;
    for (const auto& sa : scan_paths(todays_archives, ctx)) {
        reachable.insert(registrable_or_host(ctx.rules, sa.archive.page_url));
        for (const auto& f : sa.findings) {
            present_today.insert({f.fp, registrable_or_host(ctx.rules, f.page_url)});
            if (f.candidate.complete) candidates_by_fp.emplace(f.fp, f.candidate);
        }
    }
    // Day-0 captures let the verifier re-check credentials that are gone from
    // today's pages; without them, validity for those is indeterminate.
    if (!baseline_archives.empty()) {
        for (const auto& sa : scan_paths(baseline_archives, ctx))
            for (const auto& f : sa.findings)
                if (f.candidate.complete) candidates_by_fp.emplace(f.fp, f.candidate);
    }

    Verifier verifier = make_verifier(ctx);
    std::vector<CandidateCredential> to_check;
    for (const auto& [fp, cand] : candidates_by_fp) to_check.push_back(cand);
    auto verdicts = verifier.verify_batch(to_check);

    std::map<CredentialFingerprint, std::optional<bool>> validity;
    for (const auto& [fp, cand] : candidates_by_fp) {
        auto it = verdicts.find(Verifier::memo_key(cand));
        if (it == verdicts.end()) continue;
        if (it->second.state == VerdictState::Valid)
            validity[fp] = true;
        else if (it->second.state == VerdictState::Invalid)
            validity[fp] = false;
        else
            validity[fp] = std::nullopt;
    }

    auto statuses = diff_daily(baseline, present_today, validity, reachable, day);

    std::ofstream out(out_path, std::ios::binary | std::ios::app);
    if (!out) throw Error("cannot open remediation store: " + out_path);
    for (const auto& st : statuses) out << remediation_json(st).dump() << "\n";

    // per-service counts for the daily curves
    std::map<std::string, std::pair<size_t, size_t>> per_service;  // present, valid
    for (const auto& st : statuses) {
        auto& [present, valid] = per_service[st.fp.service];
        if (st.present) ++present;
        if (st.valid.has_value() && *st.valid) ++valid;
    }
    std::cout << "day\tservice\tpresent\tvalid\n";
    for (const auto& [service, counts] : per_service)
        std::cout << day << "\t" << service << "\t" << counts.first << "\t" << counts.second << "\n";
    return kExitOk;
}

// --- stats ---------------------------------------------------------------

int cmd_stats(const std::string& remediation_store, const std::string& group_by,
              const std::string& join_file, int day_filter, std::ostream& out) {
    std::ifstream in(remediation_store, std::ios::binary);
    if (!in) throw Error("cannot open remediation store: " + remediation_store);

    std::map<std::string, std::string> join;  // domain -> group label
    if (!join_file.empty()) {
        std::ifstream jf(join_file, std::ios::binary);
        if (!jf) throw Error("cannot open join table: " + join_file);
        std::string line;
        while (std::getline(jf, line)) {
            auto t = trim(line);
            if (t.empty() || t.front() == '#') continue;
            auto tab = t.find('\t');
            if (tab == std::string_view::npos) continue;
            join[to_lower(t.substr(0, tab))] = std::string(trim(t.substr(tab + 1)));
        }
    }

    struct GroupCounts {
        std::map<std::string, long long> classes;
        long long known = 0;  // UNKNOWN excluded from rate denominators
        long long removed = 0;
        long long revoked = 0;
    };
    std::map<std::string, GroupCounts> groups;
    int max_day = 0;
    std::vector<nlohmann::json> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) throw MalformedRecord("bad remediation line");
        max_day = std::max(max_day, j.value("day", 0));
        rows.push_back(std::move(j));
    }
    if (day_filter < 0) day_filter = max_day;

    for (const auto& j : rows) {
        if (j.value("day", 0) != day_filter) continue;
        std::string cls = j.value("class", "UNKNOWN");
        std::string key;
        if (group_by == "service") {
            key = j.value("service", "?");
        } else {
            std::string domain = to_lower(j.value("website", ""));
            auto it = join.find(domain);
            key = it == join.end() ? std::string("(unjoined)") : it->second;
        }
        GroupCounts& g = groups[key];
        ++g.classes[cls];
        if (cls == "UNKNOWN") continue;
        ++g.known;
        if (cls == "REMOVED_ONLY" || cls == "BOTH") ++g.removed;
        if (cls == "REVOKED_ONLY" || cls == "BOTH") ++g.revoked;
    }

    out << "# remediation class shares, day " << day_filter << ", grouped by " << group_by << "\n";
    out << "group\tn\tBOTH\tREMOVED_ONLY\tREVOKED_ONLY\tNEITHER\tUNKNOWN\tremovalRate\trevocationRate\n";
    char buf[64];
    for (const auto& [name, g] : groups) {
        long long total = 0;
        for (const auto& [cls, count] : g.classes) total += count;
        auto cls_count = [&](const char* c) {
            auto it = g.classes.find(c);
            return it == g.classes.end() ? 0ll : it->second;
        };
        out << name << "\t" << total << "\t" << cls_count("BOTH") << "\t"
            << cls_count("REMOVED_ONLY") << "\t" << cls_count("REVOKED_ONLY") << "\t"
            << cls_count("NEITHER") << "\t" << cls_count("UNKNOWN");
        if (g.known > 0) {
            std::snprintf(buf, sizeof(buf), "\t%.4f\t%.4f",
                          static_cast<double>(g.removed) / static_cast<double>(g.known),
                          static_cast<double>(g.revoked) / static_cast<double>(g.known));
            out << buf;
        } else {
            out << "\t-\t-";
        }
        out << "\n";
    }

    out << "# pairwise two-proportion z-tests and Cohen's h\n";
    out << "metric\tgroupA\tgroupB\tz\tp\tcohensH\n";
    std::vector<std::pair<std::string, GroupCounts>> ordered(groups.begin(), groups.end());
    for (size_t a = 0; a < ordered.size(); ++a) {
        for (size_t b = a + 1; b < ordered.size(); ++b) {
            const auto& [name_a, ga] = ordered[a];
            const auto& [name_b, gb] = ordered[b];
            if (ga.known == 0 || gb.known == 0) continue;
            struct Metric {
                const char* name;
                long long sa, sb;
            };
            const Metric metrics[] = {{"removal", ga.removed, gb.removed},
                                      {"revocation", ga.revoked, gb.revoked}};
            for (const auto& m : metrics) {
                EffectStats e = proportion_effect(m.sa, ga.known, m.sb, gb.known);
                std::snprintf(buf, sizeof(buf), "%.4f\t%.6g\t%.4f", e.z_statistic, e.p_value,
                              e.cohens_h);
                out << m.name << "\t" << name_a << "\t" << name_b << "\t" << buf
                    << (e.zero_variance ? "\t(zero variance)" : "") << "\n";
            }
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"credential exposure scanning and disclosure toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string store_override;
    std::string suffix_override;
    bool offline_flag = false;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--store", store_override, "report store path (overrides config)");
    app.add_option("--suffix-rules", suffix_override, "public suffix rule file (overrides config)");
    app.add_flag("--offline", offline_flag, "forbid every endpoint that is not an override");

    auto* scan = app.add_subcommand("scan", "scan capture archives and append findings to the store");
    std::vector<std::string> scan_archives;
    scan->add_option("archives", scan_archives, "capture archive files (.har, optionally gzipped)");

    auto* verify = app.add_subcommand("verify", "verify stored findings by re-scanning their archives");
    std::vector<std::string> verify_archives;
    bool verify_force = false;
    verify->add_option("archives", verify_archives, "the archives the findings came from")->required();
    verify->add_flag("--force", verify_force, "re-check findings that already have a verdict");

    auto* track = app.add_subcommand("track", "compute exposure lifetimes from observation files");
    std::vector<std::string> track_files;
    track->add_option("observations", track_files, "observation files (TSV)")->required();

    auto* disclose = app.add_subcommand("disclose", "write redacted disclosure artifacts to the outbox");
    bool disclose_all = false;
    std::string disclose_date;
    std::string integration_file;
    disclose->add_flag("--all", disclose_all, "include unverified findings (default: VALID only)");
    disclose->add_option("--date", disclose_date, "artifact date YYYY-MM-DD (default: today)");
    disclose->add_option("--integration-responsible", integration_file,
                         "domains whose third-party exposures also notify the first party");

    auto* monitor = app.add_subcommand("monitor-diff", "diff today's captures against the Day-0 baseline");
    std::string baseline_store;
    std::vector<std::string> monitor_archives;
    std::vector<std::string> monitor_baseline_archives;
    int monitor_day = 1;
    std::string monitor_out = "remediation.jsonl";
    bool monitor_all = false;
    monitor->add_option("--baseline", baseline_store, "Day-0 report store")->required();
    monitor->add_option("archives", monitor_archives, "today's capture archives")->required();
    monitor->add_option("--baseline-archives", monitor_baseline_archives,
                        "Day-0 archives, needed to re-verify credentials missing today");
    monitor->add_option("--day", monitor_day, "day index since disclosure (Day 0 = baseline)");
    monitor->add_option("--out", monitor_out, "remediation record store to append to");
    monitor->add_flag("--all", monitor_all, "monitor unverified findings too");

    auto* stats = app.add_subcommand("stats", "remediation class shares, z-tests and Cohen's h");
    std::string stats_store;
    std::string stats_group = "service";
    std::string stats_join;
    int stats_day = -1;
    stats->add_option("--remediation", stats_store, "remediation record store")->required();
    stats->add_option("--group-by", stats_group, "service (default) or join");
    stats->add_option("--join", stats_join, "domain<TAB>group join table for --group-by join");
    stats->add_option("--day", stats_day, "day to analyze (default: latest)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        RunConfig cfg;
        if (!config_path.empty()) cfg = load_config(config_path);
        if (!store_override.empty()) cfg.store_path = store_override;
        if (!suffix_override.empty()) cfg.suffix_rule_file = suffix_override;
        if (offline_flag) cfg.offline = true;

        if (stats->parsed())  // needs no detector/suffix context
            return cmd_stats(stats_store, stats_group, stats_join, stats_day, std::cout);
        if (track->parsed()) return cmd_track(track_files, std::cout);

        ToolContext ctx = load_context(cfg);
        if (scan->parsed()) return cmd_scan(ctx, scan_archives);
        if (verify->parsed()) return cmd_verify(ctx, verify_archives, verify_force);
        if (disclose->parsed())
            return cmd_disclose(ctx, disclose_all, disclose_date, integration_file);
        if (monitor->parsed())
            return cmd_monitor_diff(ctx, baseline_store, monitor_archives,
                                    monitor_baseline_archives, monitor_day, monitor_out,
                                    monitor_all);
        return kExitUsage;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
