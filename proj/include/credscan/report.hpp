#pragma once

// Line-delimited report store. One JSON object per line, append-only;
// verification appends superseding records rather than rewriting, and reads
// resolve latest-wins per finding identity. Records never contain more than
// the 15-character fingerprint of any secret.

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "credscan/util.hpp"

namespace credscan {

struct StoreLocked : Error {
    using Error::Error;
};
struct MalformedRecord : Error {
    using Error::Error;
};

inline constexpr int kReportSchemaVersion = 1;

struct ReportRecord {
    int schema_version = kReportSchemaVersion;
    std::string page_url;
    std::string resource_url;
    std::string service;
    std::string fingerprint;  // prefix-15, never a full secret
    std::string encoding;
    std::string vector;
    std::string content_class;
    bool bundled = false;
    std::string bundler_name;
    std::string party;
    std::string verdict_state = "UNVERIFIED";
    std::optional<int> verdict_status;
    std::string crawl_date;

    std::string to_json_line() const {
        nlohmann::ordered_json j;
        j["schemaVersion"] = schema_version;
        j["pageUrl"] = page_url;
        j["resourceUrl"] = resource_url;
        j["service"] = service;
        j["fingerprint"] = fingerprint;
        j["encoding"] = encoding;
        j["vector"] = vector;
        j["contentClass"] = content_class;
        j["bundled"] = bundled;
        j["bundlerName"] = bundler_name;
        j["party"] = party;
        j["verdictState"] = verdict_state;
        if (verdict_status)
            j["verdictStatus"] = *verdict_status;
        else
            j["verdictStatus"] = nullptr;
        j["crawlDate"] = crawl_date;
        return j.dump();
    }

    static ReportRecord from_json_line(std::string_view line) {
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw MalformedRecord("record line is not a JSON object");
        ReportRecord r;
        r.schema_version = j.value("schemaVersion", kReportSchemaVersion);
        r.page_url = j.value("pageUrl", "");
        r.resource_url = j.value("resourceUrl", "");
        r.service = j.value("service", "");
        r.fingerprint = j.value("fingerprint", "");
        r.encoding = j.value("encoding", "");
        r.vector = j.value("vector", "");
        r.content_class = j.value("contentClass", "");
        r.bundled = j.value("bundled", false);
        r.bundler_name = j.value("bundlerName", "");
        r.party = j.value("party", "");
        r.verdict_state = j.value("verdictState", "UNVERIFIED");
        if (j.contains("verdictStatus") && j["verdictStatus"].is_number_integer())
            r.verdict_status = j["verdictStatus"].get<int>();
        r.crawl_date = j.value("crawlDate", "");
        return r;
    }

    // Everything that identifies the finding; verdict fields excluded.
    std::string identity_key() const {
        std::string key;
        for (const std::string* f : {&page_url, &resource_url, &service, &fingerprint, &encoding,
                                     &vector, &content_class, &party, &crawl_date}) {
            key += *f;
            key += '\x1f';
        }
        key += bundled ? '1' : '0';
        return key;
    }
};

class ReportStore {
public:
    static void append(const std::string& path, const std::vector<ReportRecord>& records) {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        if (!out) throw Error("cannot open store for append: " + path);
        for (const auto& r : records) out << r.to_json_line() << "\n";
    }

    static std::vector<ReportRecord> read_all(const std::string& path) {
        std::vector<ReportRecord> records;
        std::ifstream in(path, std::ios::binary);
        if (!in) return records;
        std::string line;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            try {
                records.push_back(ReportRecord::from_json_line(line));
            } catch (const MalformedRecord& e) {
                throw MalformedRecord(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        return records;
    }

    // Latest record per identity, in first-seen order.
    static std::vector<ReportRecord> read_latest(const std::string& path) {
        std::vector<ReportRecord> all = read_all(path);
        std::map<std::string, size_t> index;
        std::vector<ReportRecord> latest;
        for (auto& r : all) {
            std::string key = r.identity_key();
            auto it = index.find(key);
            if (it == index.end()) {
                index.emplace(std::move(key), latest.size());
                latest.push_back(std::move(r));
            } else {
                latest[it->second] = std::move(r);
            }
        }
        return latest;
    }
};

// One process owns the store per invocation.
class StoreLock {
public:
    explicit StoreLock(const std::string& store_path) : lock_path_(store_path + ".lock") {
        fd_ = ::open(lock_path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
        if (fd_ < 0)
            throw StoreLocked("store is locked by another process (remove " + lock_path_ +
                              " if stale)");
    }

    ~StoreLock() {
        if (fd_ >= 0) {
            ::close(fd_);
            ::unlink(lock_path_.c_str());
        }
    }

    StoreLock(const StoreLock&) = delete;
    StoreLock& operator=(const StoreLock&) = delete;

private:
    std::string lock_path_;
    int fd_ = -1;
};

}  // namespace credscan
