#include "techprox/openalex_client.hpp"

#include <chrono>
#include <cstdio>
#include <map>
#include <set>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "techprox/corpus_ingest.hpp"
#include "techprox/util.hpp"

namespace techprox {

using nlohmann::json;

namespace {

int days_in_month(int year, int month) {
    static const int days[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2 && (year % 4 == 0 && (year % 100 != 0 || year % 400 == 0))) return 29;
    return days[month - 1];
}

std::string url_encode(const std::string& s) {
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out += static_cast<char>(c);
        } else {
            char buf[4];
            std::snprintf(buf, sizeof(buf), "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

std::filesystem::path cache_path_for(const std::filesystem::path& cache_dir,
                                     const std::string& url) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(url)));
    return cache_dir / (std::string(buf) + ".json");
}

/// One GET with retry/backoff. Returns the response body.
std::string fetch_page(httplib::Client& client, const std::string& url, const std::string& cursor,
                       const FetchOptions& options, long& network_requests) {
    int backoff_ms = options.initial_backoff_ms;
    for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(backoff_ms));
            backoff_ms *= 2;
        }
        ++network_requests;
        httplib::Result res = client.Get(url);
        if (!res) continue;  // transport failure: retry
        if (res->status == 200) return res->body;
        if (res->status == 429 || res->status >= 500) continue;  // transient: retry
        throw ConfigError("works request failed with HTTP " + std::to_string(res->status) +
                          " for " + url);
    }
    throw IngestError("retry budget exhausted at cursor '" + cursor + "' for " + url);
}

}  // namespace

std::string works_request_url(const std::string& concept_id, const MonthRange& range,
                              const std::string& contact, int per_page,
                              const std::string& cursor) {
    std::string filter = "concepts.id:" + concept_id +
                         ",from_publication_date:" + format_month(range.start) + "-01" +
                         ",to_publication_date:" + format_month(range.end) + "-" +
                         (days_in_month(range.end.year, range.end.month) < 10 ? "0" : "") +
                         std::to_string(days_in_month(range.end.year, range.end.month));
    return "/works?filter=" + url_encode(filter) + "&per-page=" + std::to_string(per_page) +
           "&cursor=" + url_encode(cursor) + "&mailto=" + url_encode(contact);
}

FetchResult fetch_works(const TechnologyCatalog& catalog, const std::string& endpoint,
                        const std::string& contact, const FetchOptions& options) {
    if (catalog.technologies.empty()) throw ConfigError("technology catalog is empty");
    FetchResult result;
    const bool use_cache = !options.cache_dir.empty();
    if (use_cache) std::filesystem::create_directories(options.cache_dir);

    httplib::Client client(endpoint);
    client.set_connection_timeout(30);
    client.set_read_timeout(60);

    std::set<std::string> seen_ids;
    for (const auto& tech : catalog.technologies) {
        std::string cursor = "*";
        while (!cursor.empty()) {
            const std::string url =
                works_request_url(tech.id, catalog.range, contact, options.per_page, cursor);
            std::string body;
            std::filesystem::path cached = use_cache ? cache_path_for(options.cache_dir, url)
                                                     : std::filesystem::path();
            if (use_cache && std::filesystem::exists(cached)) {
                body = read_file(cached);
                ++result.cache_hits;
            } else {
                body = fetch_page(client, url, cursor, options, result.network_requests);
                if (use_cache) atomic_write_file(cached, body);
            }
            ++result.pages;

            json page;
            try {
                page = json::parse(body);
            } catch (const json::exception& e) {
                throw IngestError("malformed page at cursor '" + cursor + "': " + e.what());
            }
            std::size_t page_results = 0;
            if (page.contains("results")) {
                page_results = page["results"].size();
                for (const auto& item : page["results"]) {
                    RawWork w = raw_work_from_json_line(item.dump(), result.pages);
                    if (seen_ids.insert(w.work_id).second) result.works.push_back(std::move(w));
                }
            }
            cursor.clear();
            // An empty page ends pagination even if a cursor is echoed back.
            if (page_results > 0 && page.contains("meta") &&
                page["meta"].contains("next_cursor") && page["meta"]["next_cursor"].is_string())
                cursor = page["meta"]["next_cursor"].get<std::string>();
        }
    }
    return result;
}

}  // namespace techprox
