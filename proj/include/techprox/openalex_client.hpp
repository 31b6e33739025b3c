#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "techprox/records.hpp"

namespace techprox {

struct FetchOptions {
    std::filesystem::path cache_dir;  // empty -> caching disabled
    int per_page = 200;
    int max_retries = 5;
    int initial_backoff_ms = 250;  // doubled per retry
};

struct FetchResult {
    std::vector<RawWork> works;   // merged by work_id across concepts
    long network_requests = 0;    // HTTP requests actually sent
    long cache_hits = 0;
    long pages = 0;
};

/// Builds the works request URL (path + query) for one concept page. Exposed
/// so tests can pin the request format the cache is keyed on.
std::string works_request_url(const std::string& concept_id, const MonthRange& range,
                              const std::string& contact, int per_page, const std::string& cursor);

/// Fetches every work related to any catalog concept within the catalog's
/// date range, one cursor-paginated query per concept, merging results by
/// work_id (first occurrence wins).
///
/// endpoint is a scheme://host[:port] base, e.g. "https://api.openalex.org".
/// Responses are cached on disk keyed by request URL; cached pages are served
/// without network access, so a re-run with a warm cache is fully offline.
/// HTTP 429 and 5xx responses and transport failures are retried with bounded
/// exponential backoff; any other 4xx is a fatal ConfigError; an exhausted
/// retry budget raises IngestError naming the cursor.
FetchResult fetch_works(const TechnologyCatalog& catalog, const std::string& endpoint,
                        const std::string& contact, const FetchOptions& options = {});

}  // namespace techprox
