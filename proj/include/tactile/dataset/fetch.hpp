#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "tactile/dataset/style.hpp"
#include "tactile/map_pair.hpp"

namespace tactile::dataset {

inline constexpr int kSourceSize = 512;
inline constexpr int kTactileFetchSize = 572;
inline constexpr const char* kApiKeyEnv = "TACTILE_MAPS_API_KEY";
inline constexpr const char* kStaticMapPath = "/maps/api/staticmap";

enum class MapVariant { Source, Tactile };

struct MapRequest {
  std::string center;
  int zoom = 16;
  int width = kSourceSize;
  int height = kSourceSize;
  MapVariant variant = MapVariant::Source;
  std::vector<StyleRule> style;

  void validate() const;
};

MapRequest source_request(std::string center, int zoom);
// Carries the default tactile style and the larger fetch size.
MapRequest tactile_request(std::string center, int zoom);

std::string url_encode(const std::string& s);
// Path + query for the static-map endpoint, including the key when given.
std::string request_target(const MapRequest& req, const std::string& api_key);

// Spaces requests at least 1/rate seconds apart across all threads.
class RateLimiter {
 public:
  explicit RateLimiter(double requests_per_second);
  void acquire();

 private:
  std::mutex mutex_;
  std::chrono::steady_clock::duration interval_;
  std::chrono::steady_clock::time_point next_;
};

struct FetchConfig {
  std::string base_url = "https://maps.googleapis.com";
  std::string api_key;
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{500};
  double backoff_factor = 2.0;
  double requests_per_second = 10.0;
  int concurrency = 4;
  std::chrono::seconds timeout{30};
};

// Blocking static-map client with retry and rate limiting. Thread safe.
class MapClient {
 public:
  explicit MapClient(FetchConfig config);
  ~MapClient();

  // PNG bytes of one map. 5xx and transport failures are retried with
  // exponential backoff; 429 raises Quota; other statuses raise Http.
  std::string fetch(const MapRequest& req);
  // Source plus center-cropped tactile view of one location.
  MapPair fetch_pair(const std::string& center, int zoom);

  std::uint64_t requests_sent() const noexcept;
  const FetchConfig& config() const noexcept { return config_; }

 private:
  struct Impl;
  FetchConfig config_;
  std::unique_ptr<Impl> impl_;
  RateLimiter limiter_;
};

struct FetchJob {
  std::string id;
  std::string center;
  int zoom = 16;
  std::string country;
  LocationType location_type = LocationType::City;
  Split split = Split::Unassigned;
};

struct FetchOutcome {
  std::optional<MapPair> pair;
  std::string error;  // "<kind>: message" when the pair failed
};

// Runs jobs on config.concurrency worker threads; results follow job order.
std::vector<FetchOutcome> fetch_all(MapClient& client, const std::vector<FetchJob>& jobs);

// Parses "id,center,zoom,country,type[,split]" lines (# comments allowed);
// the center may be quoted when it contains commas.
std::vector<FetchJob> parse_fetch_jobs(const std::string& csv);

// Local stand-in for the static-map service. Serves synthetic maps that are
// a deterministic function of (center, zoom): requests without a style get
// the source view, styled requests get the tactile view, so a fetched pair is
// aligned after cropping. Faults can be injected for client tests.
class MockMapServer {
 public:
  struct Options {
    std::string host = "127.0.0.1";
    int port = 0;  // 0 picks a free port
    int fail_first = 0;           // answer 500 to the first n requests
    int quota_after = -1;         // answer 429 once n requests were served
    std::optional<int> force_size;  // ignore the requested size
    std::string required_key;     // reject requests without this key (403)
  };

  explicit MockMapServer(Options options);
  ~MockMapServer();
  MockMapServer(const MockMapServer&) = delete;
  MockMapServer& operator=(const MockMapServer&) = delete;

  int port() const noexcept { return port_; }
  std::string base_url() const;
  std::uint64_t requests() const noexcept;
  // Blocks the calling thread until stop() (used by the standalone tool).
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
  int port_ = 0;
};

// The image the mock server returns for a request.
std::string mock_map_png(const std::string& center, int zoom, int width, int height,
                         bool tactile);

}  // namespace tactile::dataset
