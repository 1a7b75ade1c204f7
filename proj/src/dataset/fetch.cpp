#include "tactile/dataset/fetch.hpp"

#include <atomic>
#include <cstdio>
#include <sstream>
#include <thread>

#include "httplib.h"
#include "tactile/dataset/io.hpp"
#include "tactile/dataset/synth.hpp"
#include "tactile/error.hpp"
#include "tactile/kv_config.hpp"

namespace tactile::dataset {

void MapRequest::validate() const {
  if (trim(center).empty()) throw Error(ErrorKind::Config, "map request has an empty center");
  if (zoom < kMinZoom || zoom > kMaxZoom) {
    throw Error(ErrorKind::Config, "map request zoom " + std::to_string(zoom) +
                                       " outside 15..18");
  }
  const int expected = variant == MapVariant::Tactile ? kTactileFetchSize : kSourceSize;
  if (width != expected || height != expected) {
    throw Error(ErrorKind::Config, std::string(variant == MapVariant::Tactile ? "tactile" : "source") +
                                       " requests are " + std::to_string(expected) + "x" +
                                       std::to_string(expected));
  }
  if (variant == MapVariant::Source && !style.empty()) {
    throw Error(ErrorKind::Config, "source requests carry no style");
  }
  for (const auto& r : style) validate_style_rule(r);
}

MapRequest source_request(std::string center, int zoom) {
  MapRequest r;
  r.center = std::move(center);
  r.zoom = zoom;
  return r;
}

MapRequest tactile_request(std::string center, int zoom) {
  MapRequest r;
  r.center = std::move(center);
  r.zoom = zoom;
  r.width = r.height = kTactileFetchSize;
  r.variant = MapVariant::Tactile;
  r.style = default_style_rules();
  return r;
}

std::string url_encode(const std::string& s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      char buf[4];
      std::snprintf(buf, sizeof buf, "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

std::string request_target(const MapRequest& req, const std::string& api_key) {
  req.validate();
  std::string q = std::string(kStaticMapPath) + "?center=" + url_encode(req.center) +
                  "&zoom=" + std::to_string(req.zoom) + "&size=" + std::to_string(req.width) +
                  "x" + std::to_string(req.height) + "&format=png";
  for (const auto& s : compile_style(req.style)) q += "&style=" + url_encode(s);
  if (!api_key.empty()) q += "&key=" + url_encode(api_key);
  return q;
}

// ---------------------------------------------------------------------------

RateLimiter::RateLimiter(double rps)
    : interval_(std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(rps > 0 ? 1.0 / rps : 0.0))),
      next_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  std::chrono::steady_clock::time_point slot;
  {
    std::lock_guard lock(mutex_);
    const auto now = std::chrono::steady_clock::now();
    slot = std::max(now, next_);
    next_ = slot + interval_;
  }
  std::this_thread::sleep_until(slot);
}

struct MapClient::Impl {
  std::string scheme_host_port;
  std::atomic<std::uint64_t> sent{0};
};

MapClient::MapClient(FetchConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>()),
      limiter_(config_.requests_per_second) {
  if (config_.max_attempts < 1) throw Error(ErrorKind::Config, "max_attempts must be >= 1");
  if (config_.concurrency < 1) throw Error(ErrorKind::Config, "concurrency must be >= 1");
  if (config_.base_url.rfind("https://", 0) == 0) {
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    throw Error(ErrorKind::Config, "this build has no HTTPS support for live fetching");
#endif
  } else if (config_.base_url.rfind("http://", 0) != 0) {
    throw Error(ErrorKind::Config, "base url must start with http:// or https://");
  }
  impl_->scheme_host_port = config_.base_url;
}

MapClient::~MapClient() = default;

std::uint64_t MapClient::requests_sent() const noexcept { return impl_->sent.load(); }

std::string MapClient::fetch(const MapRequest& req) {
  const std::string target = request_target(req, config_.api_key);
  auto backoff = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 1; attempt <= config_.max_attempts; ++attempt) {
    limiter_.acquire();
    httplib::Client cli(impl_->scheme_host_port);
    cli.set_connection_timeout(config_.timeout);
    cli.set_read_timeout(config_.timeout);
    impl_->sent.fetch_add(1);
    auto res = cli.Get(target);
    if (res && res->status == 200) return res->body;
    if (res && res->status == 429) {
      throw Error(ErrorKind::Quota, "map service quota exceeded (HTTP 429) for '" + req.center + "'");
    }
    if (res && res->status < 500) {
      throw Error(ErrorKind::Http, "map service answered HTTP " + std::to_string(res->status) +
                                       " for '" + req.center + "'");
    }
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < config_.max_attempts) {
      std::this_thread::sleep_for(backoff);
      backoff = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(backoff.count()) * config_.backoff_factor));
    }
  }
  throw Error(ErrorKind::Http, "fetch of '" + req.center + "' failed after " +
                                   std::to_string(config_.max_attempts) +
                                   " attempts (last: " + last_error + ")");
}

MapPair MapClient::fetch_pair(const std::string& center, int zoom) {
  const MapRequest sreq = source_request(center, zoom);
  const MapRequest treq = tactile_request(center, zoom);
  MapPair pair;
  pair.location = center;
  pair.zoom = zoom;
  pair.source = decode_png(fetch(sreq));
  const RgbImage tactile = decode_png(fetch(treq));
  if (pair.source.width() != kSourceSize || pair.source.height() != kSourceSize) {
    throw Error(ErrorKind::ImageSize, "source map for '" + center + "' is " +
                                          std::to_string(pair.source.width()) + "x" +
                                          std::to_string(pair.source.height()) + ", expected 512x512");
  }
  if (tactile.width() != kTactileFetchSize || tactile.height() != kTactileFetchSize) {
    throw Error(ErrorKind::ImageSize, "tactile map for '" + center + "' is " +
                                          std::to_string(tactile.width()) + "x" +
                                          std::to_string(tactile.height()) + ", expected 572x572");
  }
  pair.tactile = center_crop(tactile, kSourceSize);
  return pair;
}

std::vector<FetchOutcome> fetch_all(MapClient& client, const std::vector<FetchJob>& jobs) {
  std::vector<FetchOutcome> out(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < jobs.size(); i = next.fetch_add(1)) {
      const FetchJob& job = jobs[i];
      try {
        MapPair p = client.fetch_pair(job.center, job.zoom);
        p.id = job.id;
        p.country = job.country;
        p.location_type = job.location_type;
        p.split = job.split;
        out[i].pair = std::move(p);
      } catch (const Error& e) {
        out[i].error = std::string(to_string(e.kind())) + ": " + e.what();
      }
    }
  };
  const int n = std::min<int>(client.config().concurrency, static_cast<int>(jobs.size()));
  std::vector<std::thread> threads;
  for (int t = 0; t < n; ++t) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorKind::Format, "unterminated quote in '" + line + "'");
  fields.push_back(trim(cur));
  return fields;
}

}  // namespace

std::vector<FetchJob> parse_fetch_jobs(const std::string& csv) {
  std::vector<FetchJob> jobs;
  std::istringstream in(csv);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto f = split_csv_line(t);
    if (f.size() < 5 || f.size() > 6) {
      throw Error(ErrorKind::Format, "job line " + std::to_string(lineno) +
                                         ": expected id,center,zoom,country,type[,split]");
    }
    FetchJob j;
    j.id = f[0];
    j.center = f[1];
    j.zoom = parse_int("zoom", f[2]);
    j.country = f[3];
    j.location_type = parse_location_type(f[4]);
    if (f.size() == 6) j.split = parse_split(f[5]);
    jobs.push_back(std::move(j));
  }
  return jobs;
}

// ---------------------------------------------------------------------------

std::string mock_map_png(const std::string& center, int zoom, int width, int height,
                         bool tactile) {
  // FNV-1a of the location selects the synthetic world.
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : center + "@" + std::to_string(zoom)) {
    h ^= c;
    h *= 1099511628211ull;
  }
  const int size = std::max({width, height, kTactileFetchSize});
  SynthProfile profile = default_synth_profile(std::clamp(zoom, kMinZoom, kMaxZoom), size, h);
  const SynthResult r = synth_pair(profile);
  const RgbImage& full = tactile ? r.pair.tactile : r.pair.source;
  return encode_png(crop(full, (size - width) / 2, (size - height) / 2, width, height));
}

struct MockMapServer::Impl {
  Options options;
  httplib::Server server;
  std::thread thread;
  std::atomic<std::uint64_t> count{0};
};

namespace {

bool parse_size(const std::string& s, int& w, int& h) {
  const auto x = s.find('x');
  if (x == std::string::npos) return false;
  try {
    w = std::stoi(s.substr(0, x));
    h = std::stoi(s.substr(x + 1));
  } catch (...) {
    return false;
  }
  return w > 0 && h > 0 && w <= 2048 && h <= 2048;
}

}  // namespace

MockMapServer::MockMapServer(Options options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  Impl* impl = impl_.get();
  impl->server.Get(kStaticMapPath, [impl](const httplib::Request& req, httplib::Response& res) {
    const std::uint64_t n = impl->count.fetch_add(1);
    const Options& o = impl->options;
    if (n < static_cast<std::uint64_t>(o.fail_first)) {
      res.status = 500;
      res.set_content("injected failure", "text/plain");
      return;
    }
    if (o.quota_after >= 0 && n >= static_cast<std::uint64_t>(o.quota_after)) {
      res.status = 429;
      res.set_content("quota exceeded", "text/plain");
      return;
    }
    if (!o.required_key.empty() && req.get_param_value("key") != o.required_key) {
      res.status = 403;
      res.set_content("missing or invalid key", "text/plain");
      return;
    }
    int w = 0, h = 0;
    const std::string center = req.get_param_value("center");
    int zoom = 0;
    try {
      zoom = std::stoi(req.get_param_value("zoom"));
    } catch (...) {
      zoom = 0;
    }
    if (center.empty() || !parse_size(req.get_param_value("size"), w, h) || zoom < kMinZoom ||
        zoom > kMaxZoom) {
      res.status = 400;
      res.set_content("bad request", "text/plain");
      return;
    }
    if (o.force_size) w = h = *o.force_size;
    const bool tactile = req.has_param("style");
    res.set_content(mock_map_png(center, zoom, w, h, tactile), "image/png");
  });
  if (impl->options.port == 0) {
    port_ = impl->server.bind_to_any_port(impl->options.host);
  } else {
    port_ = impl->server.bind_to_port(impl->options.host, impl->options.port)
                ? impl->options.port
                : -1;
  }
  if (port_ <= 0) throw Error(ErrorKind::Io, "mock map server could not bind a port");
  impl->thread = std::thread([impl] { impl->server.listen_after_bind(); });
  impl->server.wait_until_ready();
}

MockMapServer::~MockMapServer() { stop(); }

std::string MockMapServer::base_url() const {
  return "http://" + impl_->options.host + ":" + std::to_string(port_);
}

std::uint64_t MockMapServer::requests() const noexcept { return impl_->count.load(); }

void MockMapServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void MockMapServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace tactile::dataset
