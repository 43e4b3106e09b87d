#include "tourrec/service.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <regex>

#include "tourrec/error.hpp"

namespace tourrec {

namespace {

HttpResponse reply(int status, const json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_reply(int status, const std::string& message) {
  return reply(status, {{"error", message}, {"status", status}});
}

json parse_body(const HttpRequest& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("request body is not JSON: ") + e.what(), 0);
  }
}

std::optional<std::string> query(const HttpRequest& req, const std::string& key) {
  auto it = req.query.find(key);
  if (it == req.query.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

double query_double(const HttpRequest& req, const std::string& key, double fallback) {
  auto v = query(req, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const double x = std::stod(*v, &used);
    if (used != v->size()) throw std::invalid_argument(key);
    return x;
  } catch (const std::exception&) {
    throw ParseError("query parameter '" + key + "' is not a number", 0);
  }
}

long long query_int(const HttpRequest& req, const std::string& key, long long fallback) {
  auto v = query(req, key);
  if (!v) return fallback;
  try {
    std::size_t used = 0;
    const long long x = std::stoll(*v, &used);
    if (used != v->size()) throw std::invalid_argument(key);
    return x;
  } catch (const std::exception&) {
    throw ParseError("query parameter '" + key + "' is not an integer", 0);
  }
}

struct Page {
  std::size_t offset = 0;
  std::size_t limit = 0;
};

Page page_of(const HttpRequest& req, const ServiceConfig& cfg) {
  const long long offset = query_int(req, "offset", 0);
  const long long limit = query_int(req, "limit", static_cast<long long>(cfg.default_page_limit));
  if (offset < 0 || limit < 1 || static_cast<std::size_t>(limit) > cfg.max_page_limit) {
    throw InvariantError("offset must be >= 0 and limit in [1, " + std::to_string(cfg.max_page_limit) + "]");
  }
  return {static_cast<std::size_t>(offset), static_cast<std::size_t>(limit)};
}

json paged(const json& all, const Page& p) {
  json items = json::array();
  for (std::size_t i = p.offset; i < all.size() && items.size() < p.limit; ++i) items.push_back(all[i]);
  return {{"items", items}, {"total", all.size()}, {"offset", p.offset}, {"limit", p.limit}};
}

json weights_json(const MemberWeights& w) {
  json out = json::object();
  for (std::size_t i = 0; i < kMemberCount; ++i) out[to_string(static_cast<Member>(i))] = w[i];
  return out;
}

}  // namespace

Service::Service(Engine& engine, ServiceConfig cfg, const VectorTable* vectors)
    : engine_(engine), cfg_(std::move(cfg)), vectors_(vectors) {}

Timestamp Service::now() const {
  if (cfg_.deterministic) return static_cast<Timestamp>(engine_.high_water() + 1);
  return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

HttpResponse Service::handle(const HttpRequest& req) {
  ++requests_;
  if (!cfg_.api_key.empty()) {
    bool ok = false;
    for (const auto& [name, value] : req.headers) {
      if (name.size() == 9 && std::equal(name.begin(), name.end(), "x-api-key", [](char a, char b) {
            return std::tolower(static_cast<unsigned char>(a)) == b;
          })) {
        ok = value == cfg_.api_key;
      }
    }
    if (!ok) return error_reply(401, "missing or wrong API key");
  }
  try {
    return dispatch(req);
  } catch (const ParseError& e) {
    return error_reply(400, e.what());
  } catch (const NotFoundError& e) {
    return error_reply(404, e.what());
  } catch (const ConflictError& e) {
    return error_reply(409, e.what());
  } catch (const InvariantError& e) {
    return error_reply(422, e.what());
  } catch (const DimensionError& e) {
    return error_reply(422, e.what());
  } catch (const json::exception& e) {
    return error_reply(400, e.what());
  } catch (const std::exception& e) {
    return error_reply(500, e.what());
  }
}

HttpResponse Service::dispatch(const HttpRequest& req) {
  static const std::regex kUserPath(R"(^/users/(-?\d+)(/[a-z]+)?$)");
  const std::string& m = req.method;
  const std::string& p = req.path;

  if (p == "/users") {
    if (m == "POST") return create_user(req);
    if (m == "GET") return list_users(req);
    return error_reply(405, "method not allowed");
  }
  std::smatch match;
  if (std::regex_match(p, match, kUserPath)) {
    UserId id = 0;
    try {
      id = std::stoll(match[1].str());
    } catch (const std::exception&) {
      throw ParseError("malformed user id", 0);
    }
    const std::string sub = match[2].str();
    if (sub == "/preferences" && m == "PUT") return put_preferences(id, req);
    if (sub == "/recommendations" && m == "GET") return get_recommendations(id, req);
    if (sub == "/feedback" && m == "POST") return post_feedback(id, req);
    if (sub == "/ratings" && m == "POST") return post_rating(id, req);
    if ((sub == "/profile" || sub.empty()) && m == "GET") return get_profile(id);
    if (sub == "/preferences" || sub == "/recommendations" || sub == "/feedback" || sub == "/ratings" ||
        sub == "/profile" || sub.empty()) {
      return error_reply(405, "method not allowed");
    }
    return error_reply(404, "no such route");
  }
  if (p == "/admin/items") {
    if (m == "POST") return add_item(req);
    if (m == "GET") return list_items(req);
    return error_reply(405, "method not allowed");
  }
  if (p == "/admin/items/bin") return m == "POST" ? bin_item_preview(req) : error_reply(405, "method not allowed");
  if (p == "/admin/phase") return m == "GET" ? get_phase() : error_reply(405, "method not allowed");
  if (p == "/admin/metrics") return m == "GET" ? get_metrics() : error_reply(405, "method not allowed");
  return error_reply(404, "no such route");
}

HttpResponse Service::create_user(const HttpRequest& req) {
  json body = parse_body(req);
  if (!body.is_object()) throw ParseError("user body must be a JSON object", 0);
  std::unique_lock lock(mutex_);
  if (!body.contains("id")) body["id"] = engine_.next_user_id();
  const UserRecord user = user_from_json(body);
  const Event e = engine_.add_user(user, now());
  return reply(201, {{"id", user.id}, {"seq", e.seq}});
}

HttpResponse Service::list_users(const HttpRequest& req) {
  const Page page = page_of(req, cfg_);
  std::shared_lock lock(mutex_);
  json all = json::array();
  for (const auto& [id, u] : engine_.users()) all.push_back(user_to_json(u));
  return reply(200, paged(all, page));
}

HttpResponse Service::put_preferences(UserId id, const HttpRequest& req) {
  const json body = parse_body(req);
  std::unique_lock lock(mutex_);
  std::vector<double> hl;
  const auto& labels = engine_.matrices().hl_labels;
  if (body.contains("hl")) {
    hl = body.at("hl").get<std::vector<double>>();
  } else if (body.contains("classes")) {
    hl.assign(labels.size(), 0.0);
    for (const auto& c : body.at("classes")) {
      const auto label = c.get<std::string>();
      auto it = std::find(labels.begin(), labels.end(), label);
      if (it == labels.end()) throw InvariantError("unknown high-level class '" + label + "'");
      hl[static_cast<std::size_t>(it - labels.begin())] = 1.0;
    }
  } else {
    throw ParseError("preferences body needs \"hl\" or \"classes\"", 0);
  }
  const Event e = engine_.set_preferences(id, hl, now());
  json out = engine_.profile(id);
  out["seq"] = e.seq;
  return reply(200, out);
}

HttpResponse Service::get_recommendations(UserId id, const HttpRequest& req) {
  const long long n = query_int(req, "n", static_cast<long long>(engine_.config().default_n));
  if (n < 1 || n > 1000) throw InvariantError("n must lie in [1, 1000]");
  ContextState ctx;
  if (auto w = query(req, "weather")) ctx.weather = weather_from_string(*w);
  const bool has_lat = query(req, "lat").has_value();
  const bool has_lon = query(req, "lon").has_value();
  if (has_lat != has_lon) throw ParseError("lat and lon must be given together", 0);
  if (has_lat) {
    GeoPoint hotel{query_double(req, "lat", 0.0), query_double(req, "lon", 0.0)};
    validate_point(hotel);
    ctx.hotel = hotel;
  }
  ctx.radius_km = query_double(req, "radius_km", kDefaultRadiusKm);
  if (!(ctx.radius_km > 0.0)) throw InvariantError("radius_km must be positive");
  std::shared_lock lock(mutex_);
  ctx.now = query_int(req, "now", now());
  const RecList list = engine_.recommend(id, static_cast<std::size_t>(n), ctx);
  json out = reclist_to_json(list);
  out["user"] = id;
  out["phase"] = engine_.phase();
  out["weights"] = weights_json(engine_.weights());
  return reply(200, out);
}

HttpResponse Service::post_feedback(UserId id, const HttpRequest& req) {
  json body = parse_body(req);
  if (!body.is_object()) throw ParseError("feedback body must be a JSON object", 0);
  std::unique_lock lock(mutex_);
  body["user"] = id;
  if (!body.contains("timestamp")) body["timestamp"] = now();
  const FeedbackEvent f = feedback_from_json(body);
  const Event e = engine_.add_feedback(f);
  return reply(200, {{"seq", e.seq}, {"user", id}, {"item", f.item}, {"kind", to_string(f.kind)}});
}

HttpResponse Service::post_rating(UserId id, const HttpRequest& req) {
  json body = parse_body(req);
  if (!body.is_object()) throw ParseError("rating body must be a JSON object", 0);
  std::unique_lock lock(mutex_);
  body["user"] = id;
  if (!body.contains("timestamp")) body["timestamp"] = now();
  const RatingEvent r = rating_from_json(body);
  const Event e = engine_.add_rating(r);
  return reply(201, {{"seq", e.seq}, {"user", id}, {"item", r.item}, {"rating", r.rating}});
}

HttpResponse Service::get_profile(UserId id) {
  std::shared_lock lock(mutex_);
  return reply(200, engine_.profile(id));
}

HttpResponse Service::add_item(const HttpRequest& req) {
  const json body = parse_body(req);
  if (!body.is_object()) throw ParseError("item body must be a JSON object", 0);
  const json& item_json = body.contains("item") ? body.at("item") : body;
  std::unique_lock lock(mutex_);
  json payload = item_json;
  if (!payload.contains("id")) {
    const auto& order = engine_.graph().item_order();
    payload["id"] = order.empty() ? 0 : *std::max_element(order.begin(), order.end()) + 1;
  }
  const ItemRecord item = item_from_json(payload);
  std::vector<ItemLink> links;
  if (body.contains("links")) {
    for (const auto& l : body.at("links")) {
      links.push_back({item.id, l.at("class").get<std::string>(), l.at("score").get<double>()});
    }
  }
  json diag = nullptr;
  if (item.categories.empty() && links.empty() && vectors_ != nullptr) {
    BinningConfig bc;
    bc.threshold = engine_.config().binning_threshold;
    const BinResult r = bin_item(item, engine_.graph(), *vectors_, bc);
    for (auto l : r.links) {
      l.score = std::clamp(l.score, 0.0, 1.0);
      links.push_back(l);
    }
    if (!r.diagnostic.empty()) diag = r.diagnostic;
  }
  const Event e = engine_.add_item(item, links, now());
  json linked = json::array();
  for (const auto& l : links) linked.push_back({{"class", l.ll_class}, {"score", l.score}});
  return reply(201, {{"id", item.id}, {"seq", e.seq}, {"links", linked}, {"diagnostic", diag}});
}

HttpResponse Service::bin_item_preview(const HttpRequest& req) {
  const json body = parse_body(req);
  if (vectors_ == nullptr) throw InvariantError("no word-vector table is loaded");
  json item_json = body.contains("item") ? body.at("item") : body;
  if (!item_json.contains("id")) item_json["id"] = -1;
  const ItemRecord item = item_from_json(item_json);
  std::shared_lock lock(mutex_);
  BinningConfig bc;
  bc.threshold = engine_.config().binning_threshold;
  const BinResult r = bin_item(item, engine_.graph(), *vectors_, bc);
  json links = json::array();
  for (const auto& l : r.links) links.push_back({{"class", l.ll_class}, {"score", l.score}});
  json scores = json::object();
  for (const auto& [label, s] : r.scores) scores[label] = s;
  return reply(200, {{"links", links}, {"scores", scores}, {"oov", r.oov}, {"diagnostic", r.diagnostic}});
}

HttpResponse Service::list_items(const HttpRequest& req) {
  const Page page = page_of(req, cfg_);
  std::shared_lock lock(mutex_);
  json all = json::array();
  for (ItemId id : engine_.graph().item_order()) {
    json item = item_to_json(engine_.graph().item(id));
    item["linked_classes"] = engine_.item_classes().at(id);
    all.push_back(item);
  }
  return reply(200, paged(all, page));
}

HttpResponse Service::get_phase() {
  std::shared_lock lock(mutex_);
  const MaturityStats s = engine_.stats();
  return reply(200, {{"phase", engine_.phase()},
                     {"users", s.users},
                     {"ratings", s.ratings},
                     {"items", s.items},
                     {"density", s.density()},
                     {"weights", weights_json(engine_.weights())},
                     {"config", phase_config_to_json(engine_.config().phase)}});
}

HttpResponse Service::get_metrics() {
  std::shared_lock lock(mutex_);
  const MaturityStats s = engine_.stats();
  json demog = nullptr;
  if (const auto* d = engine_.demographic()) demog = {{"clusters", d->clusters().k}, {"users", d->user_count()}};
  json collab = nullptr;
  if (const auto* f = engine_.ffm()) collab = {{"features", f->n_features()}, {"fields", f->n_fields()}, {"d", f->d()}};
  return reply(200, {{"events", engine_.high_water()},
                     {"requests", request_count()},
                     {"phase", engine_.phase()},
                     {"users", s.users},
                     {"ratings", s.ratings},
                     {"items", s.items},
                     {"density", s.density()},
                     {"demographic_model", demog},
                     {"collaborative_model", collab}});
}

void run_http_server(Service& service, const std::string& host, int port) {
  httplib::Server server;
  auto bridge = [&service](const httplib::Request& in, httplib::Response& out) {
    HttpRequest req;
    req.method = in.method;
    req.path = in.path;
    for (const auto& [k, v] : in.params) req.query[k] = v;
    for (const auto& [k, v] : in.headers) req.headers[k] = v;
    req.body = in.body;
    const HttpResponse res = service.handle(req);
    out.status = res.status;
    out.set_content(res.body, res.content_type);
  };
  const std::string any = R"(/.*)";
  server.Get(any, bridge);
  server.Post(any, bridge);
  server.Put(any, bridge);
  server.Delete(any, bridge);
  if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace tourrec
