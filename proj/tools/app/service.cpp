#include "service.hpp"

#include <sstream>

#include <httplib.h>

#include "netsig/error.hpp"

namespace netsig::app {

namespace {

Response error_response(int status, const std::string& code, const std::string& message) {
  return {status, Json{{"error", code}, {"message", message}}};
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::StaleGeneration: return 409;
    case ErrorCode::UnknownSignature:
    case ErrorCode::UnknownProperty: return 404;
    case ErrorCode::ParseError:
    case ErrorCode::InvalidAction:
    case ErrorCode::KindMismatch:
    case ErrorCode::InvalidConfig: return 400;
    default: return 500;
  }
}

std::vector<std::string> source_lines(const CorpusBundle& bundle, const Property& p) {
  auto dev = bundle.snapshot.devices.find(p.device);
  if (dev == bundle.snapshot.devices.end()) return {};
  for (const auto& st : dev->second.stanzas) {
    if (st.name == p.name && property_kind_of(st.kind) == p.kind) {
      std::vector<std::string> lines;
      std::istringstream in(st.raw_text);
      for (std::string line; std::getline(in, line);) lines.push_back(line);
      return lines;
    }
  }
  return {};
}

}  // namespace

Service::Service(State initial, std::optional<std::filesystem::path> state_dir)
    : state_(std::make_shared<const State>(std::move(initial))), state_dir_(std::move(state_dir)) {}

std::shared_ptr<const State> Service::state() const {
  std::shared_lock lock(pointer_mutex_);
  return state_;
}

Response Service::generation() const {
  auto s = state();
  return {200, Json{{"generation", s->generation()}, {"base_generation", s->base.generation},
                    {"retune_actions", s->log.actions.size()}}};
}

Response Service::signatures() const {
  auto s = state();
  Json rows = Json::array();
  for (const auto& r : signature_report(s->current)) rows.push_back(to_json(r));
  return {200, Json{{"generation", s->generation()}, {"report", rows}, {"signature_set", to_json(s->current)}}};
}

Response Service::findings(const std::string& rank_name, std::size_t offset, std::size_t limit) const {
  RankMode mode;
  if (rank_name.empty() || rank_name == "severity") {
    mode = RankMode::Severity;
  } else if (rank_name == "outlier") {
    mode = RankMode::Outlier;
  } else {
    return error_response(400, "InvalidQuery", "rank must be severity or outlier");
  }
  auto s = state();
  const auto ranked = s->ranked(mode);
  Json page = Json::array();
  for (std::size_t i = offset; i < ranked.size() && i - offset < limit; ++i) page.push_back(to_json(ranked[i]));
  return {200, Json{{"generation", s->generation()},
                    {"rank", std::string(to_string(mode))},
                    {"total", ranked.size()},
                    {"offset", offset},
                    {"limit", limit},
                    {"findings", page}}};
}

Response Service::finding(const std::string& property_id) const {
  auto s = state();
  const Finding* hit = nullptr;
  for (const auto& f : s->findings) {
    if (f.property_id == property_id) hit = &f;
  }
  if (!hit) return error_response(404, "UnknownFinding", "no finding for " + property_id);
  const auto* property = s->bundle->property(property_id);
  const auto* vector = s->bundle->vector(property_id);
  Json provenance_json = Json::object();
  if (vector) {
    for (const auto& d : hit->deviant_features) provenance_json[d.feature] = provenance(*vector, d.feature);
  }
  Json source = nullptr;
  if (property) {
    source = Json{{"file", property->source.file},
                  {"start", property->source.lines.start},
                  {"end", property->source.lines.end},
                  {"lines", source_lines(*s->bundle, *property)}};
  }
  return {200, Json{{"generation", s->generation()},
                    {"finding", to_json(*hit)},
                    {"provenance", provenance_json},
                    {"source", source}}};
}

Response Service::sankey() const {
  auto s = state();
  Json body = to_json(s->sankey());
  body["generation"] = s->generation();
  return {200, body};
}

Response Service::metrics() const {
  auto s = state();
  auto m = s->metrics();
  if (!m) return error_response(404, "NoTruth", "no truth file loaded");
  Json body = to_json(*m);
  body["generation"] = s->generation();
  return {200, body};
}

Response Service::retune(const std::string& body) {
  RetuneAction action;
  try {
    action = retune_action_from_json(parse_json(body, "request body"));
  } catch (const Error& e) {
    return error_response(400, std::string(to_string(e.code())), e.detail());
  }
  std::lock_guard writer(writer_mutex_);
  auto current = state();
  try {
    auto next = std::make_shared<const State>(apply_action(*current, action));
    if (state_dir_) persist(*next, *state_dir_);
    {
      std::unique_lock lock(pointer_mutex_);
      state_ = next;
    }
    return {200, Json{{"generation", next->generation()}, {"finding_count", next->findings.size()}}};
  } catch (const Error& e) {
    return error_response(status_for(e.code()), std::string(to_string(e.code())), e.detail());
  }
}

void Service::mount(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir) {
  auto send = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  auto size_param = [](const httplib::Request& req, const char* key, std::size_t fallback) -> std::optional<std::size_t> {
    if (!req.has_param(key)) return fallback;
    const auto text = req.get_param_value(key);
    try {
      std::size_t used = 0;
      const auto v = std::stoull(text, &used);
      if (used != text.size()) return std::nullopt;
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      return std::nullopt;
    }
  };

  server.Get("/api/generation", [this, send](const httplib::Request&, httplib::Response& res) { send(res, generation()); });
  server.Get("/api/signatures", [this, send](const httplib::Request&, httplib::Response& res) { send(res, signatures()); });
  server.Get("/api/findings", [this, send, size_param](const httplib::Request& req, httplib::Response& res) {
    auto offset = size_param(req, "offset", 0);
    auto limit = size_param(req, "limit", kDefaultLimit);
    if (!offset || !limit) return send(res, error_response(400, "InvalidQuery", "offset and limit must be integers"));
    send(res, findings(req.has_param("rank") ? req.get_param_value("rank") : "", *offset, *limit));
  });
  server.Get(R"(/api/findings/(.+))", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, finding(req.matches[1]));
  });
  server.Get("/api/sankey", [this, send](const httplib::Request&, httplib::Response& res) { send(res, sankey()); });
  server.Get("/api/metrics", [this, send](const httplib::Request&, httplib::Response& res) { send(res, metrics()); });
  server.Post("/api/retune", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, retune(req.body));
  });
  if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace netsig::app
