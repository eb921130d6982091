#pragma once

#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include "session.hpp"

namespace httplib {
class Server;
}

namespace netsig::app {

struct Response {
  int status = 200;
  Json body;
};

// Readers take the current State pointer; POST /api/retune is the single
// writer. A new generation is persisted before it becomes visible.
class Service {
 public:
  Service(State initial, std::optional<std::filesystem::path> state_dir);

  std::shared_ptr<const State> state() const;

  Response generation() const;
  Response signatures() const;
  Response findings(const std::string& rank, std::size_t offset, std::size_t limit) const;
  Response finding(const std::string& property_id) const;
  Response sankey() const;
  Response metrics() const;
  Response retune(const std::string& body);

  // Registers the /api routes and, when given, a static mount for UI assets.
  void mount(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir = std::nullopt);

  static constexpr std::size_t kDefaultLimit = 100;

 private:
  mutable std::shared_mutex pointer_mutex_;
  std::shared_ptr<const State> state_;
  std::mutex writer_mutex_;
  std::optional<std::filesystem::path> state_dir_;
};

}  // namespace netsig::app
