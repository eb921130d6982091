#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

namespace oracle {

namespace {

double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

std::vector<std::string> words(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

struct Block {
  std::string kind;
  std::string name;
  std::vector<std::vector<std::string>> lines;
};

struct Device {
  std::string name;
  std::vector<Block> blocks;
};

Device scan(const std::string& stem, const std::string& text) {
  Device d{stem, {}};
  std::istringstream in(text);
  bool open = false;
  for (std::string line; std::getline(in, line);) {
    auto w = words(line);
    if (w.empty() || w[0][0] == '#' || w[0][0] == '!') continue;
    if (line[0] == ' ' || line[0] == '\t') {
      if (open) d.blocks.back().lines.push_back(w);
      continue;
    }
    if (w[0] == "hostname") {
      d.name = w[1];
      open = false;
      continue;
    }
    static const std::set<std::string> kinds{"acl", "route-filter", "vrf", "routing-policy", "interface",
                                             "bgp-neighbor"};
    open = kinds.count(w[0]) > 0;
    if (open) d.blocks.push_back({w[0], w[1], {}});
  }
  return d;
}

// (target kind, name) pairs referenced by one entry line of a block.
std::vector<std::pair<std::string, std::string>> refs_of(const std::string& kind, const std::vector<std::string>& w) {
  std::vector<std::pair<std::string, std::string>> out;
  if (kind == "acl") {
    for (std::size_t i = 0; i + 1 < w.size(); ++i) {
      if (w[i] == "filter") out.emplace_back("route-filter", w[i + 1]);
    }
  } else if (kind == "vrf") {
    if ((w[0] == "import-policy" || w[0] == "export-policy") && w.size() == 2) out.emplace_back("routing-policy", w[1]);
  } else if (kind == "routing-policy") {
    if (w[0] == "match" && w.size() == 3 && (w[1] == "acl" || w[1] == "route-filter")) out.emplace_back(w[1], w[2]);
    if (w[0] == "call" && w.size() == 2) out.emplace_back("routing-policy", w[1]);
  } else if (kind == "interface") {
    if ((w[0] == "acl-in" || w[0] == "acl-out") && w.size() == 2) out.emplace_back("acl", w[1]);
    if (w[0] == "vrf" && w.size() == 2) out.emplace_back("vrf", w[1]);
  } else if (kind == "bgp-neighbor") {
    if ((w[0] == "import-policy" || w[0] == "export-policy") && w.size() == 2) out.emplace_back("routing-policy", w[1]);
    if (w[0] == "vrf" && w.size() == 2) out.emplace_back("vrf", w[1]);
  }
  return out;
}

}  // namespace

std::vector<double> modified_zscore(std::vector<double> values) {
  const double med = sorted_median(values);
  std::vector<double> abs_dev;
  for (double x : values) abs_dev.push_back(std::fabs(x - med));
  const double mad = sorted_median(abs_dev);
  std::vector<double> out;
  for (double x : values) {
    if (mad == 0) {
      out.push_back(x == med ? 0.0 : std::numeric_limits<double>::infinity());
    } else {
      out.push_back(0.6745 * std::fabs(x - med) / mad);
    }
  }
  return out;
}

std::vector<double> zscore(const std::vector<double>& values) {
  double sum = 0;
  for (double x : values) sum += x;
  const double mean = sum / static_cast<double>(values.size());
  double ss = 0;
  for (double x : values) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(values.size()));
  std::vector<double> out;
  for (double x : values) out.push_back(sd == 0 ? 0.0 : std::fabs(x - mean) / sd);
  return out;
}

Dangling dangling_references(const std::map<std::string, std::string>& device_texts) {
  std::vector<Device> devices;
  for (const auto& [stem, text] : device_texts) devices.push_back(scan(stem, text));
  Dangling out;
  for (const auto& d : devices) {
    for (const auto& b : d.blocks) {
      for (const auto& line : b.lines) {
        for (const auto& [target, name] : refs_of(b.kind, line)) {
          bool local = false, anywhere = false;
          for (const auto& other : devices) {
            for (const auto& def : other.blocks) {
              if (def.kind != target || def.name != name) continue;
              anywhere = true;
              if (other.name == d.name) local = true;
            }
          }
          const bool global_scope = target == "route-filter" || target == "routing-policy";
          if (!(local || (global_scope && anywhere))) out.emplace(d.name + "/" + b.kind + "/" + b.name, name);
        }
      }
    }
  }
  return out;
}

std::map<std::string, std::string> read_device_texts(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto& path = entry.path();
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    if (path.extension() == ".cfg") {
      out[path.stem().string()] = ss.str();
    } else if (path.extension() == ".json") {
      const auto doc = nlohmann::json::parse(ss.str());
      std::string text;
      if (doc.contains("hostname")) text += "hostname " + doc["hostname"].get<std::string>() + "\n";
      for (const auto& st : doc["stanzas"]) {
        text += st["kind"].get<std::string>() + " " + st["name"].get<std::string>() + "\n";
        for (const auto& e : st["entries"]) text += " " + e.get<std::string>() + "\n";
      }
      out[path.stem().string()] = text;
    }
  }
  return out;
}

std::size_t reverse_reachable(std::size_t node_count, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                              std::size_t target) {
  std::vector<bool> seen(node_count, false);
  std::vector<std::size_t> frontier{target};
  seen[target] = true;
  std::size_t count = 0;
  while (!frontier.empty()) {
    std::vector<std::size_t> next;
    for (auto n : frontier) {
      for (const auto& [from, to] : edges) {
        if (to == n && !seen[from]) {
          seen[from] = true;
          ++count;
          next.push_back(from);
        }
      }
    }
    frontier = std::move(next);
  }
  return count;
}

double mixture_density(const std::vector<double>& weights, const std::vector<std::vector<double>>& means,
                       const std::vector<std::vector<double>>& variances, const std::vector<double>& x) {
  double total = 0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    double p = weights[k];
    for (std::size_t d = 0; d < x.size(); ++d) {
      const double diff = x[d] - means[k][d];
      p *= std::exp(-diff * diff / (2 * variances[k][d])) / std::sqrt(2 * std::numbers::pi * variances[k][d]);
    }
    total += p;
  }
  return total;
}

double kendall_tau(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < b.size(); ++i) pos[b[i]] = i;
  long concordant = 0, discordant = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      (pos[a[i]] < pos[a[j]] ? concordant : discordant)++;
    }
  }
  const double pairs = static_cast<double>(a.size()) * static_cast<double>(a.size() - 1) / 2.0;
  return pairs == 0 ? 1.0 : static_cast<double>(concordant - discordant) / pairs;
}

}  // namespace oracle
