#include "netsig/ingest.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "netsig/error.hpp"
#include "netsig/util.hpp"

namespace netsig {

namespace fs = std::filesystem;

std::string_view to_string(Level level) {
  switch (level) {
    case Level::Info: return "INFO";
    case Level::Warning: return "WARNING";
    case Level::Error: return "ERROR";
  }
  return "?";
}

std::string Diagnostic::format() const {
  return fmt::format("{} {}:{} {}", to_string(level), file, line, message);
}

bool DeviceConfig::same_structure(const DeviceConfig& o) const {
  if (device_name != o.device_name || stanzas.size() != o.stanzas.size()) return false;
  for (std::size_t i = 0; i < stanzas.size(); ++i) {
    if (!stanzas[i].same_structure(o.stanzas[i])) return false;
  }
  return true;
}

namespace {

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return lines;
}

bool is_comment_or_blank(std::string_view line) {
  auto t = trim(line);
  return t.empty() || t.front() == '#' || t.front() == '!';
}

[[noreturn]] void malformed(std::string_view file, int line, std::string_view why) {
  throw Error(ErrorCode::MalformedStanza, fmt::format("{}:{}: {}", file, line, why));
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoError, path.string());
  return ss.str();
}

std::string compute_snapshot_id(const std::map<std::string, DeviceConfig>& devices) {
  Fnv1a h;
  for (const auto& [name, dev] : devices) {
    h.update(name);
    h.update(std::string_view("\0", 1));
    h.update(dev.content_hash);
    h.update(std::string_view("\n", 1));
  }
  return h.hex();
}

}  // namespace

DeviceConfig parse_config(std::string_view text, std::string_view device_name,
                          std::string_view source_path) {
  if (device_name.empty()) throw Error(ErrorCode::InvalidConfig, "empty device name");
  DeviceConfig dev;
  dev.device_name = std::string(device_name);
  dev.source_path = std::string(source_path);
  dev.content_hash = fnv1a_hex(text);
  const std::string file = source_path.empty() ? std::string(device_name) : std::string(source_path);

  const auto lines = split_lines(text);
  dev.line_count = static_cast<int>(lines.size());

  enum class Open { None, Stanza, Skipped };
  Open open = Open::None;
  std::set<std::pair<StanzaKind, std::string>> seen;

  for (std::size_t idx = 0; idx < lines.size(); ++idx) {
    const int lineno = static_cast<int>(idx) + 1;
    const std::string_view line = lines[idx];
    if (is_comment_or_blank(line)) continue;

    const bool indented = line.front() == ' ' || line.front() == '\t';
    auto tokens = split_ws(line);

    if (indented) {
      if (open == Open::None) malformed(file, lineno, "entry outside of any stanza");
      if (open == Open::Skipped) {
        dev.skipped.back().end = lineno;
        continue;
      }
      Stanza& st = dev.stanzas.back();
      Entry entry{tokens[0], {tokens.begin() + 1, tokens.end()}, lineno};
      switch (check_entry(st.kind, entry)) {
        case EntryCheck::Malformed:
          malformed(file, lineno, fmt::format("invalid {} entry '{}'", to_string(st.kind), trim(line)));
        case EntryCheck::UnknownKey:
          dev.warnings.push_back({Level::Warning, "UnknownEntryKey", file, lineno,
                                  fmt::format("unknown {} entry key '{}'", to_string(st.kind), entry.key),
                                  {dev.device_name}});
          break;
        case EntryCheck::Ok:
          break;
      }
      st.entries.push_back(std::move(entry));
      st.raw_text += line;
      st.raw_text += '\n';
      dev.line_index.back().end = lineno;
      continue;
    }

    const std::string& keyword = tokens[0];
    if (keyword == "hostname") {
      if (tokens.size() != 2 || !is_valid_name(tokens[1])) malformed(file, lineno, "bad hostname directive");
      dev.device_name = tokens[1];
      dev.skipped.push_back({lineno, lineno});
      open = Open::None;
      continue;
    }
    auto kind = stanza_kind_from_string(keyword);
    if (!kind) {
      dev.warnings.push_back({Level::Warning, "UnknownStanzaKind", file, lineno,
                              fmt::format("ignoring unknown stanza kind '{}'", keyword),
                              {dev.device_name}});
      dev.skipped.push_back({lineno, lineno});
      open = Open::Skipped;
      continue;
    }
    if (tokens.size() != 2 || !is_valid_name(tokens[1])) {
      malformed(file, lineno, fmt::format("stanza header must be '{} <name>'", keyword));
    }
    if (!seen.emplace(*kind, tokens[1]).second) {
      throw Error(ErrorCode::DuplicateStanzaName,
                  fmt::format("{}:{}: {} {}", file, lineno, keyword, tokens[1]));
    }
    Stanza st;
    st.kind = *kind;
    st.name = tokens[1];
    st.raw_text = std::string(line) + "\n";
    dev.stanzas.push_back(std::move(st));
    dev.line_index.push_back({lineno, lineno});
    open = Open::Stanza;
  }
  return dev;
}

DeviceConfig parse_config_json(std::string_view text, std::string_view device_name,
                               std::string_view source_path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", source_path, e.what()));
  }
  // The JSON form is rendered to the line grammar so both intake paths share one parser;
  // line ranges then refer to that canonical rendering.
  std::string rendered;
  try {
    if (doc.contains("hostname")) rendered += "hostname " + doc.at("hostname").get<std::string>() + "\n";
    for (const auto& st : doc.at("stanzas")) {
      rendered += st.at("kind").get<std::string>() + " " + st.at("name").get<std::string>() + "\n";
      for (const auto& e : st.value("entries", nlohmann::json::array())) {
        rendered += " " + e.get<std::string>() + "\n";
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, fmt::format("{}: {}", source_path, e.what()));
  }
  DeviceConfig dev = parse_config(rendered, device_name, source_path);
  dev.content_hash = fnv1a_hex(text);
  return dev;
}

std::string print_stanza(const Stanza& stanza) {
  std::string out = fmt::format("{} {}\n", to_string(stanza.kind), stanza.name);
  for (const auto& e : stanza.entries) {
    out += " " + e.key;
    for (const auto& v : e.values) out += " " + v;
    out += "\n";
  }
  return out;
}

std::string print_config(const DeviceConfig& device) {
  std::string out = "hostname " + device.device_name + "\n";
  for (const auto& st : device.stanzas) out += print_stanza(st);
  return out;
}

NetworkSnapshot make_snapshot(std::vector<DeviceConfig> devices) {
  NetworkSnapshot snap;
  for (auto& dev : devices) {
    for (auto& w : dev.warnings) snap.ingest_warnings.push_back(w);
    auto name = dev.device_name;
    if (!snap.devices.emplace(name, std::move(dev)).second) {
      throw Error(ErrorCode::DuplicateDevice, name);
    }
  }
  if (snap.devices.empty()) throw Error(ErrorCode::EmptySnapshot, "no devices");
  snap.snapshot_id = compute_snapshot_id(snap.devices);
  return snap;
}

NetworkSnapshot load_snapshot(const fs::path& directory) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec)) throw Error(ErrorCode::IoError, directory.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory, ec)) {
    const auto ext = entry.path().extension();
    if (ext != ".cfg" && ext != ".json") continue;
    if (entry.is_directory()) continue;
    files.push_back(entry.path());
  }
  if (ec) throw Error(ErrorCode::IoError, directory.string());
  if (files.empty()) throw Error(ErrorCode::EmptySnapshot, directory.string());
  std::sort(files.begin(), files.end());

  std::vector<DeviceConfig> devices;
  devices.reserve(files.size());
  for (const auto& path : files) {
    const std::string text = read_file(path);
    const std::string stem = path.stem().string();
    if (path.extension() == ".json") {
      devices.push_back(parse_config_json(text, stem, path.string()));
    } else {
      devices.push_back(parse_config(text, stem, path.string()));
    }
  }
  return make_snapshot(std::move(devices));
}

std::vector<Diagnostic> validate_snapshot(const NetworkSnapshot& snapshot) {
  std::vector<Diagnostic> out;
  std::map<std::string, std::string> by_hash;
  for (const auto& [name, dev] : snapshot.devices) {
    if (dev.stanzas.empty()) {
      out.push_back({Level::Warning, "EmptyDevice", dev.source_path, 0,
                     fmt::format("device '{}' has no stanzas", name), {name}});
    }
    auto [it, inserted] = by_hash.emplace(dev.content_hash, name);
    if (!inserted) {
      out.push_back({Level::Info, "DuplicateConfig", dev.source_path, 0,
                     fmt::format("device '{}' is byte-identical to '{}'", name, it->second),
                     {it->second, name}});
    }
  }
  return out;
}

}  // namespace netsig
