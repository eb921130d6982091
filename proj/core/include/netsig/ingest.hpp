#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "netsig/grammar.hpp"

namespace netsig {

enum class Level { Info, Warning, Error };
std::string_view to_string(Level level);

struct Diagnostic {
  Level level = Level::Warning;
  std::string code;  // e.g. "UnknownStanzaKind", "EmptyDevice", "DuplicateConfig"
  std::string file;
  int line = 0;
  std::string message;
  std::vector<std::string> subjects;  // devices or names the diagnostic is about

  // "LEVEL file:line message"
  std::string format() const;
};

struct Stanza {
  StanzaKind kind = StanzaKind::Acl;
  std::string name;
  std::vector<Entry> entries;
  std::string raw_text;

  // Structural equality: kind, name and entries; raw text and lines are ignored.
  bool same_structure(const Stanza& o) const {
    return kind == o.kind && name == o.name && entries == o.entries;
  }
};

struct LineRange {
  int start = 0;  // 1-based, inclusive
  int end = 0;    // inclusive
  bool operator==(const LineRange&) const = default;
};

struct DeviceConfig {
  std::string device_name;
  std::vector<Stanza> stanzas;
  std::string source_path;
  std::vector<LineRange> line_index;  // parallel to stanzas
  std::vector<LineRange> skipped;     // hostname directive and unknown-kind blocks
  int line_count = 0;
  std::string content_hash;
  std::vector<Diagnostic> warnings;

  bool same_structure(const DeviceConfig& o) const;
};

struct NetworkSnapshot {
  std::map<std::string, DeviceConfig> devices;
  std::string snapshot_id;
  std::vector<Diagnostic> ingest_warnings;
};

// Parses the line grammar (see docs/config-grammar.md). A `hostname`
// directive overrides `device_name`. Throws Error{MalformedStanza} or
// Error{DuplicateStanzaName}.
DeviceConfig parse_config(std::string_view text, std::string_view device_name,
                          std::string_view source_path = {});

// Parses the JSON intake form (see docs/snapshot-schema.json).
DeviceConfig parse_config_json(std::string_view text, std::string_view device_name,
                               std::string_view source_path = {});

// Canonical rendering; parse_config(print_config(d)) is structurally equal to d.
std::string print_config(const DeviceConfig& device);
std::string print_stanza(const Stanza& stanza);

NetworkSnapshot load_snapshot(const std::filesystem::path& directory);

// Builds a snapshot from already-parsed devices (used by the corpus generator and tests).
NetworkSnapshot make_snapshot(std::vector<DeviceConfig> devices);

std::vector<Diagnostic> validate_snapshot(const NetworkSnapshot& snapshot);

}  // namespace netsig
