#pragma once

#include <string>
#include <vector>

#include "cqed/click_stream.hpp"
#include "cqed/params.hpp"
#include "cqed/source_sim.hpp"

namespace cqed {

// Parse failure for stream/config files; line is 1-based, 0 when the
// problem is not tied to a specific line.
struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, std::size_t line_no = 0)
      : std::runtime_error(msg), line(line_no) {}
  std::size_t line;
};

// Unknown or malformed configuration key.
struct ConfigError : std::runtime_error {
  ConfigError(const std::string& msg, const std::string& key_name)
      : std::runtime_error(msg), key(key_name) {}
  std::string key;
};

// Write to <path>.tmp and rename into place.
void atomic_write(const std::string& path, const std::string& content);

// Click-stream file: "# cqed-clicks v1, ..." header, then
// cycle_id,detector,timestamp_ns rows sorted by (cycle_id, timestamp_ns).
std::string format_click_stream(const ClickStream& stream);
void save_click_stream(const std::string& path, const ClickStream& stream);
ClickStream load_click_stream(const std::string& path);

// Ground-truth sidecar: cycle_id,pulse_index,atom_id,emitted rows.
void save_truth(const std::string& path, const std::vector<TruthFlag>& truth);
std::vector<TruthFlag> load_truth(const std::string& path);

// Flat key/value config file covering all four config structs.
std::string format_config(const SimConfig& config);
void save_config(const std::string& path, const SimConfig& config);
SimConfig load_config(const std::string& path);
SimConfig parse_config(const std::string& text);

// Two-column (or more) CSV with a header row.
void save_csv(const std::string& path, const std::string& header,
              const std::vector<std::vector<double>>& rows);

}  // namespace cqed
