#pragma once

#include "omtree/orchestrator.hpp"

#include <iosfwd>
#include <string>

namespace omtree {

// Config text: one "key = value" per line, '#' comments. Keys mirror
// TrainConfig; nested configs use ppo./sac./lower./cost./norm. prefixes.
// The output directory is not part of the file.

/// Throws Parse on an unknown key or malformed value.
void apply_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
TrainConfig read_config(std::istream& in, TrainConfig base = {});
TrainConfig load_config(const std::string& path, TrainConfig base = {});
void write_config(std::ostream& out, const TrainConfig& cfg);
void save_config(const std::string& path, const TrainConfig& cfg);

/// "3,6,9" -> {3, 6, 9}.
std::vector<NodeId> parse_node_list(const std::string& s);

}  // namespace omtree
