#pragma once

#include "exflow/flow.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace exflow {

class config_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Flat key = value configuration, '#' comments; a JSON object with the same
// keys is accepted as an alternative (detected by a leading '{').
std::map<std::string, std::string> parse_config_text(const std::string& text);

FlowConfig flow_config_from_map(const std::map<std::string, std::string>& kv);
FlowConfig load_flow_config(const std::string& path);

// FNV-1a over the raw config bytes; stamped into the run manifest
std::uint64_t config_digest(const std::string& text);

} // namespace exflow
