#pragma once

#include <json.hpp>
#include <map>
#include <string>
#include <vector>

namespace evolvebm {

// Validates an experiment configuration object against the rules published in
// docs/config.schema.json. Returns every violation found (empty = valid).
std::vector<std::string> validate_config(const nlohmann::json& config);

// Reads and validates a config file; IoError on read failure, ConfigError
// (listing all violations) on invalid content.
nlohmann::json load_config_file(const std::string& path);

// "a=1,b=0.5" -> {{"a",1},{"b",0.5}}; ConfigError on malformed entries.
std::map<std::string, double> parse_params(const std::string& text);

// "0.5,0.25,0.1" -> {0.5, 0.25, 0.1}; ConfigError on malformed entries.
std::vector<double> parse_double_list(const std::string& text);

}  // namespace evolvebm
