#include "evolvebm/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "evolvebm/errors.hpp"
#include "evolvebm/geometry.hpp"
#include "evolvebm/io.hpp"

namespace evolvebm {

namespace {

bool is_integer(const nlohmann::json& v) {
    if (v.is_number_integer() || v.is_number_unsigned()) return true;
    if (v.is_number_float()) {
        const double d = v.get<double>();
        return std::floor(d) == d;
    }
    return false;
}

void check_positive_integer(const nlohmann::json& v, const std::string& key, long long min_value,
                            std::vector<std::string>& out) {
    if (!is_integer(v)) {
        out.push_back("'" + key + "' must be an integer");
    } else if (v.get<double>() < static_cast<double>(min_value)) {
        out.push_back("'" + key + "' must be >= " + std::to_string(min_value));
    }
}

void check_number(const nlohmann::json& v, const std::string& key, bool strictly_positive,
                  std::vector<std::string>& out) {
    if (!v.is_number()) {
        out.push_back("'" + key + "' must be a number");
    } else if (strictly_positive && !(v.get<double>() > 0.0)) {
        out.push_back("'" + key + "' must be > 0");
    }
}

void check_string_enum(const nlohmann::json& v, const std::string& key,
                       const std::vector<std::string>& allowed, std::vector<std::string>& out) {
    if (!v.is_string()) {
        out.push_back("'" + key + "' must be a string");
        return;
    }
    const std::string s = v.get<std::string>();
    for (const auto& a : allowed) {
        if (s == a) return;
    }
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : ", ") + a;
    out.push_back("'" + key + "' must be one of: " + opts);
}

void check_number_array(const nlohmann::json& v, const std::string& key,
                        std::vector<std::string>& out) {
    if (!v.is_array() || v.empty()) {
        out.push_back("'" + key + "' must be a non-empty array of numbers");
        return;
    }
    for (const auto& e : v) {
        if (!e.is_number()) {
            out.push_back("'" + key + "' must contain only numbers");
            return;
        }
    }
}

}  // namespace

std::vector<std::string> validate_config(const nlohmann::json& config) {
    std::vector<std::string> out;
    if (!config.is_object()) {
        out.push_back("configuration root must be a JSON object");
        return out;
    }

    static const std::vector<std::string> string_keys = {
        "out", "path", "control", "table_out", "frames_out", "path_out", "init"};

    for (const auto& [key, value] : config.items()) {
        if (key == "family") {
            if (!value.is_string()) {
                out.push_back("'family' must be a string");
            } else {
                bool known = false;
                for (const auto& d : list_families()) known |= (d.id == value.get<std::string>());
                if (!known)
                    out.push_back("'family' names an unknown metric family '" +
                                  value.get<std::string>() + "'");
            }
        } else if (key == "params") {
            if (!value.is_object()) {
                out.push_back("'params' must be an object of numbers");
            } else {
                for (const auto& [pk, pv] : value.items()) {
                    if (!pv.is_number())
                        out.push_back("'params." + pk + "' must be a number");
                }
            }
        } else if (key == "dim") {
            check_positive_integer(value, key, 1, out);
        } else if (key == "epsilon" || key == "delta" || key == "radius" || key == "window" ||
                   key == "g_tol" || key == "frame_tol") {
            check_number(value, key, true, out);
        } else if (key == "smoothing_width") {
            if (!value.is_number() || value.get<double>() < 0.0)
                out.push_back("'smoothing_width' must be a number >= 0");
        } else if (key == "t0") {
            if (!value.is_number() || value.get<double>() < 0.0 || value.get<double>() > 1.0)
                out.push_back("'t0' must be a number in [0,1]");
        } else if (key == "eps_list") {
            check_number_array(value, key, out);
            if (value.is_array()) {
                double prev = 0.0;
                bool first = true;
                for (const auto& e : value) {
                    if (!e.is_number()) break;
                    const double x = e.get<double>();
                    if (!(x > 0.0)) {
                        out.push_back("'eps_list' entries must be > 0");
                        break;
                    }
                    if (!first && !(x < prev)) {
                        out.push_back("'eps_list' must be strictly decreasing");
                        break;
                    }
                    prev = x;
                    first = false;
                }
            }
        } else if (key == "n_steps" || key == "n_samples" || key == "n_grid" ||
                   key == "sub_steps") {
            check_positive_integer(value, key, 1, out);
        } else if (key == "threads") {
            check_positive_integer(value, key, 1, out);
        } else if (key == "seed") {
            check_positive_integer(value, key, 0, out);
        } else if (key == "reorth_every") {
            check_positive_integer(value, key, 0, out);
        } else if (key == "time_samples" || key == "lattice_points") {
            check_positive_integer(value, key, 2, out);
        } else if (key == "scheme") {
            check_string_enum(value, key, {"heun"}, out);
        } else if (key == "function") {
            check_string_enum(value, key, {"coord1", "coord2", "sqnorm"}, out);
        } else if (key == "x0" || key == "x1") {
            check_number_array(value, key, out);
        } else if (key == "lattice_lo" || key == "lattice_hi") {
            check_number(value, key, false, out);
        } else if (std::find(string_keys.begin(), string_keys.end(), key) != string_keys.end()) {
            if (!value.is_string()) out.push_back("'" + key + "' must be a string");
        } else {
            out.push_back("unknown configuration key '" + key + "'");
        }
    }
    return out;
}

nlohmann::json load_config_file(const std::string& path) {
    const std::string text = read_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw ConfigError("config file '" + path + "' is not valid JSON");
    }
    auto violations = validate_config(j);
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return j;
}

std::map<std::string, double> parse_params(const std::string& text) {
    std::map<std::string, double> out;
    if (text.empty()) return out;
    std::size_t start = 0;
    std::vector<std::string> violations;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const std::string item = text.substr(start, end - start);
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            violations.push_back("malformed parameter '" + item + "' (expected name=value)");
        } else {
            const std::string name = item.substr(0, eq);
            const std::string val = item.substr(eq + 1);
            double v = 0.0;
            const auto res = std::from_chars(val.data(), val.data() + val.size(), v);
            if (res.ec != std::errc() || res.ptr != val.data() + val.size()) {
                violations.push_back("parameter '" + name + "': cannot parse value '" + val + "'");
            } else {
                out[name] = v;
            }
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    if (!violations.empty()) throw ConfigError(std::move(violations));
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos) end = text.size();
        const std::string item = text.substr(start, end - start);
        if (!item.empty()) {
            double v = 0.0;
            const auto res = std::from_chars(item.data(), item.data() + item.size(), v);
            if (res.ec != std::errc() || res.ptr != item.data() + item.size()) {
                throw ConfigError("cannot parse number '" + item + "' in list");
            }
            out.push_back(v);
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

}  // namespace evolvebm
