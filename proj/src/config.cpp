#include "exflow/config.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace exflow {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::string body = trim(text);
    if (!body.empty() && body[0] == '{') {
        nlohmann::json j = nlohmann::json::parse(body, nullptr, true, true);
        if (!j.is_object()) throw config_error("config json: top level must be an object");
        for (auto& [key, value] : j.items()) {
            if (value.is_string())
                kv[key] = value.get<std::string>();
            else
                kv[key] = value.dump();
        }
        return kv;
    }
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw config_error("config line " + std::to_string(lineno) + ": empty key");
        kv[key] = value;
    }
    return kv;
}

namespace {

double to_double(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': bad number '" + value + "'");
    }
}

long to_long(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        long v = std::stol(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw config_error("config key '" + key + "': bad integer '" + value + "'");
    }
}

} // namespace

FlowConfig flow_config_from_map(const std::map<std::string, std::string>& kv) {
    FlowConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "geometry") cfg.geometry = value;
        else if (key == "speed") cfg.speed = value;
        else if (key == "psi") cfg.psi = value;
        else if (key == "t_max") cfg.t_max = to_double(key, value);
        else if (key == "c_cfl") cfg.c_cfl = to_double(key, value);
        else if (key == "dt_max") cfg.dt_max = to_double(key, value);
        else if (key == "dt_override") cfg.dt_override = to_double(key, value);
        else if (key == "n") cfg.n = static_cast<int>(to_long(key, value));
        else if (key == "n_lat") cfg.n_lat = static_cast<int>(to_long(key, value));
        else if (key == "n_lon") cfg.n_lon = static_cast<int>(to_long(key, value));
        else if (key == "remesh_interval") cfg.remesh_interval = static_cast<int>(to_long(key, value));
        else if (key == "diag_interval") cfg.diag_interval = static_cast<int>(to_long(key, value));
        else if (key == "ball_stride") cfg.ball_stride = static_cast<int>(to_long(key, value));
        else if (key == "tol_flow") cfg.tol_flow = to_double(key, value);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_long(key, value));
        else if (key == "stepper") cfg.rk2 = (value == "rk2");
        else if (key == "regime_trials") cfg.regime_trials = to_long(key, value);
        else if (key == "track_residuals") cfg.track_residuals = to_long(key, value) != 0;
        else if (key == "threads") { /* consumed by the CLI */ }
        else throw config_error("unknown config key: " + key);
    }
    if (cfg.c_cfl <= 0.0 || cfg.c_cfl > 1.0) throw config_error("c_cfl must lie in (0, 1]");
    if (!cfg.is_surface_geometry() && cfg.n < 64)
        throw config_error("curve resolution must be at least 64");
    if (cfg.is_surface_geometry() && (cfg.n_lat < 32 || cfg.n_lon < 64))
        throw config_error("surface resolution must be at least 32 x 64");
    if (cfg.t_max <= 0.0) throw config_error("t_max must be positive");
    if (cfg.diag_interval < 1) throw config_error("diag_interval must be >= 1");
    return cfg;
}

FlowConfig load_flow_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return flow_config_from_map(parse_config_text(ss.str()));
}

std::uint64_t config_digest(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

} // namespace exflow
