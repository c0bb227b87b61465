#include "dopo/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

namespace dopo {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    double x = 0.0;
    const char* first = value.data();
    const char* last = first + value.size();
    if (!value.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || value.empty())
        throw Error("key '" + key + "': expected a number, got '" + value + "'");
    return x;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& value) {
    std::uint64_t x = 0;
    const char* first = value.data();
    const char* last = first + value.size();
    const auto [ptr, ec] = std::from_chars(first, last, x);
    if (ec != std::errc() || ptr != last || value.empty())
        throw Error("key '" + key + "': expected a nonnegative integer, got '" + value + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    throw Error("key '" + key + "': expected true or false, got '" + value + "'");
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
    std::vector<double> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_double(key, item));
    }
    return out;
}

using Setter = void (*)(Config&, const std::string&, const std::string&);

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"delta0", [](Config& c, const std::string& k, const std::string& v) { c.params.delta0 = parse_double(k, v); }},
        {"delta1", [](Config& c, const std::string& k, const std::string& v) { c.params.delta1 = parse_double(k, v); }},
        {"v", [](Config& c, const std::string& k, const std::string& v) { c.params.v = parse_double(k, v); }},
        {"f", [](Config& c, const std::string& k, const std::string& v) { c.params.F = parse_double(k, v); }},
        {"epsilon", [](Config& c, const std::string& k, const std::string& v) { c.params.epsilon = parse_double(k, v); }},
        {"n_points", [](Config& c, const std::string& k, const std::string& v) { c.params.n_points = parse_unsigned(k, v); }},
        {"dx", [](Config& c, const std::string& k, const std::string& v) { c.params.dx = parse_double(k, v); }},
        {"dt", [](Config& c, const std::string& k, const std::string& v) { c.params.dt = parse_double(k, v); }},
        {"pump", [](Config& c, const std::string&, const std::string& v) { c.params.pump.kind = pump_kind_from_string(v); }},
        {"pump_width", [](Config& c, const std::string& k, const std::string& v) { c.params.pump.width = parse_double(k, v); }},
        {"pump_order", [](Config& c, const std::string& k, const std::string& v) {
             c.params.pump.order = static_cast<int>(parse_unsigned(k, v));
         }},
        {"seed", [](Config& c, const std::string& k, const std::string& v) { c.params.seed = parse_unsigned(k, v); }},
        {"t_transient", [](Config& c, const std::string& k, const std::string& v) { c.params.t_transient = parse_double(k, v); }},
        {"sample_interval", [](Config& c, const std::string& k, const std::string& v) {
             c.params.sample_interval = parse_double(k, v);
         }},
        {"duration", [](Config& c, const std::string& k, const std::string& v) { c.run.duration = parse_double(k, v); }},
        {"spacetime_interval", [](Config& c, const std::string& k, const std::string& v) {
             c.run.spacetime_interval = parse_double(k, v);
         }},
        {"checkpoint_interval", [](Config& c, const std::string& k, const std::string& v) {
             c.run.checkpoint_interval = parse_double(k, v);
         }},
        {"stream", [](Config& c, const std::string& k, const std::string& v) { c.run.stream = parse_unsigned(k, v); }},
        {"targets", [](Config& c, const std::string& k, const std::string& v) { c.run.targets_kc = parse_list(k, v); }},
        {"record_dominant", [](Config& c, const std::string& k, const std::string& v) { c.run.record_dominant = parse_bool(k, v); }},
        {"plot_stride", [](Config& c, const std::string& k, const std::string& v) { c.run.plot_stride = parse_unsigned(k, v); }},
        {"theta_points", [](Config& c, const std::string& k, const std::string& v) { c.run.theta_points = parse_unsigned(k, v); }},
        {"histogram_bins", [](Config& c, const std::string& k, const std::string& v) {
             c.run.histogram_bins = parse_unsigned(k, v);
         }},
    };
    return table;
}

std::size_t edit_distance(const std::string& a, const std::string& b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

}  // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = [] {
        std::vector<std::string> k;
        for (const auto& [name, _] : setters()) k.push_back(name);
        return k;
    }();
    return keys;
}

std::string nearest_key(const std::string& key) {
    std::string best;
    std::size_t best_d = std::string::npos;
    for (const auto& k : config_keys()) {
        const std::size_t d = edit_distance(key, k);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    return best;
}

void apply_setting(Config& config, const std::string& key, const std::string& value) {
    const auto& table = setters();
    const auto it = table.find(key);
    if (it == table.end())
        throw Error("unknown configuration key '" + key + "' (did you mean '" + nearest_key(key) + "'?)");
    it->second(config, key, value);
}

KeyValues parse_key_values(std::istream& in, const std::string& source) {
    KeyValues out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw Error(source + ":" + std::to_string(lineno) + ": expected key=value");
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw Error(source + ":" + std::to_string(lineno) + ": empty key");
        out.emplace_back(std::move(key), std::move(value));
    }
    return out;
}

KeyValues read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open configuration file '" + path.string() + "'");
    return parse_key_values(in, path.string());
}

KeyValues parse_overrides(const std::vector<std::string>& args) {
    KeyValues out;
    for (auto arg : args) {
        if (arg.rfind("--", 0) == 0) arg.erase(0, 2);
        const auto eq = arg.find('=');
        if (eq == std::string::npos || eq == 0)
            throw Error("unrecognized argument '" + arg + "' (overrides take the form --key=value)");
        out.emplace_back(arg.substr(0, eq), arg.substr(eq + 1));
    }
    return out;
}

Config load_config(const std::optional<std::filesystem::path>& file, const KeyValues& overrides) {
    Config config;
    if (file)
        for (const auto& [k, v] : read_key_values(*file)) apply_setting(config, k, v);
    for (const auto& [k, v] : overrides) apply_setting(config, k, v);
    validate(config.params).throw_if_invalid();
    if (!(config.run.duration >= 0.0)) throw Error("key 'duration': must be nonnegative");
    if (config.run.plot_stride == 0) throw Error("key 'plot_stride': must be positive");
    if (config.run.theta_points < 2) throw Error("key 'theta_points': need at least 2");
    if (config.run.histogram_bins < 2) throw Error("key 'histogram_bins': need at least 2");
    return config;
}

std::string format_number(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

KeyValues to_key_values(const SimParams& p) {
    return {
        {"delta0", format_number(p.delta0)},
        {"delta1", format_number(p.delta1)},
        {"v", format_number(p.v)},
        {"f", format_number(p.F)},
        {"epsilon", format_number(p.epsilon)},
        {"n_points", std::to_string(p.n_points)},
        {"dx", format_number(p.dx)},
        {"dt", format_number(p.dt)},
        {"pump", to_string(p.pump.kind)},
        {"pump_width", format_number(p.pump.width)},
        {"pump_order", std::to_string(p.pump.order)},
        {"seed", std::to_string(p.seed)},
        {"t_transient", format_number(p.t_transient)},
        {"sample_interval", format_number(p.sample_interval)},
    };
}

KeyValues to_key_values(const RunOptions& r) {
    std::string targets;
    for (std::size_t i = 0; i < r.targets_kc.size(); ++i)
        targets += (i ? "," : "") + format_number(r.targets_kc[i]);
    return {
        {"duration", format_number(r.duration)},
        {"spacetime_interval", format_number(r.spacetime_interval)},
        {"checkpoint_interval", format_number(r.checkpoint_interval)},
        {"stream", std::to_string(r.stream)},
        {"targets", targets},
        {"record_dominant", r.record_dominant ? "true" : "false"},
        {"plot_stride", std::to_string(r.plot_stride)},
        {"theta_points", std::to_string(r.theta_points)},
        {"histogram_bins", std::to_string(r.histogram_bins)},
    };
}

SimParams params_from_key_values(const KeyValues& kv) {
    Config c;
    for (const auto& [k, v] : kv) apply_setting(c, k, v);
    return c.params;
}

}  // namespace dopo
