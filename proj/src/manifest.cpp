#include "dopo/manifest.hpp"

#include "dopo/spectral.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dopo {

using nlohmann::json;

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string RunManifest::hash() const {
    std::ostringstream os;
    os << "command=" << command << '\n';
    for (const auto& [k, v] : to_key_values(params)) os << k << '=' << v << '\n';
    for (const auto& [k, v] : options) os << "option." << k << '=' << v << '\n';
    for (const auto& in : inputs) os << "input=" << in << '\n';
    os << "version=" << software_version << '\n' << "convention=" << convention << '\n';
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
    return buf;
}

std::string RunManifest::to_json() const {
    json j;
    j["command"] = command;
    json p;
    p["delta0"] = params.delta0;
    p["delta1"] = params.delta1;
    p["v"] = params.v;
    p["f"] = params.F;
    p["epsilon"] = params.epsilon;
    p["n_points"] = params.n_points;
    p["dx"] = params.dx;
    p["dt"] = params.dt;
    p["pump"] = to_string(params.pump.kind);
    p["pump_width"] = params.pump.width;
    p["pump_order"] = params.pump.order;
    p["seed"] = params.seed;
    p["t_transient"] = params.t_transient;
    p["sample_interval"] = params.sample_interval;
    j["params"] = p;
    json opts = json::array();
    for (const auto& [k, v] : options) opts.push_back({k, v});
    j["options"] = opts;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    j["telemetry"] = {{"wall_seconds", wall_seconds}, {"steps", steps}};
    j["complete"] = complete;
    j["software_version"] = software_version;
    j["convention"] = convention;
    j["hash"] = hash();
    return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
    RunManifest m;
    try {
        const json j = json::parse(text);
        m.command = j.at("command").get<std::string>();
        const auto& p = j.at("params");
        m.params.delta0 = p.at("delta0").get<double>();
        m.params.delta1 = p.at("delta1").get<double>();
        m.params.v = p.at("v").get<double>();
        m.params.F = p.at("f").get<double>();
        m.params.epsilon = p.at("epsilon").get<double>();
        m.params.n_points = p.at("n_points").get<std::size_t>();
        m.params.dx = p.at("dx").get<double>();
        m.params.dt = p.at("dt").get<double>();
        m.params.pump.kind = pump_kind_from_string(p.at("pump").get<std::string>());
        m.params.pump.width = p.at("pump_width").get<double>();
        m.params.pump.order = p.at("pump_order").get<int>();
        m.params.seed = p.at("seed").get<std::uint64_t>();
        m.params.t_transient = p.at("t_transient").get<double>();
        m.params.sample_interval = p.at("sample_interval").get<double>();
        for (const auto& kv : j.at("options")) m.options.emplace_back(kv.at(0).get<std::string>(), kv.at(1).get<std::string>());
        m.inputs = j.at("inputs").get<std::vector<std::string>>();
        m.outputs = j.at("outputs").get<std::vector<std::string>>();
        m.wall_seconds = j.at("telemetry").at("wall_seconds").get<double>();
        m.steps = j.at("telemetry").at("steps").get<std::uint64_t>();
        m.complete = j.at("complete").get<bool>();
        m.software_version = j.at("software_version").get<std::string>();
        m.convention = j.at("convention").get<std::string>();
    } catch (const json::exception& e) {
        throw Error(std::string("malformed manifest: ") + e.what());
    }
    return m;
}

void RunManifest::write(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write manifest '" + path.string() + "'");
    out << to_json();
}

RunManifest RunManifest::read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read manifest '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

KeyValues RunManifest::provenance() const {
    KeyValues kv{{"manifest_hash", hash()},
                 {"command", command},
                 {"software_version", software_version},
                 {"convention", convention}};
    for (auto& p : to_key_values(params)) kv.push_back(std::move(p));
    return kv;
}

bool operator==(const RunManifest& a, const RunManifest& b) {
    return a.to_json() == b.to_json();
}

}  // namespace dopo
