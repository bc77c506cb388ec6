#include "fito/config.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <sstream>
#include <stdexcept>

namespace fito {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
    throw std::invalid_argument("config: key '" + key + "' has invalid value '" + value + "'");
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& origin) {
    KeyValueConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos || trim(line.substr(0, eq)).empty())
            throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        for (auto& ch : key)
            if (ch == '-') ch = '_';
        cfg.values_[key] = trim(line.substr(eq + 1));
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw std::invalid_argument("config: cannot read " + file.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str(), file.string());
}

std::optional<std::string> KeyValueConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    return get(key).value_or(fallback);
}

double KeyValueConfig::get_double(const std::string& key, double fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(*v, &used);
    } catch (const std::exception&) {
        bad_value(key, *v);
    }
    if (used != v->size()) bad_value(key, *v);
    return x;
}

long long KeyValueConfig::get_int(const std::string& key, long long fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(*v, &used);
    } catch (const std::exception&) {
        bad_value(key, *v);
    }
    if (used != v->size()) bad_value(key, *v);
    return x;
}

std::vector<double> KeyValueConfig::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto v = get(key);
    if (!v) return fallback;
    std::vector<double> out;
    std::string item;
    std::istringstream is(*v);
    while (std::getline(is, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        std::size_t used = 0;
        try {
            out.push_back(std::stod(item, &used));
        } catch (const std::exception&) {
            bad_value(key, *v);
        }
        if (used != item.size()) bad_value(key, *v);
    }
    return out;
}

std::string KeyValueConfig::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
    return out;
}

std::string hash_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::filesystem::path default_output_dir(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("FITO_OUT"); env && *env) return env;
    return "fito-out";
}

std::string RunManifest::hash() const { return hash_hex(command + "\n" + version + "\n" + settings.canonical()); }

std::string RunManifest::to_json() const {
    nlohmann::ordered_json j;
    j["manifest"] = hash();
    j["command"] = command;
    j["version"] = version;
    j["seed"] = seed;
    j["started"] = started;
    j["finished"] = finished;
    j["settings"] = settings.values();
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
}

}  // namespace fito
