#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fito {

// Flat "key = value" settings; '#' starts a comment. Later assignments win,
// so command-line overrides are applied with set() after loading a file.
class KeyValueConfig {
public:
    static KeyValueConfig parse(const std::string& text, const std::string& origin = "<string>");
    static KeyValueConfig load(const std::filesystem::path& file);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string& key) const;

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;

    const std::map<std::string, std::string>& values() const { return values_; }
    // Sorted "key=value" lines; the manifest hash is taken over these bytes.
    std::string canonical() const;

private:
    std::map<std::string, std::string> values_;
};

std::string hash_hex(const std::string& bytes);  // FNV-1a 64, 16 hex digits

// Directory for outputs: explicit flag, else $FITO_OUT, else ./fito-out.
std::filesystem::path default_output_dir(const std::string& flag_value = {});

struct RunManifest {
    std::string command;
    KeyValueConfig settings;
    std::string version = "fito 0.1.0";
    std::uint64_t seed = 0;
    std::string started, finished;  // UTC ISO-8601
    std::vector<std::string> outputs;

    // Depends on command, settings and version only, so identical reruns
    // stamp identical hashes into their outputs.
    std::string hash() const;
    std::string to_json() const;
};

std::string utc_now();

}  // namespace fito
