#pragma once

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedprice {

// Flat key-value configuration with [section] scoping and '#' comments.
class Config {
  public:
    Config() = default;

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream is(text);
        std::string line, section = "common";
        while (std::getline(is, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = line.substr(1, line.size() - 2);
                trim(section);
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config: expected key = value, got: " + line);
            std::string key = line.substr(0, eq), value = line.substr(eq + 1);
            trim(key);
            trim(value);
            cfg.values_[section + "." + key] = value;
        }
        return cfg;
    }

    void set(const std::string& dotted_key, const std::string& value) {
        values_[dotted_key] = value;
    }

    bool has(const std::string& dotted_key) const { return values_.count(dotted_key) > 0; }

    std::string get_str(const std::string& key, const std::string& dflt) const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    double get_double(const std::string& key, double dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        return std::stod(it->second);
    }

    long get_int(const std::string& key, long dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        return std::stol(it->second);
    }

    bool get_bool(const std::string& key, bool dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        return it->second == "true" || it->second == "1" || it->second == "yes";
    }

    // comma-separated list of doubles
    std::vector<double> get_list(const std::string& key,
                                 const std::vector<double>& dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        std::vector<double> out;
        std::istringstream is(it->second);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            trim(tok);
            if (!tok.empty()) out.push_back(std::stod(tok));
        }
        return out;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    static void trim(std::string& s) {
        const char* ws = " \t\r\n";
        const auto b = s.find_first_not_of(ws);
        const auto e = s.find_last_not_of(ws);
        s = (b == std::string::npos) ? std::string() : s.substr(b, e - b + 1);
    }
    std::map<std::string, std::string> values_;
};

}  // namespace fedprice
