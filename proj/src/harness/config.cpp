#include "netpolicy/harness/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

namespace netpolicy::harness {

ConfigError::ConfigError(const std::string& p, const std::string& message)
    : std::runtime_error(p.empty() ? message : p + ": " + message), path(p) {}

namespace {

class Parser {
public:
    Parser(const std::string& text, int line) : s_(text), line_(line) {}

    ConfigValue value() {
        skip_space();
        if (pos_ >= s_.size()) fail("missing value");
        char c = s_[pos_];
        ConfigValue v;
        v.line = line_;
        if (c == '"') {
            v.data = quoted();
        } else if (c == '[') {
            v.data = array();
        } else if (s_.compare(pos_, 4, "true") == 0) {
            pos_ += 4;
            v.data = true;
        } else if (s_.compare(pos_, 5, "false") == 0) {
            pos_ += 5;
            v.data = false;
        } else {
            v.data = number();
        }
        return v;
    }

    void finish() {
        skip_space();
        if (pos_ < s_.size() && s_[pos_] != '#') fail("unexpected trailing characters");
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ConfigError("line " + std::to_string(line_), what);
    }

    void skip_space() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }

    std::string quoted() {
        ++pos_;
        std::string out;
        while (pos_ < s_.size() && s_[pos_] != '"') {
            if (s_[pos_] == '\\' && pos_ + 1 < s_.size()) ++pos_;
            out += s_[pos_++];
        }
        if (pos_ >= s_.size()) fail("unterminated string");
        ++pos_;
        return out;
    }

    ConfigArray array() {
        ++pos_;
        ConfigArray out;
        skip_space();
        if (pos_ < s_.size() && s_[pos_] == ']') {
            ++pos_;
            return out;
        }
        for (;;) {
            out.push_back(value());
            skip_space();
            if (pos_ >= s_.size()) fail("unterminated array");
            if (s_[pos_] == ',') {
                ++pos_;
                skip_space();
                if (pos_ < s_.size() && s_[pos_] == ']') {
                    ++pos_;
                    return out;
                }
                continue;
            }
            if (s_[pos_] == ']') {
                ++pos_;
                return out;
            }
            fail("expected ',' or ']' in array");
        }
    }

    double number() {
        std::size_t start = pos_;
        while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.' ||
                                    s_[pos_] == '-' || s_[pos_] == '+' || s_[pos_] == '_')) {
            ++pos_;
        }
        std::string token = s_.substr(start, pos_ - start);
        std::string cleaned;
        for (char c : token) {
            if (c != '_') cleaned += c;
        }
        if (cleaned.empty()) fail("expected a value");
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(cleaned, &used);
        } catch (const std::exception&) {
            fail("invalid number '" + token + "'");
        }
        if (used != cleaned.size() || !std::isfinite(v)) fail("invalid number '" + token + "'");
        return v;
    }

    const std::string& s_;
    std::size_t pos_ = 0;
    int line_;
};

std::string strip_comment(const std::string& line) {
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_string = !in_string;
        if (line[i] == '#' && !in_string) return line.substr(0, i);
    }
    return line;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

int bracket_balance(const std::string& s) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '"' && (i == 0 || s[i - 1] != '\\')) in_string = !in_string;
        if (in_string) continue;
        if (s[i] == '[') ++depth;
        if (s[i] == ']') --depth;
    }
    return depth;
}

bool valid_key(const std::string& k) {
    if (k.empty()) return false;
    for (char c : k) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-')) return false;
    }
    return true;
}

}  // namespace

ConfigDocument ConfigDocument::parse(const std::string& text) {
    ConfigDocument doc;
    std::istringstream in(text);
    std::string raw, table;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no);
        if (line.front() == '[' && line.find('=') == std::string::npos) {
            if (line.back() != ']') throw ConfigError(where, "malformed table header");
            table = trim(line.substr(1, line.size() - 2));
            if (!valid_key(table)) throw ConfigError(where, "invalid table name '" + table + "'");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(where, "expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        if (!valid_key(key)) throw ConfigError(where, "invalid key '" + key + "'");
        std::string rhs = trim(line.substr(eq + 1));
        // Arrays may continue over several lines.
        while (bracket_balance(rhs) > 0 && std::getline(in, raw)) {
            ++line_no;
            rhs += " " + trim(strip_comment(raw));
        }
        Parser p(rhs, line_no);
        ConfigValue v = p.value();
        p.finish();
        std::string full = table.empty() ? key : table + "." + key;
        if (doc.values_.count(full)) throw ConfigError(full, "duplicate key");
        doc.values_[full] = std::move(v);
    }
    return doc;
}

ConfigDocument ConfigDocument::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError(path, "cannot open configuration file");
    std::stringstream buf;
    buf << f.rdbuf();
    return parse(buf.str());
}

bool ConfigDocument::has(const std::string& key) const { return values_.count(key) > 0; }

const ConfigValue& ConfigDocument::raw(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(key, "required key is missing");
    used_.insert(key);
    return it->second;
}

bool ConfigDocument::is_string(const std::string& key) const {
    auto it = values_.find(key);
    return it != values_.end() && std::holds_alternative<std::string>(it->second.data);
}

double ConfigDocument::number(const std::string& key) const {
    const auto& v = raw(key);
    if (auto d = std::get_if<double>(&v.data)) return *d;
    throw ConfigError(key, "expected a number");
}

double ConfigDocument::number_or(const std::string& key, double fallback) const {
    return has(key) ? number(key) : fallback;
}

std::int64_t ConfigDocument::integer(const std::string& key) const {
    double d = number(key);
    if (std::floor(d) != d || std::abs(d) > 9.0e15) throw ConfigError(key, "expected an integer");
    return static_cast<std::int64_t>(d);
}

std::int64_t ConfigDocument::integer_or(const std::string& key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

bool ConfigDocument::boolean_or(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto& v = raw(key);
    if (auto b = std::get_if<bool>(&v.data)) return *b;
    throw ConfigError(key, "expected true or false");
}

std::string ConfigDocument::string(const std::string& key) const {
    const auto& v = raw(key);
    if (auto s = std::get_if<std::string>(&v.data)) return *s;
    throw ConfigError(key, "expected a string");
}

std::string ConfigDocument::string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? string(key) : fallback;
}

std::vector<double> ConfigDocument::numbers(const std::string& key) const {
    const auto& v = raw(key);
    if (auto d = std::get_if<double>(&v.data)) return {*d};
    auto a = std::get_if<ConfigArray>(&v.data);
    if (!a) throw ConfigError(key, "expected a number or an array of numbers");
    std::vector<double> out;
    for (const auto& e : *a) {
        auto d = std::get_if<double>(&e.data);
        if (!d) throw ConfigError(key, "expected an array of numbers");
        out.push_back(*d);
    }
    return out;
}

std::vector<double> ConfigDocument::numbers_or(const std::string& key, std::vector<double> fallback) const {
    return has(key) ? numbers(key) : fallback;
}

void ConfigDocument::check_all_used() const {
    for (const auto& [key, v] : values_) {
        if (!used_.count(key)) throw ConfigError(key, "unknown key (line " + std::to_string(v.line) + ")");
    }
}

}  // namespace netpolicy::harness
