// Deterministic report output and the flat key-value config format.
//
// JSON reports are emitted with keys in insertion order and every floating
// point field printed with %.17g, so identical runs produce identical bytes.
// Configs are "[section]" headers over "key = value" lines; '#' comments.

#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "montoda/common.hpp"

namespace montoda {

// ------------------------------------------------------------ JSON out ----

class JsonWriter {
public:
    JsonWriter() { out_ << "{"; }

    JsonWriter& field(const std::string& key, double v) {
        sep();
        out_ << '"' << key << "\":" << num(v);
        return *this;
    }
    JsonWriter& field(const std::string& key, int v) {
        sep();
        out_ << '"' << key << "\":" << v;
        return *this;
    }
    JsonWriter& field(const std::string& key, long v) {
        sep();
        out_ << '"' << key << "\":" << v;
        return *this;
    }
    JsonWriter& field(const std::string& key, bool v) {
        sep();
        out_ << '"' << key << "\":" << (v ? "true" : "false");
        return *this;
    }
    JsonWriter& field(const std::string& key, const std::string& v) {
        sep();
        out_ << '"' << key << "\":\"" << v << '"';
        return *this;
    }
    JsonWriter& field(const std::string& key, cx v) {
        sep();
        out_ << '"' << key << "\":{\"re\":" << num(v.real()) << ",\"im\":" << num(v.imag()) << "}";
        return *this;
    }
    JsonWriter& field(const std::string& key, const std::vector<double>& v) {
        sep();
        out_ << '"' << key << "\":[";
        for (size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << num(v[i]);
        out_ << ']';
        return *this;
    }
    JsonWriter& field(const std::string& key, const std::vector<int>& v) {
        sep();
        out_ << '"' << key << "\":[";
        for (size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
        out_ << ']';
        return *this;
    }
    JsonWriter& field(const std::string& key, const std::vector<long>& v) {
        sep();
        out_ << '"' << key << "\":[";
        for (size_t i = 0; i < v.size(); ++i) out_ << (i ? "," : "") << v[i];
        out_ << ']';
        return *this;
    }
    JsonWriter& field(const std::string& key, const std::vector<cx>& v) {
        sep();
        out_ << '"' << key << "\":[";
        for (size_t i = 0; i < v.size(); ++i)
            out_ << (i ? "," : "") << "{\"re\":" << num(v[i].real()) << ",\"im\":" << num(v[i].imag()) << "}";
        out_ << ']';
        return *this;
    }
    JsonWriter& raw_field(const std::string& key, const std::string& raw_json) {
        sep();
        out_ << '"' << key << "\":" << raw_json;
        return *this;
    }

    std::string str() const { return out_.str() + "}"; }

    static std::string num(double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    // complex matrix as nested arrays of {re, im}
    template <typename Mat>
    static std::string matrix(const Mat& m) {
        std::ostringstream os;
        os << '[';
        for (int i = 0; i < m.size(); ++i) {
            os << (i ? ",[" : "[");
            for (int j = 0; j < m.size(); ++j) {
                cx v = m(i, j);
                os << (j ? "," : "") << "{\"re\":" << num(v.real()) << ",\"im\":" << num(v.imag()) << "}";
            }
            os << ']';
        }
        os << ']';
        return os.str();
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }
    std::ostringstream out_;
    bool first_ = true;
};

// -------------------------------------------------------------- config ----

class Config {
public:
    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw error("config: cannot open " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw error("config: bad section header at line " + std::to_string(lineno));
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            size_t eq = line.find('=');
            if (eq == std::string::npos) throw error("config: expected key = value at line " + std::to_string(lineno));
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            if (key.empty()) throw error("config: empty key at line " + std::to_string(lineno));
            cfg.values_[section + "." + key] = val;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }
    std::string require_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw error("config: missing required key '" + key + "'");
        return it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_double(it->second, key);
    }
    double require_double(const std::string& key) const { return to_double(require_string(key), key); }

    int get_int(const std::string& key, int fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_int(it->second, key);
    }
    int require_int(const std::string& key) const { return to_int(require_string(key), key); }

    std::vector<double> get_double_list(const std::string& key) const {
        std::vector<double> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        std::istringstream in(it->second);
        std::string item;
        while (std::getline(in, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(to_double(item, key));
        }
        return out;
    }
    std::vector<int> get_int_list(const std::string& key) const {
        std::vector<int> out;
        for (double v : get_double_list(key)) out.push_back(static_cast<int>(std::lround(v)));
        return out;
    }

private:
    static std::string trim(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }
    static double to_double(const std::string& s, const std::string& key) {
        try {
            size_t pos = 0;
            double v = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw error("config: bad numeric value for '" + key + "': " + s);
        }
    }
    static int to_int(const std::string& s, const std::string& key) {
        try {
            size_t pos = 0;
            int v = std::stoi(s, &pos);
            if (pos != s.size()) throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw error("config: bad integer value for '" + key + "': " + s);
        }
    }

    std::map<std::string, std::string> values_;
};

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path);
    out << content;
}

} // namespace montoda
