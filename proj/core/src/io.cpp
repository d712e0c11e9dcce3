#include "nphmm/io.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nphmm {

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_grid_record(std::ostream& os, const GridFunction& grid) {
    os << "D " << grid.level << "\n";
    os << "values";
    for (double v : grid.values) os << ' ' << format_double(v);
    os << "\n";
}

namespace {

std::map<std::string, KeyValueLine> to_map(const std::vector<KeyValueLine>& kvs) {
    std::map<std::string, KeyValueLine> m;
    for (const auto& kv : kvs) {
        if (!m.emplace(kv.key, kv).second)
            throw std::invalid_argument("duplicate key '" + kv.key + "' at line " +
                                        std::to_string(kv.line));
    }
    return m;
}

const KeyValueLine& require_key(const std::map<std::string, KeyValueLine>& m,
                                const std::string& key) {
    auto it = m.find(key);
    if (it == m.end()) throw std::invalid_argument("missing key '" + key + "'");
    return it->second;
}

GridFunction grid_from_fields(const KeyValueLine& level_kv, const KeyValueLine& values_kv) {
    const long long level = parse_int_field(level_kv);
    if (level < 0 || level > 30)
        throw std::invalid_argument("field '" + level_kv.key + "' out of range");
    const auto tokens = split_ws(values_kv.value);
    if (tokens.size() != cell_count(static_cast<int>(level)))
        throw std::invalid_argument("field '" + values_kv.key + "' has " +
                                    std::to_string(tokens.size()) + " values, expected " +
                                    std::to_string(cell_count(static_cast<int>(level))));
    std::vector<double> values;
    values.reserve(tokens.size());
    for (const auto& t : tokens) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(t, &used));
            if (used != t.size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw std::invalid_argument("field '" + values_kv.key +
                                        "' has a non-numeric entry '" + t + "'");
        }
    }
    return GridFunction(static_cast<int>(level), std::move(values));
}

}  // namespace

GridFunction read_grid_record(std::istream& is) {
    const auto kvs = parse_key_values(is);
    const auto m = to_map(kvs);
    for (const auto& kv : kvs)
        if (kv.key != "D" && kv.key != "values")
            throw std::invalid_argument("unknown key '" + kv.key + "' at line " +
                                        std::to_string(kv.line));
    return grid_from_fields(require_key(m, "D"), require_key(m, "values"));
}

void write_grid_file(const std::string& path, const GridFunction& grid) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_grid_record(os, grid);
}

GridFunction read_grid_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_grid_record(is);
}

void write_model_record(std::ostream& os, const ModelParams& theta) {
    os << "p " << format_double(theta.p) << "\n";
    os << "q " << format_double(theta.q) << "\n";
    os << "f0_D " << theta.f0.level << "\n";
    os << "f0_values";
    for (double v : theta.f0.values) os << ' ' << format_double(v);
    os << "\n";
    os << "f1_D " << theta.f1.level << "\n";
    os << "f1_values";
    for (double v : theta.f1.values) os << ' ' << format_double(v);
    os << "\n";
}

ModelParams read_model_record(std::istream& is) {
    const auto kvs = parse_key_values(is);
    const auto m = to_map(kvs);
    for (const auto& kv : kvs) {
        if (kv.key != "p" && kv.key != "q" && kv.key != "f0_D" && kv.key != "f0_values" &&
            kv.key != "f1_D" && kv.key != "f1_values")
            throw std::invalid_argument("unknown key '" + kv.key + "' at line " +
                                        std::to_string(kv.line));
    }
    ModelParams theta;
    theta.p = parse_double_field(require_key(m, "p"));
    theta.q = parse_double_field(require_key(m, "q"));
    theta.f0 = grid_from_fields(require_key(m, "f0_D"), require_key(m, "f0_values"));
    theta.f1 = grid_from_fields(require_key(m, "f1_D"), require_key(m, "f1_values"));
    validate_model(theta);
    return theta;
}

void write_model_file(const std::string& path, const ModelParams& theta) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_model_record(os, theta);
}

ModelParams read_model_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return read_model_record(is);
}

std::vector<KeyValueLine> parse_key_values(std::istream& is) {
    std::vector<KeyValueLine> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;
        std::string rest;
        std::getline(ls, rest);
        const auto start = rest.find_first_not_of(" \t\r");
        const auto stop = rest.find_last_not_of(" \t\r");
        rest = start == std::string::npos ? std::string() : rest.substr(start, stop - start + 1);
        out.push_back({key, rest, lineno});
    }
    return out;
}

std::vector<KeyValueLine> parse_key_value_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    return parse_key_values(is);
}

double parse_double_field(const KeyValueLine& kv) {
    try {
        std::size_t used = 0;
        const double v = std::stod(kv.value, &used);
        if (used != kv.value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("key '" + kv.key + "' at line " +
                                    std::to_string(kv.line) + ": expected a number, got '" +
                                    kv.value + "'");
    }
}

long long parse_int_field(const KeyValueLine& kv) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(kv.value, &used);
        if (used != kv.value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("key '" + kv.key + "' at line " +
                                    std::to_string(kv.line) +
                                    ": expected an integer, got '" + kv.value + "'");
    }
}

unsigned long long parse_u64_field(const KeyValueLine& kv) {
    try {
        std::size_t used = 0;
        const unsigned long long v = std::stoull(kv.value, &used);
        if (used != kv.value.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument("key '" + kv.key + "' at line " +
                                    std::to_string(kv.line) +
                                    ": expected an unsigned integer, got '" + kv.value + "'");
    }
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) out.push_back(tok);
    return out;
}

}  // namespace nphmm
