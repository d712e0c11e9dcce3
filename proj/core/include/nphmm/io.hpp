#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "nphmm/grid.hpp"
#include "nphmm/model.hpp"

namespace nphmm {

// shortest representation preserving the double exactly (17 significant digits)
std::string format_double(double v);

// Signed grid record:
//   D <resolution_exponent>
//   values <v0> <v1> ... (2^D entries, 17 significant digits)
void write_grid_record(std::ostream& os, const GridFunction& grid);
GridFunction read_grid_record(std::istream& is);
void write_grid_file(const std::string& path, const GridFunction& grid);
GridFunction read_grid_file(const std::string& path);

// Model record: p, q lines followed by f0/f1 grid records with prefixed keys
// (f0_D, f0_values, f1_D, f1_values).
void write_model_record(std::ostream& os, const ModelParams& theta);
ModelParams read_model_record(std::istream& is);
void write_model_file(const std::string& path, const ModelParams& theta);
ModelParams read_model_file(const std::string& path);

// One "key value..." pair per line; '#' starts a comment; blank lines are
// skipped. line is 1-based, for error reporting.
struct KeyValueLine {
    std::string key;
    std::string value;
    int line = 0;
};
std::vector<KeyValueLine> parse_key_values(std::istream& is);
std::vector<KeyValueLine> parse_key_value_file(const std::string& path);

// parse helpers that throw std::invalid_argument naming the key on failure
double parse_double_field(const KeyValueLine& kv);
long long parse_int_field(const KeyValueLine& kv);
unsigned long long parse_u64_field(const KeyValueLine& kv);
std::vector<std::string> split_ws(const std::string& s);

}  // namespace nphmm
