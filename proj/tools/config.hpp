#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "loopcool/model.hpp"
#include "loopcool/modes.hpp"

namespace loopcool::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Entry {
    std::string value;
    std::string origin;  // "file:line" or "--set"
};

// Flat key=value text with [section] headers; keys are stored as "section.key".
class Config {
public:
    void merge_text(const std::string& text, const std::string& origin);
    void set(const std::string& key, const std::string& value, const std::string& origin);
    bool has(const std::string& key) const { return entries_.count(key) != 0; }
    const Entry& at(const std::string& key) const;
    const std::map<std::string, Entry>& entries() const { return entries_; }

private:
    std::map<std::string, Entry> entries_;
};

struct Axis {
    std::string path;
    double start = 0;
    double stop = 0;
    int points = 0;

    double value(int i) const;
};

struct SweepSpec {
    Axis axis1;
    std::optional<Axis> axis2;
    std::vector<std::string> outputs;
    CouplingApprox approx;
};

struct SpectrumRange {
    double omega_min = 0.9;
    double omega_max = 1.1;
    int points = 801;
};

struct Resolved {
    SystemSpec spec;
    CouplingApprox approx;
    std::optional<SweepSpec> sweep;
    SpectrumRange spectrum;
    LambdaSystem lambda;
    int workers = 1;
};

double parse_number(const std::string& text);
std::vector<double> parse_list(const std::string& text);

Resolved resolve(const Config& cfg);

// Sets a sweepable parameter such as "kappa", "eta", "theta[1]", "omega_m[2]" (indices are 1-based).
void apply_parameter(SystemSpec& spec, const std::string& path, double value);

const std::map<std::string, std::string>& presets();

}  // namespace loopcool::cli
