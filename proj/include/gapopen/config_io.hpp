#pragma once

// YAML run configuration and the plain-text/CSV writers used by the tools.

#include "gapopen/errors.hpp"
#include "gapopen/model.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace gapopen {

/// Everything a run needs besides the operator itself.
struct RunConfig {
    OperatorConfig op;
    int cutoff_N = 16;        // plane-wave solver
    int cutoff_Q = 0;         // 0: default per eps
    double mode_energy_cutoff = 0.0; // reduced solver; 0: 4 E0
    int grid_G1 = 48, grid_G2 = 48;
    std::optional<double> window_C2;
    int n_max = 3;
    int crossing_index = 0;
    int predictor_nodes = 512;
    unsigned long long seed = 0;
    std::string source_text; // raw file contents, hashed into the manifest
};

namespace detail {

inline ConfigParseError parse_error(const YAML::Mark& mark, const std::string& what) {
    std::ostringstream os;
    os << "line " << mark.line + 1 << ", column " << mark.column + 1 << ": " << what;
    return ConfigParseError(os.str());
}

template <class T>
T read_scalar(const YAML::Node& node, const std::string& key) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw parse_error(node.Mark(), "invalid value for '" + key + "'");
    }
}

template <class T>
T get_or(const YAML::Node& parent, const std::string& key, T fallback) {
    const YAML::Node n = parent[key];
    return n ? read_scalar<T>(n, key) : fallback;
}

template <class T>
T require(const YAML::Node& parent, const std::string& key, const std::string& path) {
    const YAML::Node n = parent[key];
    if (!n) throw parse_error(parent.Mark(), "missing key '" + path + "'");
    return read_scalar<T>(n, path);
}

inline FieldTerm parse_term(const YAML::Node& n, const std::string& path) {
    if (!n.IsMap()) throw parse_error(n.Mark(), path + " must be a mapping");
    FieldTerm t;
    const std::string kind = get_or<std::string>(n, "kind", "bump_cos");
    if (kind == "bump_cos") {
        t.kind = FieldTermKind::bump_cos;
    } else if (kind == "constant") {
        t.kind = FieldTermKind::constant;
    } else if (kind == "table") {
        t.kind = FieldTermKind::table;
    } else {
        throw parse_error(n["kind"].Mark(), "unknown field term kind '" + kind + "'");
    }
    t.amplitude = get_or(n, "amplitude", 1.0);
    t.center1 = get_or(n, "center1", 0.5);
    t.half_width1 = get_or(n, "half_width1", 0.4);
    t.center2 = get_or(n, "center2", 0.5);
    t.half_width2 = get_or(n, "half_width2", 0.4);
    t.k1 = get_or(n, "k1", 0);
    t.k2 = get_or(n, "k2", 0);
    t.phase = get_or(n, "phase", 0.0);
    if (t.kind == FieldTermKind::table) {
        t.n1 = require<int>(n, "n1", path + ".n1");
        t.n2 = require<int>(n, "n2", path + ".n2");
        t.grid = require<std::vector<double>>(n, "values", path + ".values");
        if (t.n1 < 1 || t.n2 < 1 || t.grid.size() != static_cast<std::size_t>(t.n1) * t.n2)
            throw parse_error(n.Mark(), path + ": values must hold n1 * n2 entries");
    }
    return t;
}

inline CoefficientField parse_field(const YAML::Node& n, const std::string& path) {
    CoefficientField f;
    if (!n || n.IsNull()) return f;
    if (!n.IsSequence()) throw parse_error(n.Mark(), path + " must be a list of terms");
    for (std::size_t i = 0; i < n.size(); ++i) f.terms.push_back(parse_term(n[i], path + "[" + std::to_string(i) + "]"));
    return f;
}

inline WallProfile parse_wall(const YAML::Node& n) {
    if (!n || !n.IsMap()) throw ConfigParseError("missing mapping 'wall'");
    const double a3 = require<double>(n, "a3", "wall.a3");
    const double c0 = require<double>(n, "c0", "wall.c0");
    const std::string shape = get_or<std::string>(n, "shape", "trapezoid");
    if (shape == "trapezoid") return WallProfile::trapezoid(a3, c0, get_or(n, "height", c0));
    if (shape == "rectangle") return WallProfile::rectangle(a3, c0, get_or(n, "height", c0));
    if (shape == "raised_cosine") return WallProfile::raised_cosine(a3, c0, get_or(n, "peak", 2.0 * c0));
    if (shape == "table") return WallProfile::table(a3, c0, require<std::vector<double>>(n, "samples", "wall.samples"));
    throw parse_error(n["shape"].Mark(), "unknown wall shape '" + shape + "'");
}

} // namespace detail

/// Parses a configuration document; structural checks of the operator are
/// left to validate_config.
inline RunConfig parse_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw detail::parse_error(e.mark, e.msg);
    }
    if (!root.IsMap()) throw ConfigParseError("top level must be a mapping");
    using detail::get_or;
    using detail::require;
    RunConfig rc;
    rc.source_text = text;
    const YAML::Node lat = root["lattice"];
    if (!lat) throw detail::parse_error(root.Mark(), "missing mapping 'lattice'");
    rc.op.lattice.a1 = require<double>(lat, "a1", "lattice.a1");
    rc.op.lattice.a2 = require<double>(lat, "a2", "lattice.a2");
    rc.op.wall = detail::parse_wall(root["wall"]);
    if (const YAML::Node c = root["coeffs"]) {
        rc.op.coeffs.margin = get_or(c, "margin", 0.1);
        rc.op.coeffs.a11 = detail::parse_field(c["A11"], "coeffs.A11");
        rc.op.coeffs.a1 = detail::parse_field(c["A1"], "coeffs.A1");
        rc.op.coeffs.a0 = detail::parse_field(c["A0"], "coeffs.A0");
    }
    rc.op.alpha = require<double>(root, "alpha", "alpha");
    rc.op.epsilons = require<std::vector<double>>(root, "epsilons", "epsilons");
    rc.op.coefficient_resolution = get_or(root, "coefficient_resolution", 4096);
    if (const YAML::Node c = root["cutoffs"]) {
        rc.cutoff_N = get_or(c, "N", rc.cutoff_N);
        rc.cutoff_Q = get_or(c, "Q", rc.cutoff_Q);
        rc.mode_energy_cutoff = get_or(c, "Ecut", rc.mode_energy_cutoff);
    }
    if (const YAML::Node g = root["grid"]) {
        rc.grid_G1 = get_or(g, "G1", rc.grid_G1);
        rc.grid_G2 = get_or(g, "G2", rc.grid_G2);
    }
    if (const YAML::Node w = root["window"]; w && w["C2"]) rc.window_C2 = detail::read_scalar<double>(w["C2"], "window.C2");
    if (const YAML::Node c = root["crossing"]) {
        rc.n_max = get_or(c, "n_max", rc.n_max);
        rc.crossing_index = get_or(c, "index", rc.crossing_index);
    }
    rc.predictor_nodes = get_or(root, "predictor_nodes", rc.predictor_nodes);
    rc.seed = get_or<unsigned long long>(root, "seed", 0ULL);
    return rc;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingFile("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// Output

inline std::string sha256_hex(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
    return os.str();
}

/// Shortest exact-enough text for a double: 17 significant digits.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// CSV with a `# key: value` comment preamble followed by the header row.
class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& columns,
              const std::vector<std::pair<std::string, std::string>>& preamble)
        : out_(path, std::ios::binary) {
        if (!out_) throw MissingFile("cannot write " + path.string());
        for (const auto& [k, v] : preamble) out_ << "# " << k << ": " << v << "\n";
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << "\n";
    }

    template <class... Ts>
    void row(const Ts&... values) {
        bool first = true;
        ((out_ << (first ? "" : ",") << cell(values), first = false), ...);
        out_ << "\n";
    }

private:
    static std::string cell(double v) { return fmt(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(long v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    std::ofstream out_;
};

} // namespace gapopen
