#pragma once

// Serialization: JSON for curves, rational maps and Nahm data; the volume
// format (one JSON header line, then CSV rows); INI run configuration.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <nlohmann/json.hpp>

#include "monopole/errors.hpp"
#include "monopole/grid.hpp"
#include "monopole/minitwistor.hpp"
#include "monopole/nahm.hpp"
#include "monopole/rational_map.hpp"
#include "monopole/su2.hpp"

namespace monopole::io {

using json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Scalars and small types

inline json to_json(cplx c) { return json::array({c.real(), c.imag()}); }

inline cplx complex_from_json(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (!j.is_array() || j.size() != 2) throw ValidationError("bad-json", "complex numbers are [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline json to_json(const std::vector<cplx>& v) {
    json a = json::array();
    for (const cplx& c : v) a.push_back(to_json(c));
    return a;
}

inline std::vector<cplx> complex_vector_from_json(const json& j) {
    std::vector<cplx> v;
    for (const auto& e : j) v.push_back(complex_from_json(e));
    return v;
}

inline json to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

inline Vec3 vec3_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ValidationError("bad-json", "3-vectors are [x, y, z]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

inline json to_json(const CMat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json r = json::array();
        for (int j = 0; j < m.cols(); ++j) r.push_back(to_json(m(i, j)));
        rows.push_back(r);
    }
    return rows;
}

inline CMat matrix_from_json(const json& j) {
    const int n = static_cast<int>(j.size());
    const int m = n ? static_cast<int>(j[0].size()) : 0;
    CMat out(n, m);
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(j[i].size()) != m) throw ValidationError("bad-json", "ragged matrix");
        for (int c = 0; c < m; ++c) out(i, c) = complex_from_json(j[i][c]);
    }
    return out;
}

inline json to_json(const NahmTriple& T) { return json::array({to_json(T[0]), to_json(T[1]), to_json(T[2])}); }

inline NahmTriple triple_from_json(const json& j) {
    if (!j.is_array() || j.size() != 3) throw ValidationError("bad-json", "a Nahm triple has three matrices");
    NahmTriple T{matrix_from_json(j[0]), matrix_from_json(j[1]), matrix_from_json(j[2])};
    triple_size(T);
    return T;
}

// ---------------------------------------------------------------------------
// Curves and maps

inline json to_json(const SpectralCurvePoly& p) {
    json a = json::array();
    for (int i = 1; i <= p.k(); ++i) a.push_back(to_json(p.coeffs(i)));
    return json{{"k", p.k()}, {"a", a}};
}

inline SpectralCurvePoly curve_from_json(const json& j) {
    std::vector<std::vector<cplx>> a;
    for (const auto& e : j.at("a")) a.push_back(complex_vector_from_json(e));
    return SpectralCurvePoly(j.at("k").get<int>(), a);
}

inline json to_json(const RationalMap& m) {
    return json{{"p", to_json(m.p())},       {"q", to_json(m.q())},         {"based", m.based()},
                {"degree", m.degree()},      {"poles", to_json(m.poles())}, {"zeros", to_json(m.zeros())}};
}

inline RationalMap rational_map_from_json(const json& j) {
    return RationalMap(complex_vector_from_json(j.at("p")), complex_vector_from_json(j.at("q")),
                       j.value("based", false));
}

// ---------------------------------------------------------------------------
// Nahm data

inline json to_json(const NahmData& d) {
    json T = json::array();
    for (const auto& t : d.samples()) T.push_back(to_json(t));
    json meta = json::object();
    meta["plus"] = d.pole_meta().plus ? to_json(*d.pole_meta().plus) : json(nullptr);
    meta["minus"] = d.pole_meta().minus ? to_json(*d.pole_meta().minus) : json(nullptr);
    return json{{"k", d.k()}, {"z_samples", d.z_samples()}, {"T", T}, {"pole_meta", meta}};
}

inline NahmData nahm_from_json(const json& j) {
    std::vector<double> z = j.at("z_samples").get<std::vector<double>>();
    std::vector<NahmTriple> T;
    for (const auto& t : j.at("T")) T.push_back(triple_from_json(t));
    PoleMeta meta;
    if (j.contains("pole_meta") && j["pole_meta"].is_object()) {
        const auto& m = j["pole_meta"];
        if (m.contains("plus") && !m["plus"].is_null()) meta.plus = triple_from_json(m["plus"]);
        if (m.contains("minus") && !m["minus"].is_null()) meta.minus = triple_from_json(m["minus"]);
    }
    NahmData d = NahmData::sampled(std::move(z), std::move(T), meta);
    if (d.k() != j.at("k").get<int>()) throw ValidationError("shape-mismatch", "k does not match the matrix size");
    return d;
}

// ---------------------------------------------------------------------------
// Files

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("io-error", "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("io-error", "cannot write " + path);
    out << text;
    if (!out) throw IoError("io-error", "write failed for " + path);
}

inline json read_json(const std::string& path) {
    try {
        return json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw IoError("io-error", path + ": " + e.what());
    }
}

inline void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

/// Shortest round-trip text for a double.
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Volume format

/// One row per grid point; `values[n]` has `columns` entries. Real fields use
/// one column; matrix fields store (re, im) pairs.
struct Volume {
    GridSpec grid;
    std::string field;
    std::string units;
    int columns = 1;
    std::vector<std::vector<double>> values;
};

inline json volume_header(const Volume& v) {
    json h;
    h["nx"] = v.grid.counts[0];
    h["ny"] = v.grid.counts[1];
    h["nz"] = v.grid.counts[2];
    h["origin"] = to_json(v.grid.origin);
    h["spacing"] = to_json(v.grid.spacing);
    h["field"] = v.field;
    h["units"] = v.units;
    return h;
}

inline void write_volume(std::ostream& out, const Volume& v) {
    if (v.values.size() != v.grid.size()) throw ValidationError("shape-mismatch", "volume value count differs from grid");
    out << volume_header(v).dump() << "\n";
    for (std::size_t n = 0; n < v.values.size(); ++n) {
        const auto i = v.grid.unflatten(n);
        out << i[0] << ',' << i[1] << ',' << i[2];
        if (static_cast<int>(v.values[n].size()) != v.columns)
            throw ValidationError("shape-mismatch", "row has the wrong column count");
        for (double x : v.values[n]) out << ',' << fmt(x);
        out << '\n';
    }
}

inline void write_volume(const std::string& path, const Volume& v) {
    std::ostringstream ss;
    write_volume(ss, v);
    write_file(path, ss.str());
}

inline Volume scalar_volume(const GridSpec& g, std::string field, std::string units, const std::vector<double>& vals) {
    Volume v{g, std::move(field), std::move(units), 1, {}};
    v.values.reserve(vals.size());
    for (double x : vals) v.values.push_back({x});
    return v;
}

inline Volume read_volume(std::istream& in, const std::string& name = "volume") {
    std::string line;
    if (!std::getline(in, line)) throw IoError("io-error", name + ": empty volume file");
    json h;
    try {
        h = json::parse(line);
    } catch (const json::exception& e) {
        throw IoError("io-error", name + ": bad header: " + e.what());
    }
    Volume v;
    try {
        v.grid.counts = {h.at("nx").get<int>(), h.at("ny").get<int>(), h.at("nz").get<int>()};
        v.grid.origin = vec3_from_json(h.at("origin"));
        v.grid.spacing = vec3_from_json(h.at("spacing"));
        v.field = h.at("field").get<std::string>();
        v.units = h.at("units").get<std::string>();
    } catch (const json::exception& e) {
        throw IoError("io-error", name + ": header field missing: " + e.what());
    }
    v.grid.validate();
    v.values.assign(v.grid.size(), {});
    std::vector<char> seen(v.grid.size(), 0);
    v.columns = -1;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> cols;
        std::stringstream ss(line);
        std::string cell;
        std::vector<long> idx;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                if (idx.size() < 3) {
                    idx.push_back(std::stol(cell, &used));
                } else {
                    cols.push_back(std::stod(cell, &used));
                }
                if (used != cell.size()) throw std::invalid_argument(cell);
            } catch (const std::exception&) {
                throw IoError("io-error", name + ": unparsable cell '" + cell + "'");
            }
        }
        if (idx.size() < 3 || cols.empty()) throw IoError("io-error", name + ": short row");
        if (v.columns < 0) v.columns = static_cast<int>(cols.size());
        if (static_cast<int>(cols.size()) != v.columns) throw IoError("io-error", name + ": inconsistent column count");
        for (int a = 0; a < 3; ++a)
            if (idx[a] < 0 || idx[a] >= v.grid.counts[a]) throw IoError("io-error", name + ": index out of range");
        const std::size_t n = v.grid.index(int(idx[0]), int(idx[1]), int(idx[2]));
        if (seen[n]) throw IoError("io-error", name + ": duplicate row");
        seen[n] = 1;
        v.values[n] = std::move(cols);
        ++rows;
    }
    if (rows != v.grid.size()) throw IoError("io-error", name + ": expected " + std::to_string(v.grid.size()) + " rows");
    return v;
}

inline Volume read_volume(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("io-error", "cannot open " + path);
    return read_volume(in, path);
}

/// Field name used for full configuration volumes: four 2x2 matrices per
/// row, entries (0,0),(0,1),(1,0),(1,1), each as (re, im).
inline constexpr const char* kConfigurationField = "A1,A2,A3,Phi";

inline Volume configuration_volume(const GridSpec& g, const std::vector<FieldValue>& vals) {
    Volume v{g, kConfigurationField, "matrix-entries", 32, {}};
    v.values.reserve(vals.size());
    for (const auto& f : vals) {
        std::vector<double> row;
        row.reserve(32);
        const Mat2* ms[4] = {&f.A[0].matrix(), &f.A[1].matrix(), &f.A[2].matrix(), &f.Phi.matrix()};
        for (const Mat2* m : ms)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    row.push_back((*m)(i, j).real());
                    row.push_back((*m)(i, j).imag());
                }
        v.values.push_back(std::move(row));
    }
    return v;
}

inline std::vector<FieldValue> configuration_from_volume(const Volume& v) {
    if (v.field != kConfigurationField || v.columns != 32)
        throw ValidationError("bad-volume", "volume does not hold a full configuration (field '" + v.field + "')");
    std::vector<FieldValue> out(v.values.size());
    for (std::size_t n = 0; n < v.values.size(); ++n) {
        const auto& r = v.values[n];
        Mat2 m[4];
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    const std::size_t o = 8 * k + 2 * (2 * i + j);
                    m[k](i, j) = cplx(r[o], r[o + 1]);
                }
        out[n] = FieldValue{{Su2Element(m[0]), Su2Element(m[1]), Su2Element(m[2])}, Su2Element(m[3])};
    }
    return out;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    GridSpec grid;
    double ode_tol = 1e-10;
    double fd_step = 1e-3;
    int quad_order = 64;
    double t_max = 25.0;
    int k = 1;
    unsigned long seed = 42;
    int thread_cap = 0;  // 0: MONOPOLE_THREADS or hardware

    void validate() const {
        grid.validate();
        if (!(ode_tol > 0) || !(fd_step > 0) || !(t_max > 0) || quad_order < 1)
            throw ValidationError("bad-config", "tolerances must be positive");
        if (k < 0) throw ValidationError("bad-config", "k must be >= 0");
        if (thread_cap < 0) throw ValidationError("bad-config", "thread cap must be >= 0");
    }
};

/// Comma-separated list of 1 or 3 numbers.
inline Vec3 parse_triple(const std::string& s, const std::string& what) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        try {
            std::size_t used = 0;
            const double x = std::stod(cell, &used);
            while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
            if (used != cell.size()) throw std::invalid_argument(cell);
            v.push_back(x);
        } catch (const std::exception&) {
            throw ValidationError("bad-config", what + ": cannot parse '" + s + "'");
        }
    }
    if (v.size() == 1) return Vec3(v[0], v[0], v[0]);
    if (v.size() == 3) return Vec3(v[0], v[1], v[2]);
    throw ValidationError("bad-config", what + ": expected 1 or 3 numbers");
}

namespace detail {

// ptree::get with a default swallows conversion failures; this does not.
template <class T>
void read_key(const boost::property_tree::ptree& tree, const char* key, T& out) {
    auto s = tree.get_optional<std::string>(key);
    if (!s) return;
    std::istringstream ss(*s);
    T v{};
    ss >> v;
    const bool ok = !ss.fail();
    if (ok && !ss.eof()) ss >> std::ws;
    if (!ok || !ss.eof()) throw ValidationError("bad-config", std::string(key) + ": cannot parse '" + *s + "'");
    out = v;
}

}  // namespace detail

inline RunConfig parse_run_config(std::istream& in) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw IoError("io-error", std::string("config: ") + e.what());
    }
    RunConfig c;
    try {
        if (auto s = tree.get_optional<std::string>("grid.origin")) c.grid.origin = parse_triple(*s, "grid.origin");
        if (auto s = tree.get_optional<std::string>("grid.spacing")) c.grid.spacing = parse_triple(*s, "grid.spacing");
        if (auto s = tree.get_optional<std::string>("grid.counts")) {
            const Vec3 n = parse_triple(*s, "grid.counts");
            for (int a = 0; a < 3; ++a) {
                if (n[a] != std::floor(n[a])) throw ValidationError("bad-config", "grid.counts must be integers");
                c.grid.counts[a] = static_cast<int>(n[a]);
            }
        }
        detail::read_key(tree, "tolerances.ode_tol", c.ode_tol);
        detail::read_key(tree, "tolerances.fd_step", c.fd_step);
        detail::read_key(tree, "tolerances.quad_order", c.quad_order);
        detail::read_key(tree, "tolerances.t_max", c.t_max);
        detail::read_key(tree, "run.k", c.k);
        detail::read_key(tree, "run.seed", c.seed);
        detail::read_key(tree, "run.threads", c.thread_cap);
    } catch (const pt::ptree_bad_data& e) {
        throw ValidationError("bad-config", std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("io-error", "cannot open " + path);
    return parse_run_config(in);
}

}  // namespace monopole::io
