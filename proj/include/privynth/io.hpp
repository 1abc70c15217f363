/*
 Copyright 2026 The privynth Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#ifndef PRIVYNTH_IO_HPP
#define PRIVYNTH_IO_HPP

#include "privynth/hvac.hpp"
#include "privynth/structured.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

namespace privynth {

using Json = nlohmann::json;

/// Unreadable or malformed input files. Maps to the same exit status as
/// InvalidInput.
class InputError : public InvalidInput {
public:
    using InvalidInput::InvalidInput;
};

namespace detail {

inline bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

/// Quotes bare NaN / Infinity tokens (optionally signed) outside strings so
/// that a strict parser accepts the document and the entry can be reported
/// by position instead of as a syntax error.
inline std::string quote_nonfinite_tokens(const std::string& text) {
    static const std::array<std::string_view, 6> tokens{"-Infinity", "Infinity", "-NaN", "NaN", "-inf", "inf"};
    std::string out;
    out.reserve(text.size() + 16);
    bool in_string = false;
    for (std::size_t i = 0; i < text.size();) {
        const char c = text[i];
        if (in_string) {
            out += c;
            if (c == '\\' && i + 1 < text.size()) {
                out += text[i + 1];
                i += 2;
                continue;
            }
            in_string = c != '"';
            ++i;
            continue;
        }
        if (c == '"') {
            in_string = true;
            out += c;
            ++i;
            continue;
        }
        bool replaced = false;
        if (i == 0 || !is_word_char(text[i - 1])) {
            for (auto tok : tokens) {
                const std::size_t end = i + tok.size();
                if (text.compare(i, tok.size(), tok) == 0 && (end >= text.size() || !is_word_char(text[end]))) {
                    out += '"';
                    out += tok;
                    out += '"';
                    i = end;
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) {
            out += c;
            ++i;
        }
    }
    return out;
}

inline std::pair<std::size_t, std::size_t> line_column(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

/// Reason part of a parser message, without the library's prefix and
/// position.
inline std::string parse_reason(const std::string& what) {
    const auto colon = what.find(": ", what.find("parse error"));
    return colon == std::string::npos ? what : what.substr(colon + 2);
}

inline std::string path_label(std::string_view name, const std::vector<std::size_t>& idx) {
    std::ostringstream oss;
    oss << name;
    for (auto i : idx) {
        oss << '[' << i << ']';
    }
    return oss.str();
}

inline double number_at(const Json& v, std::string_view name, const std::vector<std::size_t>& idx) {
    if (v.is_string()) {
        throw InvalidInput(concat("non-finite entry at ", path_label(name, idx)));
    }
    if (!v.is_number()) {
        throw InvalidInput(concat("entry ", path_label(name, idx), " is not a number"));
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw InvalidInput(concat("non-finite entry at ", path_label(name, idx)));
    }
    return x;
}

} // namespace detail

/// Parses JSON text. Errors carry the 1-based line and column.
inline Json parse_json(const std::string& text, std::string_view source = "input") {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        try {
            return Json::parse(detail::quote_nonfinite_tokens(text));
        } catch (const Json::parse_error&) {
            const auto [line, col] = detail::line_column(text, e.byte);
            throw InputError(detail::concat("parse error in ", source, " at line ", line, ", column ", col, ": ",
                                            detail::parse_reason(e.what())));
        }
    }
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw InputError(detail::concat("cannot read file '", path.string(), "'"));
    }
    std::ostringstream oss;
    oss << in.rdbuf();
    return oss.str();
}

inline Json read_json_file(const std::filesystem::path& path) {
    return parse_json(read_text_file(path), path.string());
}

inline Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Index j = 0; j < m.cols(); ++j) {
            row.push_back(m(i, j));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Index i = 0; i < v.size(); ++i) {
        out.push_back(v(i));
    }
    return out;
}

/// Row-major nested array -> matrix. Rejects ragged, empty, non-numeric and
/// non-finite entries, naming the offending position (e.g. "A[0][1]").
inline Matrix matrix_from_json(const Json& j, std::string_view name) {
    if (!j.is_array() || j.empty()) {
        throw InvalidInput(detail::concat(name, " must be a nonempty array of rows"));
    }
    const std::size_t rows = j.size();
    std::size_t cols = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (!j[r].is_array() || j[r].empty()) {
            throw InvalidInput(detail::concat(name, "[", r, "] must be a nonempty array"));
        }
        if (r == 0) {
            cols = j[r].size();
        } else if (j[r].size() != cols) {
            throw InvalidInput(detail::concat(name, " is ragged: row ", r, " has ", j[r].size(), " entries, expected ",
                                              cols));
        }
    }
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = detail::number_at(j[r][c], name, {r, c});
        }
    }
    return m;
}

inline Vector vector_from_json(const Json& j, std::string_view name) {
    if (!j.is_array() || j.empty()) {
        throw InvalidInput(detail::concat(name, " must be a nonempty array"));
    }
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Index>(i)) = detail::number_at(j[i], name, {i});
    }
    return v;
}

/// {"A", "B", "C", "D", "dt"}; B defaults to an n x 1 zero input and D to
/// zeros of the matching shape.
inline LtiSystem system_from_json(const Json& j) {
    if (!j.is_object()) {
        throw InvalidInput("system document must be a JSON object");
    }
    for (const auto& [key, _] : j.items()) {
        if (key != "A" && key != "B" && key != "C" && key != "D" && key != "dt") {
            throw InvalidInput(detail::concat("unknown system key '", key, "'"));
        }
    }
    for (const char* key : {"A", "C"}) {
        if (!j.contains(key)) {
            throw InvalidInput(detail::concat("system is missing required matrix ", key));
        }
    }
    const Matrix A = matrix_from_json(j.at("A"), "A");
    const Matrix C = matrix_from_json(j.at("C"), "C");
    const Matrix B = j.contains("B") ? matrix_from_json(j.at("B"), "B") : Matrix::Zero(A.rows(), 1);
    const Matrix D = j.contains("D") ? matrix_from_json(j.at("D"), "D") : Matrix::Zero(C.rows(), B.cols());
    std::optional<double> dt;
    if (j.contains("dt") && !j.at("dt").is_null()) {
        dt = detail::number_at(j.at("dt"), "dt", {});
    }
    return LtiSystem(A, B, C, D, dt);
}

inline Json system_to_json(const LtiSystem& sys) {
    Json j;
    j["A"] = matrix_to_json(sys.A());
    j["B"] = matrix_to_json(sys.B());
    j["C"] = matrix_to_json(sys.C());
    j["D"] = matrix_to_json(sys.D());
    if (sys.dt()) {
        j["dt"] = *sys.dt();
    }
    return j;
}

/// A bare nested array, or an object holding it under "Sigma_v".
inline Matrix sigma_v_from_json(const Json& j) {
    if (j.is_object()) {
        if (!j.contains("Sigma_v")) {
            throw InvalidInput("Sigma_v document must be a matrix or an object with key \"Sigma_v\"");
        }
        return matrix_from_json(j.at("Sigma_v"), "Sigma_v");
    }
    return matrix_from_json(j, "Sigma_v");
}

inline Json strings_to_json(const std::vector<std::string>& v) {
    Json out = Json::array();
    for (const auto& s : v) {
        out.push_back(s);
    }
    return out;
}

inline Json stacked_to_json(const StackedData& st) {
    return Json{{"horizon", st.horizon}, {"n", st.n}, {"m", st.m}, {"p", st.p}, {"Wo", matrix_to_json(st.Wo)}};
}

inline Json design_to_json(const MechanismDesign& d) {
    return Json{{"Sigma", matrix_to_json(d.Sigma)},
                {"beta_opt", d.beta_opt},
                {"eps_opt", d.eps_opt},
                {"trace_Sigma", d.trace_Sigma},
                {"residual", d.residual},
                {"c_free", d.c_free},
                {"lambda_min_X", d.lambda_min_X},
                {"achieved_confusion", matrix_to_json(d.achieved_confusion)},
                {"range_eigenvalues", vector_to_json(d.range_eigenvalues)},
                {"warnings", strings_to_json(d.warnings)}};
}

inline Json block_design_to_json(const BlockDiagonalDesign& d) {
    Json blocks = Json::array();
    for (const auto& b : d.blocks) {
        blocks.push_back(matrix_to_json(b));
    }
    return Json{{"blocks", blocks},
                {"e_blk", d.e_blk},
                {"trace", d.trace},
                {"iterations", d.iterations},
                {"converged", d.converged},
                {"trace_reduced", d.trace_reduced}};
}

inline Json entropy_design_to_json(const EntropyDesign& d) {
    return Json{{"Sigma_de", matrix_to_json(d.Sigma_de)},
                {"confusion", matrix_to_json(d.confusion)},
                {"objective", d.objective},
                {"entropy_bits", d.entropy_bits},
                {"eps_p", d.eps_p},
                {"trace", d.trace},
                {"kkt_residual", d.kkt_residual},
                {"iterations", d.iterations},
                {"converged", d.converged}};
}

inline Json isotropic_design_to_json(const IsotropicDesign& d) {
    return Json{{"sigma", d.sigma}, {"Sigma", matrix_to_json(d.Sigma)}, {"confusion", matrix_to_json(d.confusion)}};
}

inline Json comparison_to_json(const ComparisonReport& rep) {
    Json mechs = Json::array();
    for (const auto& s : rep.mechanisms) {
        mechs.push_back(Json{{"name", s.name},
                             {"trace", s.trace},
                             {"confusion", matrix_to_json(s.confusion)},
                             {"log2det_confusion", s.log2det_confusion},
                             {"entropy_bits", s.entropy_bits},
                             {"lambda_min_X", s.lambda_min_X},
                             {"surrogate_eps", s.surrogate_eps},
                             {"principal_semi_axes", vector_to_json(s.principal_semi_axes)},
                             {"coordinate_semi_axes", vector_to_json(s.coordinate_semi_axes)}});
    }
    Json pairs = Json::array();
    for (const auto& p : rep.pairs) {
        pairs.push_back(Json{{"first", p.first},
                             {"second", p.second},
                             {"difference_eigenvalues", vector_to_json(p.difference_eigenvalues)},
                             {"ordering", to_string(p.ordering)}});
    }
    return Json{{"gamma", rep.gamma}, {"mechanisms", mechs}, {"pairs", pairs}};
}

inline Json coverage_to_json(const CoverageReport& r) {
    return Json{{"samples", r.samples},
                {"empirical_cov", matrix_to_json(r.empirical_cov)},
                {"target_cov", matrix_to_json(r.target_cov)},
                {"rel_frobenius_error", r.rel_frobenius_error},
                {"coverage_rate", r.coverage_rate},
                {"gamma", r.gamma},
                {"alpha", r.alpha},
                {"mean_bias", vector_to_json(r.mean_bias)},
                {"bias_norm", r.bias_norm}};
}

inline Json zone_model_to_json(const ZoneModel& m) {
    Json edges = Json::array();
    for (Index i = 0; i < m.n_zones; ++i) {
        for (Index j = i + 1; j < m.n_zones; ++j) {
            if (m.adjacency(i, j)) {
                edges.push_back(Json{{"zones", {i, j}}, {"resistance", m.resistance(i, j)}});
            }
        }
    }
    Json measured = Json::array();
    for (Index z : m.measured_zones) {
        measured.push_back(z);
    }
    Json j{{"n_zones", m.n_zones},
           {"capacitance", vector_to_json(m.capacitance)},
           {"edges", edges},
           {"dt", m.dt},
           {"measured_zones", measured}};
    if (m.has_ambient()) {
        j["ambient_resistance"] = vector_to_json(m.ambient_resistance);
    }
    return j;
}

namespace detail {

inline Range range_from_json(const Json& j, std::string_view name) {
    const Vector v = vector_from_json(j, name);
    if (v.size() != 2) {
        throw InvalidInput(concat(name, " must be [low, high]"));
    }
    return {v(0), v(1)};
}

inline Index index_from_json(const Json& j, std::string_view name) {
    if (!j.is_number_integer()) {
        throw InvalidInput(concat(name, " must be an integer"));
    }
    return j.get<Index>();
}

inline std::vector<Index> indices_from_json(const Json& j, std::string_view name) {
    if (!j.is_array()) {
        throw InvalidInput(concat(name, " must be an array of integers"));
    }
    std::vector<Index> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        out.push_back(index_from_json(j[i], concat(name, "[", i, "]")));
    }
    return out;
}

inline std::pair<Index, Index> index_pair_from_json(const Json& j, std::string_view name) {
    const auto v = indices_from_json(j, name);
    if (v.size() != 2) {
        throw InvalidInput(concat(name, " must have exactly two entries"));
    }
    return {v[0], v[1]};
}

} // namespace detail

/// Case-study configuration: every key is optional and overrides the
/// default; unknown keys are rejected.
inline CaseStudyConfig case_study_config_from_json(const Json& j, CaseStudyConfig cfg = {}) {
    using namespace detail;
    if (!j.is_object()) {
        throw InvalidInput("case-study config must be a JSON object");
    }
    for (const auto& [key, v] : j.items()) {
        if (key == "Sigma_v") {
            cfg.Sigma_v = matrix_from_json(v, "Sigma_v");
        } else if (key == "horizon") {
            cfg.horizon = index_from_json(v, key);
        } else if (key == "max_horizon") {
            cfg.max_horizon = index_from_json(v, key);
        } else if (key == "gamma") {
            cfg.gamma = number_at(v, key, {});
        } else if (key == "alpha") {
            cfg.alpha = number_at(v, key, {});
        } else if (key == "seed") {
            if (!v.is_number_unsigned()) {
                throw InvalidInput("seed must be a nonnegative integer");
            }
            cfg.seed = v.get<std::uint64_t>();
        } else if (key == "resistance_range") {
            cfg.resistance_range = range_from_json(v, key);
        } else if (key == "capacitance_range") {
            cfg.capacitance_range = range_from_json(v, key);
        } else if (key == "dt") {
            cfg.dt = number_at(v, key, {});
        } else if (key == "n_zones") {
            cfg.n_zones = index_from_json(v, key);
        } else if (key == "edges") {
            if (!v.is_array()) {
                throw InvalidInput("edges must be an array of [i, j] pairs");
            }
            cfg.edges.clear();
            for (std::size_t e = 0; e < v.size(); ++e) {
                cfg.edges.push_back(index_pair_from_json(v[e], concat("edges[", e, "]")));
            }
        } else if (key == "measured_zones") {
            cfg.measured_zones = indices_from_json(v, key);
        } else if (key == "plane") {
            cfg.plane = index_pair_from_json(v, key);
        } else if (key == "x0") {
            cfg.x0 = vector_from_json(v, key);
        } else if (key == "ambient_leak") {
            if (!v.is_boolean()) {
                throw InvalidInput("ambient_leak must be a boolean");
            }
            cfg.ambient_leak = v.get<bool>();
        } else if (key == "ambient_resistance") {
            cfg.ambient_resistance = number_at(v, key, {});
        } else if (key == "trials") {
            cfg.trials = index_from_json(v, key);
        } else if (key == "ellipse_points") {
            cfg.ellipse_points = static_cast<int>(index_from_json(v, key));
        } else if (key == "c_free") {
            if (v.is_null()) {
                cfg.c_free.reset();
            } else {
                cfg.c_free = number_at(v, key, {});
            }
        } else if (key == "entropy") {
            if (!v.is_object()) {
                throw InvalidInput("entropy must be an object");
            }
            for (const auto& [ek, ev] : v.items()) {
                if (ek == "max_iter") {
                    cfg.entropy.max_iter = static_cast<int>(index_from_json(ev, "entropy.max_iter"));
                } else if (ek == "tol") {
                    cfg.entropy.tol = number_at(ev, "entropy.tol", {});
                } else if (ek == "floor_ratio") {
                    cfg.entropy.floor_ratio = number_at(ev, "entropy.floor_ratio", {});
                } else {
                    throw InvalidInput(concat("unknown entropy option '", ek, "'"));
                }
            }
        } else {
            throw InvalidInput(concat("unknown case-study config key '", key, "'"));
        }
    }
    return cfg;
}

/// Deterministic text form: sorted keys, shortest round-trip doubles.
inline std::string dump_json(const Json& j) {
    return j.dump(2) + "\n";
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw InputError(detail::concat("cannot write file '", path.string(), "'"));
    }
    out << text;
    if (!out) {
        throw InputError(detail::concat("failed writing file '", path.string(), "'"));
    }
}

/// CSV with a header row; doubles at full round-trip precision.
class CsvWriter {
public:
    explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) {
        oss_ << std::setprecision(std::numeric_limits<double>::max_digits10);
        write_row_strings(header);
    }

    template <typename... Cells>
    void row(const Cells&... cells) {
        static_assert(sizeof...(Cells) > 0);
        std::size_t count = 0;
        ((oss_ << (count++ ? "," : ""), put(cells)), ...);
        check(count);
        oss_ << '\n';
    }

    void row_values(const std::vector<double>& values, std::string_view prefix = {}) {
        std::size_t count = 0;
        if (!prefix.empty()) {
            put(prefix);
            ++count;
        }
        for (double v : values) {
            oss_ << (count++ ? "," : "");
            put(v);
        }
        check(count);
        oss_ << '\n';
    }

    std::string str() const { return oss_.str(); }

private:
    void write_row_strings(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            oss_ << (i ? "," : "");
            put(std::string_view(cells[i]));
        }
        oss_ << '\n';
    }

    void put(double v) { oss_ << v; }
    void put(Index v) { oss_ << v; }
    void put(int v) { oss_ << v; }
    void put(std::string_view s) {
        if (s.find_first_of(",\"\n") == std::string_view::npos) {
            oss_ << s;
            return;
        }
        oss_ << '"';
        for (char c : s) {
            oss_ << (c == '"' ? "\"\"" : std::string(1, c));
        }
        oss_ << '"';
    }
    void put(const std::string& s) { put(std::string_view(s)); }
    void put(const char* s) { put(std::string_view(s)); }

    void check(std::size_t count) const {
        if (count != columns_) {
            throw Error(detail::concat("CSV row has ", count, " cells, header has ", columns_));
        }
    }

    std::size_t columns_;
    std::ostringstream oss_;
};

struct RoundtripReport {
    bool identical = false;
    std::vector<std::string> matrices;   ///< keys compared
};

namespace detail {

inline bool looks_like_matrix(const Json& v) {
    return v.is_array() && !v.empty() && v[0].is_array();
}

inline bool bit_identical(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        return false;
    }
    for (Index i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a.data()[i]) != std::bit_cast<std::uint64_t>(b.data()[i])) {
            return false;
        }
    }
    return true;
}

inline std::map<std::string, Matrix> collect_matrices(const Json& doc) {
    std::map<std::string, Matrix> out;
    if (looks_like_matrix(doc)) {
        out.emplace("$", matrix_from_json(doc, "$"));
        return out;
    }
    if (!doc.is_object()) {
        throw InvalidInput("document must be a matrix or an object of matrices");
    }
    for (const auto& [key, v] : doc.items()) {
        if (looks_like_matrix(v)) {
            out.emplace(key, matrix_from_json(v, key));
        }
    }
    if (out.empty()) {
        throw InvalidInput("document contains no matrices");
    }
    return out;
}

} // namespace detail

/**
 * Parse -> serialize -> parse check for a matrix document (a system file,
 * a Sigma_v file, or a design report). Every matrix must survive
 * bit-for-bit. Parse and validation failures throw.
 */
inline RoundtripReport validate_roundtrip(const std::filesystem::path& path) {
    const Json first = read_json_file(path);
    const auto before = detail::collect_matrices(first);
    Json rebuilt = before.count("$") ? Json(matrix_to_json(before.at("$"))) : Json::object();
    for (const auto& [key, m] : before) {
        if (key != "$") {
            rebuilt[key] = matrix_to_json(m);
        }
    }
    const auto after = detail::collect_matrices(parse_json(rebuilt.dump(), "serialized copy"));
    RoundtripReport rep;
    rep.identical = before.size() == after.size();
    for (const auto& [key, m] : before) {
        rep.matrices.push_back(key);
        const auto it = after.find(key);
        rep.identical = rep.identical && it != after.end() && detail::bit_identical(m, it->second);
    }
    return rep;
}

} // namespace privynth

#endif // PRIVYNTH_IO_HPP
