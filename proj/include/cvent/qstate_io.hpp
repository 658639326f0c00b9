#pragma once

// QSTATE v1: line-oriented UTF-8 text format for sparse density operators
// and amplitude vectors.
//
//   qstate v1
//   kind: density | pure
//   dims: d1 d2 ... dM
//   nnz: K
//   K entry lines: "<row> <col> <re> <im>" (density) or "<index> <re> <im>" (pure)
//
// Lines starting with '#' and blank lines are ignored. Density entries whose
// mirror (col,row) is absent are completed by conjugation; when both are
// present they must agree to 1e-10.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "cvent/errors.hpp"
#include "cvent/states.hpp"

namespace cvent {

using QState = std::variant<DensityState, PureStateVec>;

namespace qstate_detail {

inline std::vector<std::string_view> tokens(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <class T>
T parse_number(std::string_view tok, std::size_t line, const char* what) {
    T v{};
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size())
        throw ParseError(line, std::string("bad ") + what + " '" + std::string(tok) + "'");
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v)) throw ParseError(line, std::string("non-finite ") + what);
    }
    return v;
}

inline std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Reads the next line that is neither blank nor a comment.
inline bool next_content_line(std::istream& in, std::string& line, std::size_t& lineno) {
    while (std::getline(in, line)) {
        ++lineno;
        auto t = tokens(line);
        if (t.empty() || t.front().front() == '#') continue;
        return true;
    }
    return false;
}

inline std::string_view header_value(const std::string& line, std::string_view key, std::size_t lineno) {
    std::string_view sv(line);
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    if (sv.substr(0, key.size()) != key || sv.size() <= key.size() || sv[key.size()] != ':')
        throw ParseError(lineno, "expected '" + std::string(key) + ":' header, got '" + line + "'");
    return sv.substr(key.size() + 1);
}

}  // namespace qstate_detail

inline QState parse_qstate(std::istream& in) {
    using namespace qstate_detail;
    std::string line;
    std::size_t lineno = 0;

    if (!next_content_line(in, line, lineno)) throw ParseError(lineno + 1, "empty input, expected 'qstate v1'");
    auto magic = tokens(line);
    if (magic.size() != 2 || magic[0] != "qstate" || magic[1] != "v1")
        throw ParseError(lineno, "expected 'qstate v1', got '" + line + "'");

    if (!next_content_line(in, line, lineno)) throw ParseError(lineno + 1, "missing 'kind:' header");
    auto kind_toks = tokens(header_value(line, "kind", lineno));
    if (kind_toks.size() != 1 || (kind_toks[0] != "density" && kind_toks[0] != "pure"))
        throw ParseError(lineno, "kind must be 'density' or 'pure'");
    const bool density = kind_toks[0] == "density";

    if (!next_content_line(in, line, lineno)) throw ParseError(lineno + 1, "missing 'dims:' header");
    std::vector<std::size_t> dims;
    const std::size_t dims_line = lineno;
    for (auto t : tokens(header_value(line, "dims", lineno))) {
        auto d = parse_number<std::size_t>(t, lineno, "dimension");
        if (d == 0) throw ParseError(lineno, "dimensions must be positive");
        dims.push_back(d);
    }
    if (dims.empty()) throw ParseError(dims_line, "dims list is empty");
    CompositeIndexMap map(dims);

    if (!next_content_line(in, line, lineno)) throw ParseError(lineno + 1, "missing 'nnz:' header");
    const std::size_t nnz_line = lineno;
    auto nnz_toks = tokens(header_value(line, "nnz", lineno));
    if (nnz_toks.size() != 1) throw ParseError(lineno, "nnz takes one integer");
    const auto nnz = parse_number<std::size_t>(nnz_toks[0], lineno, "nnz");

    const std::size_t n = map.size();
    if (density) {
        ComplexMatrix m = ComplexMatrix::Zero(n, n);
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;  // entry -> line
        for (std::size_t k = 0; k < nnz; ++k) {
            if (!next_content_line(in, line, lineno))
                throw ParseError(nnz_line, "nnz declares " + std::to_string(nnz) + " entries but only " +
                                               std::to_string(k) + " present");
            auto t = tokens(line);
            if (t.size() != 4) throw ParseError(lineno, "density entry needs '<row> <col> <re> <im>'");
            auto r = parse_number<std::size_t>(t[0], lineno, "row index");
            auto c = parse_number<std::size_t>(t[1], lineno, "column index");
            if (r >= n || c >= n)
                throw ParseError(lineno, "index (" + std::to_string(r) + "," + std::to_string(c) +
                                             ") out of range for composite dimension " + std::to_string(n));
            double re = parse_number<double>(t[2], lineno, "real part");
            double im = parse_number<double>(t[3], lineno, "imaginary part");
            if (!seen.emplace(std::make_pair(r, c), lineno).second)
                throw ParseError(lineno, "duplicate entry (" + std::to_string(r) + "," + std::to_string(c) + ")");
            m(r, c) = cplx(re, im);
        }
        for (const auto& [rc, ln] : seen) {
            auto [r, c] = rc;
            if (r == c) {
                if (std::abs(m(r, r).imag()) > kHermitianTol)
                    throw ParseError(ln, "non-Hermitian payload: diagonal entry has imaginary part");
                continue;
            }
            auto mirror = seen.find({c, r});
            if (mirror == seen.end()) {
                m(c, r) = std::conj(m(r, c));
            } else if (std::abs(m(r, c) - std::conj(m(c, r))) > kHermitianTol) {
                throw ParseError(std::max(ln, mirror->second),
                                 "non-Hermitian payload: entries (" + std::to_string(r) + "," + std::to_string(c) +
                                     ") and (" + std::to_string(c) + "," + std::to_string(r) + ") disagree");
            }
        }
        if (next_content_line(in, line, lineno)) throw ParseError(lineno, "data beyond the declared nnz");
        try {
            return validate_density(m, map);
        } catch (const ValidationError& e) {
            throw ParseError(nnz_line, std::string("invalid density payload: ") + e.what());
        }
    }

    ComplexVector a = ComplexVector::Zero(n);
    std::vector<bool> seen(n, false);
    for (std::size_t k = 0; k < nnz; ++k) {
        if (!next_content_line(in, line, lineno))
            throw ParseError(nnz_line, "nnz declares " + std::to_string(nnz) + " entries but only " +
                                           std::to_string(k) + " present");
        auto t = tokens(line);
        if (t.size() != 3) throw ParseError(lineno, "pure entry needs '<index> <re> <im>'");
        auto i = parse_number<std::size_t>(t[0], lineno, "index");
        if (i >= n)
            throw ParseError(lineno, "index " + std::to_string(i) + " out of range for composite dimension " +
                                         std::to_string(n));
        if (seen[i]) throw ParseError(lineno, "duplicate index " + std::to_string(i));
        seen[i] = true;
        a(i) = cplx(parse_number<double>(t[1], lineno, "real part"), parse_number<double>(t[2], lineno, "imaginary part"));
    }
    if (next_content_line(in, line, lineno)) throw ParseError(lineno, "data beyond the declared nnz");
    if (a.norm() > 1.0 + 1e-12) throw ParseError(nnz_line, "amplitude norm " + fmt_double(a.norm()) + " exceeds 1");
    return PureStateVec(map, a);
}

inline QState read_qstate(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, "cannot open '" + path.string() + "'");
    return parse_qstate(in);
}

inline std::string format_qstate(const QState& state) {
    using qstate_detail::fmt_double;
    std::ostringstream os;
    os << "qstate v1\n";
    if (const auto* d = std::get_if<DensityState>(&state)) {
        const auto& m = d->matrix();
        std::size_t nnz = 0;
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                if (m(r, c) != cplx(0.0, 0.0)) ++nnz;
        os << "kind: density\ndims:";
        for (auto x : d->map().dims()) os << ' ' << x;
        os << "\nnnz: " << nnz << '\n';
        for (Eigen::Index r = 0; r < m.rows(); ++r)
            for (Eigen::Index c = 0; c < m.cols(); ++c)
                if (m(r, c) != cplx(0.0, 0.0))
                    os << r << ' ' << c << ' ' << fmt_double(m(r, c).real()) << ' ' << fmt_double(m(r, c).imag()) << '\n';
    } else {
        const auto& p = std::get<PureStateVec>(state);
        std::size_t nnz = 0;
        for (Eigen::Index i = 0; i < p.amplitudes.size(); ++i)
            if (p.amplitudes(i) != cplx(0.0, 0.0)) ++nnz;
        os << "kind: pure\ndims:";
        for (auto x : p.map.dims()) os << ' ' << x;
        os << "\nnnz: " << nnz << '\n';
        for (Eigen::Index i = 0; i < p.amplitudes.size(); ++i)
            if (p.amplitudes(i) != cplx(0.0, 0.0))
                os << i << ' ' << fmt_double(p.amplitudes(i).real()) << ' ' << fmt_double(p.amplitudes(i).imag()) << '\n';
    }
    return os.str();
}

/// Writes via a temporary file in the same directory, then renames.
inline void write_qstate(const QState& state, const std::filesystem::path& path) {
    namespace fs = std::filesystem;
    const std::string text = format_qstate(state);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write '" + tmp.string() + "'");
        out << text;
        out.flush();
        if (!out) throw Error("write to '" + tmp.string() + "' failed");
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot rename into '" + path.string() + "'");
    }
}

/// Density view of either kind (pure states become projectors).
inline DensityState as_density(const QState& state) {
    if (const auto* d = std::get_if<DensityState>(&state)) return *d;
    return projector(std::get<PureStateVec>(state));
}

}  // namespace cvent
