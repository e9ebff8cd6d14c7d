#include "m2spec/field_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <system_error>
#include <vector>

#include "m2spec/error.hpp"

namespace m2spec {

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    for (auto& tok : out) {
        while (!tok.empty() && (tok.front() == ' ' || tok.front() == '\t')) tok.remove_prefix(1);
        while (!tok.empty() && (tok.back() == ' ' || tok.back() == '\t' || tok.back() == '\r'))
            tok.remove_suffix(1);
    }
    return out;
}

std::size_t parse_count(std::string_view tok, std::size_t line, const char* what) {
    std::size_t v = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || v == 0)
        throw FormatError(std::string("bad ") + what + " '" + std::string(tok) + "'", line);
    return v;
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

bool parse_double(std::string_view token, double& out) {
    if (token.empty()) return false;
    if (token.front() == '+') token.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
    return ec == std::errc() && ptr == token.data() + token.size();
}

void write_field_csv(std::ostream& out, const FieldSample& field) {
    const auto& shape = field.shape();
    out << field.channels() << ',' << shape.dim();
    for (std::size_t e : shape.extents()) out << ',' << e;
    out << ',' << to_string(field.kind()) << '\n';
    const std::size_t m = field.channels();
    if (field.is_real()) {
        auto data = field.real_data();
        for (std::size_t p = 0; p < field.points(); ++p) {
            for (std::size_t c = 0; c < m; ++c) {
                if (c) out << ',';
                out << format_double(data[p * m + c]);
            }
            out << '\n';
        }
    } else {
        auto data = field.complex_data();
        for (std::size_t p = 0; p < field.points(); ++p) {
            for (std::size_t c = 0; c < m; ++c) {
                if (c) out << ',';
                out << format_double(data[p * m + c].real()) << ','
                    << format_double(data[p * m + c].imag());
            }
            out << '\n';
        }
    }
}

FieldSample read_field_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 1;
    if (!std::getline(in, line)) throw FormatError("missing header", lineno);
    const auto head = split_commas(line);
    if (head.size() < 4) throw FormatError("header must be m,d,N1..Nd,scalar_kind", lineno);
    const std::size_t m = parse_count(head[0], lineno, "channel count");
    const std::size_t d = parse_count(head[1], lineno, "dimension");
    if (head.size() != d + 3)
        throw FormatError("header has " + std::to_string(head.size()) + " fields, expected " +
                              std::to_string(d + 3),
                          lineno);
    std::vector<std::size_t> extents(d);
    for (std::size_t j = 0; j < d; ++j) extents[j] = parse_count(head[2 + j], lineno, "extent");
    ScalarKind kind;
    if (head[d + 2] == "real")
        kind = ScalarKind::real;
    else if (head[d + 2] == "complex")
        kind = ScalarKind::complex;
    else
        throw FormatError("unknown scalar kind '" + std::string(head[d + 2]) + "'", lineno);

    BlockShape shape(std::move(extents));
    const std::size_t cols = kind == ScalarKind::real ? m : 2 * m;
    std::vector<double> values;
    values.reserve(shape.cell_count() * cols);
    for (std::size_t p = 0; p < shape.cell_count(); ++p) {
        ++lineno;
        if (!std::getline(in, line))
            throw FormatError("expected " + std::to_string(shape.cell_count()) + " data rows, got " +
                                  std::to_string(p),
                              lineno);
        const auto toks = split_commas(line);
        if (toks.size() != cols)
            throw FormatError("expected " + std::to_string(cols) + " columns, got " +
                                  std::to_string(toks.size()),
                              lineno);
        for (auto tok : toks) {
            double v = 0.0;
            if (!parse_double(tok, v)) throw FormatError("bad number '" + std::string(tok) + "'", lineno);
            values.push_back(v);
        }
    }
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") != std::string::npos)
            throw FormatError("trailing data after the last lattice point", lineno);
    }
    if (kind == ScalarKind::real) return FieldSample(std::move(shape), m, std::move(values));
    std::vector<cplx> cx(values.size() / 2);
    for (std::size_t i = 0; i < cx.size(); ++i) cx[i] = cplx(values[2 * i], values[2 * i + 1]);
    return FieldSample(std::move(shape), m, std::move(cx));
}

void save_field_csv(const std::string& path, const FieldSample& field) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_field_csv(out, field);
}

FieldSample load_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open '" + path + "'");
    return read_field_csv(in);
}

}  // namespace m2spec
