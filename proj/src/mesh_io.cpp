#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pbe/errors.hpp"
#include "pbe/mesh.hpp"

namespace pbe {

namespace {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class LineReader {
public:
    explicit LineReader(std::istream& in) : in_(in) {}

    /// Next non-empty line split on whitespace; throws ParseError at EOF.
    std::vector<std::string_view> next(const char* expecting) {
        while (std::getline(in_, line_)) {
            ++number_;
            if (!line_.empty() && line_.back() == '\r') line_.pop_back();
            auto tokens = split(line_);
            if (!tokens.empty()) return tokens;
        }
        throw ParseError(std::string("unexpected end of file, expected ") + expecting, number_ + 1);
    }

    int line() const { return number_; }

private:
    static std::vector<std::string_view> split(const std::string& s) {
        std::vector<std::string_view> out;
        std::size_t i = 0;
        while (i < s.size()) {
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
            const std::size_t j = i;
            while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
            if (i > j) out.emplace_back(s.data() + j, i - j);
        }
        return out;
    }

    std::istream& in_;
    std::string line_;
    int number_ = 0;
};

template <typename T>
T parse_number(std::string_view tok, int line) {
    T value{};
    const auto* end = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(tok.data(), end, value);
    if (ec != std::errc() || ptr != end) throw ParseError("invalid number '" + std::string(tok) + "'", line);
    return value;
}

std::size_t parse_header(LineReader& reader, std::string_view keyword) {
    const auto tokens = reader.next(std::string(keyword).c_str());
    if (tokens.size() != 2 || tokens[0] != keyword)
        throw ParseError("expected '" + std::string(keyword) + " <count>'", reader.line());
    return parse_number<std::size_t>(tokens[1], reader.line());
}

std::vector<Facet> read_facets(LineReader& reader, std::string_view keyword) {
    const std::size_t n = parse_header(reader, keyword);
    std::vector<Facet> facets(n);
    for (auto& f : facets) {
        const auto t = reader.next("facet record");
        if (t.size() != 2) throw ParseError("facet record needs a cell index and a local face", reader.line());
        f.cell = parse_number<Index>(t[0], reader.line());
        f.face = parse_number<int>(t[1], reader.line());
    }
    return facets;
}

}  // namespace

void write_mesh(const SimplicialMesh& mesh, std::ostream& out) {
    out << "pbemesh 1\n";
    out << "vertices " << mesh.num_vertices() << '\n';
    for (const auto& v : mesh.vertices()) out << format_real(v.x) << ' ' << format_real(v.y) << ' ' << format_real(v.z) << '\n';
    out << "cells " << mesh.num_cells() << '\n';
    for (Index c = 0; c < mesh.num_cells(); ++c) {
        const auto& cell = mesh.cell(c);
        out << cell[0] << ' ' << cell[1] << ' ' << cell[2] << ' ' << cell[3] << ' '
            << (mesh.region(c) == Region::Molecular ? 'M' : 'S') << '\n';
    }
    out << "interface_facets " << mesh.interface_facets().size() << '\n';
    for (const auto& f : mesh.interface_facets()) out << f.cell << ' ' << f.face << '\n';
    out << "outer_facets " << mesh.outer_facets().size() << '\n';
    for (const auto& f : mesh.outer_facets()) out << f.cell << ' ' << f.face << '\n';
}

SimplicialMesh read_mesh(std::istream& in) {
    LineReader reader(in);
    {
        const auto t = reader.next("header");
        if (t.size() != 2 || t[0] != "pbemesh") throw ParseError("missing 'pbemesh' header", reader.line());
        if (t[1] != "1") throw ParseError("unsupported mesh format version '" + std::string(t[1]) + "'", reader.line());
    }
    const std::size_t nv = parse_header(reader, "vertices");
    std::vector<Point3> vertices(nv);
    for (auto& v : vertices) {
        const auto t = reader.next("vertex record");
        if (t.size() != 3) throw ParseError("vertex record needs three coordinates", reader.line());
        v = {parse_number<double>(t[0], reader.line()), parse_number<double>(t[1], reader.line()),
             parse_number<double>(t[2], reader.line())};
    }
    const std::size_t nc = parse_header(reader, "cells");
    std::vector<Cell> cells(nc);
    std::vector<Region> regions(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        const auto t = reader.next("cell record");
        if (t.size() != 5) throw ParseError("cell record needs four vertex indices and a region tag", reader.line());
        for (int k = 0; k < 4; ++k) cells[c][k] = parse_number<Index>(t[k], reader.line());
        if (t[4] == "M") {
            regions[c] = Region::Molecular;
        } else if (t[4] == "S") {
            regions[c] = Region::Solvent;
        } else {
            throw ParseError("unknown region tag '" + std::string(t[4]) + "'", reader.line());
        }
    }
    auto interface = read_facets(reader, "interface_facets");
    auto outer = read_facets(reader, "outer_facets");
    return SimplicialMesh(std::move(vertices), std::move(cells), std::move(regions), std::move(interface),
                          std::move(outer));
}

void write_mesh_file(const SimplicialMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io", "cannot open '" + path + "' for writing");
    write_mesh(mesh, out);
    if (!out) throw Error("io", "failed writing '" + path + "'");
}

SimplicialMesh read_mesh_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("io", "cannot open '" + path + "'");
    return read_mesh(in);
}

}  // namespace pbe
