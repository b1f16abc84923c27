#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "pbe/cli.hpp"
#include "pbe/errors.hpp"

namespace pbe::cli {

namespace {

std::vector<std::string> tokens(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string t; in >> t;) out.push_back(t);
    return out;
}

double pqr_number(const std::string& tok, const char* column, int line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(tok, &used);
        if (used == tok.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw ParseError(std::string("non-numeric ") + column + " column '" + tok + "'", line);
}

std::string printf_str(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

}  // namespace

ChargeSystem parse_pqr(std::string_view text, std::vector<std::string>* warnings) {
    ChargeSystem out;
    std::istringstream in{std::string(text)};
    int line_no = 0;
    for (std::string line; std::getline(in, line);) {
        ++line_no;
        const auto t = tokens(line);
        if (t.empty() || (t[0] != "ATOM" && t[0] != "HETATM")) continue;
        // keyword, at least one name field, then x y z charge radius
        if (t.size() < 7) throw ParseError(t[0] + " record has too few fields", line_no);
        const std::size_t n = t.size();
        Charge c;
        c.x.x = pqr_number(t[n - 5], "x", line_no);
        c.x.y = pqr_number(t[n - 4], "y", line_no);
        c.x.z = pqr_number(t[n - 3], "z", line_no);
        c.q = pqr_number(t[n - 2], "charge", line_no);
        pqr_number(t[n - 1], "radius", line_no);
        out.push_back(c);
    }
    if (out.empty() && warnings) warnings->push_back("PQR input has no ATOM/HETATM records");
    return out;
}

std::string emit_table(const std::vector<IterationRecord>& records, TableFormat format) {
    static const std::vector<std::string> header{"level", "vertices", "estimate", "effectivity",
                                                 "E_r",   "E_m",      "E_Gamma",  "E_dOmega"};
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : records) {
        std::string eff = r.effectivity ? printf_str("%.3g", *r.effectivity) : "";
        if (!r.effectivity && format == TableFormat::Aligned) eff = "--";
        rows.push_back({std::to_string(r.level), std::to_string(r.vertex_count), printf_str("%.3g", r.estimate), eff,
                        printf_str("%.2e", r.E_r), printf_str("%.2e", r.E_m), printf_str("%.2e", r.E_Gamma),
                        printf_str("%.2e", r.E_dOmega)});
    }

    std::ostringstream s;
    if (format == TableFormat::Csv) {
        auto put = [&](const std::vector<std::string>& row) {
            for (std::size_t i = 0; i < row.size(); ++i) s << (i ? "," : "") << row[i];
            s << "\n";
        };
        put(header);
        for (const auto& row : rows) put(row);
        return s.str();
    }

    std::vector<std::size_t> width(header.size());
    for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    auto put = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i)
            s << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << row[i];
        s << "\n";
    };
    put(header);
    for (const auto& row : rows) put(row);
    return s.str();
}

void save_reference(const ReferenceValue& ref, const std::string& path) {
    const nlohmann::json j{{"qoi", ref.qoi},
                           {"degree", ref.degree},
                           {"vertices", ref.vertices},
                           {"nonlinearity", ref.nonlinearity}};
    std::ofstream out(path);
    if (!out) throw Error("io", "cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
    if (!out) throw Error("io", "failed writing '" + path + "'");
}

ReferenceValue load_reference(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("io", "cannot open '" + path + "'");
    try {
        const auto j = nlohmann::json::parse(in);
        ReferenceValue r;
        r.qoi = j.at("qoi").get<double>();
        r.degree = j.value("degree", 2);
        r.vertices = j.value("vertices", std::size_t{0});
        r.nonlinearity = j.value("nonlinearity", std::string{});
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error("io", "invalid reference file '" + path + "': " + e.what());
    }
}

int exit_code_for(const std::string& category) {
    if (category == "solver") return 3;
    if (category == "io" || category == "parse") return 4;
    if (category == "config" || category == "usage" || category == "domain" || category == "mesh" ||
        category == "geometry")
        return 2;
    return 1;
}

}  // namespace pbe::cli
