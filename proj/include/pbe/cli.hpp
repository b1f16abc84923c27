#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pbe/adjoint.hpp"
#include "pbe/mesh.hpp"
#include "pbe/pbe_model.hpp"
#include "pbe/refine.hpp"

namespace pbe::cli {

struct PqrFile {
    std::string path;
    friend bool operator==(const PqrFile&, const PqrFile&) = default;
};

struct MeshFile {
    std::string path;
    friend bool operator==(const MeshFile&, const MeshFile&) = default;
};

struct MeshGenerator {
    BallMeshOptions ball;
    /// Rounds of local refinement around each charge after generation.
    int charge_refinement = 0;
    friend bool operator==(const MeshGenerator&, const MeshGenerator&) = default;
};

struct RunConfig {
    PbeCoefficients coefficients;
    Nonlinearity nonlinearity = Nonlinearity::Nonlinear;
    double qoi_eta = 0.005;
    std::variant<ChargeSystem, PqrFile> charges;
    std::variant<MeshGenerator, MeshFile> mesh;
    BisectionMode marking = BisectionMode::AllEdges;
    StrategyConfig strategy;
    ErrorForm form = ErrorForm::Standard;
    SolverConfig solver = SolveOptions{}.linear;
    NewtonConfig newton;
    std::string output;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Parses `key = value` text with `#` comments and the sections
/// [coefficients], [charges], [mesh], [strategy] and [solver]. Keys before
/// the first section are global (only `output`). Throws ConfigError with the
/// offending line number.
RunConfig parse_config(std::string_view text);

/// Text that parse_config maps back to an equal RunConfig.
std::string serialize_config(const RunConfig& config);

/// ATOM/HETATM records of a PQR file; the last five fields of a record are
/// x y z charge radius. Throws ParseError naming the line.
ChargeSystem parse_pqr(std::string_view text, std::vector<std::string>* warnings = nullptr);

enum class TableFormat { Csv, Aligned };

std::string emit_table(const std::vector<IterationRecord>& records, TableFormat format);

/// Reference QoI written by `solve --enriched --out`.
struct ReferenceValue {
    double qoi = 0.0;
    int degree = 2;
    std::size_t vertices = 0;
    std::string nonlinearity;
};
void save_reference(const ReferenceValue& ref, const std::string& path);
ReferenceValue load_reference(const std::string& path);

/// Process exit status for an error category.
int exit_code_for(const std::string& category);

/// Full command-line entry point; returns the process exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pbe::cli
