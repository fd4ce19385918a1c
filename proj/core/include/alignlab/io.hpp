#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "alignlab/grid.hpp"
#include "alignlab/kinetic.hpp"
#include "alignlab/macro.hpp"
#include "alignlab/micro.hpp"

namespace alignlab {

using CsvCell = std::variant<std::string, double, long long>;

/// Formats a double with round-trip precision ("%.17g"); non-finite values become nan/inf/-inf.
std::string format_double(double v);

/// Quotes a field when it contains a comma, quote, CR or LF.
std::string csv_escape(const std::string& field);

/// RFC-4180 writer: CRLF records, a header row, fixed column count.
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path, std::vector<std::string> header);
  void row(const std::vector<CsvCell>& cells);
  const std::filesystem::path& path() const { return path_; }

 private:
  void write_record(const std::vector<std::string>& fields);
  std::filesystem::path path_;
  std::ofstream out_;
  std::size_t columns_;
};

/// Parses an RFC-4180 document (quoted fields may span lines).
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

/// One row per node: index, coordinate(s), value.
void write_field_csv(const std::filesystem::path& path, const GridField& field);
/// One row per particle: t, i, x (dim cols), v (dim cols), m.
void write_particles_csv(const std::filesystem::path& path, const ParticleEnsemble& ens);
/// Columns x, rho, s, u, e.
void write_macro_csv(const std::filesystem::path& path, const MacroState& state,
                     const MacroModel& model);

// ---- binary checkpoints ---------------------------------------------------------------------
// Layout (all little-endian): magic "ALGNCKPT", u32 version, u32 kind, u32 ndims,
// ndims x u64 extents, ndims x f64 spacings, f64 time, u64 nparams, nparams x f64,
// u64 payload count, payload f64s; particle checkpoints then append u64 N, u32 dim and per
// particle x[dim], v[dim], m as f64.

enum class CheckpointKind : std::uint32_t { Field = 1, Particles = 2, Kinetic = 3, Macro = 4 };

struct Checkpoint {
  CheckpointKind kind = CheckpointKind::Field;
  std::vector<std::uint64_t> extents;
  std::vector<double> spacings;
  double time = 0.0;
  std::vector<double> params;
  std::vector<double> payload;
  // particle block
  std::uint32_t particle_dim = 0;
  std::vector<double> particles;  // N * (2 dim + 1)
};

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint read_checkpoint(const std::filesystem::path& path);

Checkpoint field_checkpoint(const GridField& field);
/// Field block of the transported strength or weight (empty when absent) plus particles.
Checkpoint particle_checkpoint(const ParticleEnsemble& ens, const MicroModel& model);
/// params: lambda, epsilon, delta, sigma, vmax; payload f then the strength or weight field.
Checkpoint kinetic_checkpoint(const KineticState& state);
/// payload rho, s, u.
Checkpoint macro_checkpoint(const MacroState& state);

GridField field_from_checkpoint(const Checkpoint& c, const TorusGeometry& geom);

}  // namespace alignlab
