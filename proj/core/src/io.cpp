#include "alignlab/io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>

#include "alignlab/error.hpp"

namespace alignlab {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

CsvWriter::CsvWriter(const std::filesystem::path& path, std::vector<std::string> header)
    : path_(path), columns_(header.size()) {
  if (header.empty()) throw InvalidArgument("CSV header is empty");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  out_.open(path, std::ios::binary | std::ios::trunc);
  if (!out_) throw IoError("cannot open " + path.string() + " for writing");
  write_record(header);
}

void CsvWriter::write_record(const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << ',';
    out_ << csv_escape(fields[i]);
  }
  out_ << "\r\n";
  if (!out_) throw IoError("write failed on " + path_.string());
}

void CsvWriter::row(const std::vector<CsvCell>& cells) {
  if (cells.size() != columns_)
    throw InvalidArgument("CSV row has " + std::to_string(cells.size()) + " cells, header has " +
                          std::to_string(columns_));
  std::vector<std::string> fields;
  fields.reserve(cells.size());
  for (const auto& c : cells) {
    if (const auto* s = std::get_if<std::string>(&c)) fields.push_back(*s);
    else if (const auto* d = std::get_if<double>(&c)) fields.push_back(format_double(*d));
    else fields.push_back(std::to_string(std::get<long long>(c)));
  }
  write_record(fields);
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      row.push_back(std::move(field));
      field.clear();
      rows.push_back(std::move(row));
      row.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw IoError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_field_csv(const std::filesystem::path& path, const GridField& field) {
  const bool two = field.grid.geom.dim == 2;
  std::vector<std::string> header{"index", "x"};
  if (two) header.push_back("y");
  header.push_back("value");
  CsvWriter w(path, header);
  for (int i = 0; i < field.grid.size(); ++i) {
    const Vec p = field.grid.node(i);
    std::vector<CsvCell> r{static_cast<long long>(i), p[0]};
    if (two) r.emplace_back(p[1]);
    r.emplace_back(field.values[i]);
    w.row(r);
  }
}

void write_particles_csv(const std::filesystem::path& path, const ParticleEnsemble& ens) {
  const bool two = ens.geom.dim == 2;
  std::vector<std::string> header{"t", "i", "x"};
  if (two) header.push_back("y");
  header.push_back("vx");
  if (two) header.push_back("vy");
  header.push_back("m");
  CsvWriter w(path, header);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    std::vector<CsvCell> r{ens.time, static_cast<long long>(i), ens.x[i][0]};
    if (two) r.emplace_back(ens.x[i][1]);
    r.emplace_back(ens.v[i][0]);
    if (two) r.emplace_back(ens.v[i][1]);
    r.emplace_back(ens.m[i]);
    w.row(r);
  }
}

void write_macro_csv(const std::filesystem::path& path, const MacroState& state,
                     const MacroModel& model) {
  const EQuantity e = e_quantity(state, model);
  CsvWriter w(path, {"x", "rho", "s", "u", "e"});
  for (int i = 0; i < state.rho.grid.size(); ++i)
    w.row({state.rho.grid.node(i)[0], state.rho.values[i], state.s.values[i], state.u.values[i],
           e.e.values[i]});
}

namespace {

constexpr char kMagic[8] = {'A', 'L', 'G', 'N', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

template <class T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(v);
    std::reverse(bytes.begin(), bytes.end());
    return std::bit_cast<T>(bytes);
  }
  return v;
}

class BinWriter {
 public:
  explicit BinWriter(const std::filesystem::path& p) : path_(p) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    out_.open(p, std::ios::binary | std::ios::trunc);
    if (!out_) throw IoError("cannot open " + p.string() + " for writing");
  }
  template <class T>
  void put(T v) {
    v = to_little(v);
    out_.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void doubles(const std::vector<double>& v) {
    put<std::uint64_t>(v.size());
    for (double d : v) put(d);
  }
  void raw(const char* p, std::size_t n) { out_.write(p, static_cast<std::streamsize>(n)); }
  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failed on " + path_.string());
  }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

class BinReader {
 public:
  explicit BinReader(const std::filesystem::path& p) : path_(p) {
    in_.open(p, std::ios::binary);
    if (!in_) throw IoError("cannot open " + p.string() + " for reading");
  }
  template <class T>
  T get() {
    T v;
    in_.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!in_) throw IoError("truncated checkpoint " + path_.string());
    return to_little(v);
  }
  std::vector<double> doubles(std::uint64_t limit = (1ull << 34)) {
    const auto n = get<std::uint64_t>();
    if (n > limit) throw IoError("implausible block length in " + path_.string());
    std::vector<double> v(n);
    for (auto& d : v) d = get<double>();
    return v;
  }
  void raw(char* p, std::size_t n) {
    in_.read(p, static_cast<std::streamsize>(n));
    if (!in_) throw IoError("truncated checkpoint " + path_.string());
  }
  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& c) {
  if (c.extents.size() != c.spacings.size())
    throw InvalidArgument("checkpoint needs one spacing per extent");
  BinWriter w(path);
  w.raw(kMagic, sizeof kMagic);
  w.put(kVersion);
  w.put(static_cast<std::uint32_t>(c.kind));
  w.put(static_cast<std::uint32_t>(c.extents.size()));
  for (auto e : c.extents) w.put(e);
  for (double h : c.spacings) w.put(h);
  w.put(c.time);
  w.doubles(c.params);
  w.doubles(c.payload);
  if (c.kind == CheckpointKind::Particles) {
    const std::uint64_t stride = 2 * c.particle_dim + 1;
    if (c.particle_dim == 0 || c.particles.size() % stride != 0)
      throw InvalidArgument("particle block does not match its dimension");
    w.put<std::uint64_t>(c.particles.size() / stride);
    w.put(c.particle_dim);
    for (double d : c.particles) w.put(d);
  }
  w.finish();
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  BinReader r(path);
  char magic[8];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError(path.string() + " is not an alignlab checkpoint");
  if (r.get<std::uint32_t>() != kVersion) throw IoError("unsupported checkpoint version in " + path.string());
  Checkpoint c;
  const auto kind = r.get<std::uint32_t>();
  if (kind < 1 || kind > 4) throw IoError("unknown checkpoint kind in " + path.string());
  c.kind = static_cast<CheckpointKind>(kind);
  const auto nd = r.get<std::uint32_t>();
  if (nd > 8) throw IoError("implausible dimension count in " + path.string());
  c.extents.resize(nd);
  c.spacings.resize(nd);
  for (auto& e : c.extents) e = r.get<std::uint64_t>();
  for (auto& h : c.spacings) h = r.get<double>();
  c.time = r.get<double>();
  c.params = r.doubles();
  c.payload = r.doubles();
  if (c.kind == CheckpointKind::Particles) {
    const auto n = r.get<std::uint64_t>();
    c.particle_dim = r.get<std::uint32_t>();
    if (c.particle_dim < 1 || c.particle_dim > 2) throw IoError("bad particle dimension in " + path.string());
    c.particles.resize(n * (2 * c.particle_dim + 1));
    for (auto& d : c.particles) d = r.get<double>();
  }
  if (!r.at_end()) throw IoError("trailing bytes in " + path.string());
  return c;
}

Checkpoint field_checkpoint(const GridField& field) {
  Checkpoint c;
  c.kind = CheckpointKind::Field;
  for (int a = 0; a < field.grid.geom.dim; ++a) {
    c.extents.push_back(static_cast<std::uint64_t>(field.grid.n[a]));
    c.spacings.push_back(field.grid.h(a));
  }
  c.time = field.time;
  c.payload = field.values;
  return c;
}

Checkpoint particle_checkpoint(const ParticleEnsemble& ens, const MicroModel& model) {
  Checkpoint c;
  if (model.strength) c = field_checkpoint(*model.strength);
  else if (model.weight) c = field_checkpoint(model.weight->w);
  c.kind = CheckpointKind::Particles;
  c.time = ens.time;
  c.params = {model.lambda, static_cast<double>(static_cast<int>(model.variant))};
  const int d = ens.geom.dim;
  c.particle_dim = static_cast<std::uint32_t>(d);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    for (int a = 0; a < d; ++a) c.particles.push_back(ens.x[i][a]);
    for (int a = 0; a < d; ++a) c.particles.push_back(ens.v[i][a]);
    c.particles.push_back(ens.m[i]);
  }
  return c;
}

Checkpoint kinetic_checkpoint(const KineticState& state) {
  Checkpoint c;
  c.kind = CheckpointKind::Kinetic;
  const auto& g = state.grid;
  c.extents = {static_cast<std::uint64_t>(g.nx), static_cast<std::uint64_t>(g.nv)};
  c.spacings = {g.hx(), g.dv()};
  c.time = state.time;
  const auto& p = state.params;
  c.params = {p.lambda, p.epsilon, p.delta, p.sigma, g.vmax};
  c.payload = state.f;
  const GridField& field = state.weight ? state.weight->w : state.strength;
  c.payload.insert(c.payload.end(), field.values.begin(), field.values.end());
  return c;
}

Checkpoint macro_checkpoint(const MacroState& state) {
  Checkpoint c = field_checkpoint(state.rho);
  c.kind = CheckpointKind::Macro;
  c.time = state.time;
  c.params = {state.pressure == Pressure::Isentropic ? 1.0 : 0.0};
  c.payload.insert(c.payload.end(), state.s.values.begin(), state.s.values.end());
  c.payload.insert(c.payload.end(), state.u.values.begin(), state.u.values.end());
  return c;
}

GridField field_from_checkpoint(const Checkpoint& c, const TorusGeometry& geom) {
  if (c.extents.empty() || static_cast<int>(c.extents.size()) != geom.dim)
    throw IoError("checkpoint dimension does not match the torus");
  const GridSpec g(geom, static_cast<int>(c.extents[0]),
                   geom.dim == 2 ? static_cast<int>(c.extents[1]) : 1);
  if (c.payload.size() < static_cast<std::size_t>(g.size()))
    throw IoError("checkpoint payload shorter than its grid");
  return GridField(g, std::vector<double>(c.payload.begin(), c.payload.begin() + g.size()), c.time);
}

}  // namespace alignlab
