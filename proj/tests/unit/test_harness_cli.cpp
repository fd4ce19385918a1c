#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "alignlab/config.hpp"
#include "alignlab/error.hpp"
#include "alignlab/experiments.hpp"
#include "alignlab/io.hpp"
#include "alignlab/svg.hpp"

using namespace alignlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("alignlab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

RunConfig tiny_micro() {
  return parse_config(
      "[experiment]\nname = \"simulate-micro\"\n[micro]\nn = 30\nt_end = 0.2\ndt = 0.02\nevery = 2\ngrid = 32\n",
      "simulate-micro");
}

}  // namespace

TEST_CASE("experiment names and defaults") {
  const auto& names = experiment_names();
  CHECK(names.size() == 10u);
  for (const auto& n : names) {
    const RunConfig c = default_config(n);
    CHECK(c.experiment.name == n);
    CHECK_NOTHROW(validate(c));
  }
  CHECK_THROWS_AS(default_config("no-such-study"), ConfigError);
}

TEST_CASE("TOML overrides and rejections") {
  const RunConfig c = parse_config("[micro]\nn = 50\nmodel = \"cs\"\n[kernel]\nbeta = 2.0\n", "simulate-micro");
  CHECK(c.micro.n == 50);
  CHECK(c.micro.model == "cs");
  CHECK(c.kernel.beta == 2.0);
  CHECK(c.micro.dt == default_config("simulate-micro").micro.dt);

  CHECK_THROWS_AS(parse_config("[micro]\nbogus = 1\n", "simulate-micro"), ConfigError);
  CHECK_THROWS_AS(parse_config("[nonsense]\nx = 1\n", "simulate-micro"), ConfigError);
  CHECK_THROWS_AS(parse_config("[micro]\nn = \"many\"\n", "simulate-micro"), ConfigError);
  CHECK_THROWS_AS(parse_config("[experiment]\nname = \"threshold\"\n", "simulate-micro"), ConfigError);
  CHECK_THROWS_AS(parse_config("[micro\n", "simulate-micro"), ConfigError);
  try {
    (void)parse_config("[kinetic]\nnv = 64\nfoo = 2\n", "simulate-kinetic");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("kinetic.foo") != std::string::npos);
  }
  RunConfig bad = default_config("simulate-micro");
  bad.micro.n = 0;
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("double formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) CHECK(std::stod(format_double(v)) == v);
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
}

TEST_CASE("CSV escaping and round trip") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_escape("two\nlines") == "\"two\nlines\"");

  const fs::path dir = scratch("csv");
  {
    CsvWriter w(dir / "t.csv", {"name", "value", "count"});
    w.row({std::string("x,y"), 0.1, 7LL});
    w.row({std::string("q\"uote\nnl"), -1.5, -3LL});
    CHECK_THROWS_AS(w.row({1.0}), InvalidArgument);
  }
  const std::string text = slurp(dir / "t.csv");
  CHECK(text.substr(0, 18) == "name,value,count\r\n");
  const auto rows = parse_csv(text);
  REQUIRE(rows.size() == 3u);
  CHECK(rows[1][0] == "x,y");
  CHECK(std::stod(rows[1][1]) == 0.1);
  CHECK(rows[1][2] == "7");
  CHECK(rows[2][0] == "q\"uote\nnl");
  CHECK_THROWS_AS(parse_csv("a,\"open\r\n"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("checkpoint round trip and corruption") {
  const fs::path dir = scratch("ckpt");
  const GridSpec g(TorusGeometry(2, 1.0), 4, 3);
  GridField f = GridField::from_function(g, [](const Vec& x) { return x[0] - 2.0 * x[1]; });
  f.time = 1.25;
  write_checkpoint(dir / "f.bin", field_checkpoint(f));
  const Checkpoint c = read_checkpoint(dir / "f.bin");
  CHECK(c.kind == CheckpointKind::Field);
  CHECK(c.extents == std::vector<std::uint64_t>{4, 3});
  CHECK(c.time == 1.25);
  const GridField back = field_from_checkpoint(c, TorusGeometry(2, 1.0));
  CHECK(back.values == f.values);
  CHECK_THROWS_AS(field_from_checkpoint(c, TorusGeometry(1, 1.0)), IoError);

  const ParticleEnsemble ens(TorusGeometry(1, 1.0), {{0.1, 0.0}, {0.7, 0.0}}, {{1.0, 0.0}, {-2.0, 0.0}}, {0.4, 0.6});
  write_checkpoint(dir / "p.bin", particle_checkpoint(ens, MicroModel::cucker_smale(1.0, CommunicationKernel::constant(1.0))));
  const Checkpoint p = read_checkpoint(dir / "p.bin");
  CHECK(p.kind == CheckpointKind::Particles);
  CHECK(p.particle_dim == 1u);
  CHECK(p.particles == std::vector<double>{0.1, 1.0, 0.4, 0.7, -2.0, 0.6});

  {
    std::ofstream out(dir / "f.bin", std::ios::binary | std::ios::app);
    out.put('\0');
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "f.bin"), IoError);
  const std::string bytes = slurp(dir / "p.bin");
  {
    std::ofstream out(dir / "short.bin", std::ios::binary);
    out << bytes.substr(0, bytes.size() - 5);
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "short.bin"), IoError);
  {
    std::ofstream out(dir / "junk.bin", std::ios::binary);
    out << "NOTACKPTxxxxxxxxxxxx";
  }
  CHECK_THROWS_AS(read_checkpoint(dir / "junk.bin"), IoError);
  CHECK_THROWS_AS(read_checkpoint(dir / "missing.bin"), IoError);
  fs::remove_all(dir);
}

TEST_CASE("plot ranges and SVG rendering") {
  LinePlot p{"decay", "t", "y", false, true, {}};
  p.series.push_back({"a", {0.0, 1.0, 2.0}, {1.0, 0.1, 0.0}});
  p.series.push_back({"b", {0.5, 3.0}, {1e-3, 2.0}});
  const auto [xr, yr] = plot_ranges(p);
  CHECK(xr.lo <= 0.0);
  CHECK(xr.hi >= 3.0);
  CHECK(yr.lo <= 1e-3);
  CHECK(yr.lo > 0.0);  // zero skipped on the log axis
  CHECK(yr.hi >= 2.0);
  const std::string svg = render_svg(p);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("</svg>") != std::string::npos);
  CHECK(svg.find("decay") != std::string::npos);
}

TEST_CASE("empty report writes only the summary") {
  const fs::path dir = scratch("empty");
  ExperimentReport rep;
  rep.experiment = "none";
  const auto files = emit_outputs(rep, dir / "nested");
  REQUIRE_FALSE(files.empty());
  for (const auto& f : files) CHECK(f.filename().string().rfind("summary", 0) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "nested" / "summary.json"));
  CHECK(j["experiment"] == "none");
  CHECK(j["checks"].empty());
  CHECK(rep.passed());
  fs::remove_all(dir);
}

TEST_CASE("report verdicts") {
  ExperimentReport rep;
  rep.check("ok", true, 1.0, 2.0);
  rep.info("note", 3.0);
  CHECK(rep.passed());
  rep.fit_check("noisy fit", true, 0.5, 0.2, 1.0, 1.0);
  CHECK(rep.find_check("noisy fit").verdict == Verdict::Inconclusive);
  CHECK_FALSE(rep.passed());
  rep.metric("m", 4.0);
  CHECK(rep.metric_value("m") == 4.0);
  CHECK_THROWS(rep.find_check("absent"));
}

TEST_CASE("runs are deterministic for a fixed seed") {
  const RunConfig c = tiny_micro();
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const auto ra = run_experiment(c);
  const auto rb = run_experiment(c);
  CHECK(ra.passed());
  emit_outputs(ra, a);
  emit_outputs(rb, b);
  for (const auto& entry : fs::directory_iterator(a)) {
    const std::string name = entry.path().filename().string();
    CHECK_MESSAGE(slurp(entry.path()) == slurp(b / name), name);
  }
  CHECK(fs::exists(a / "diagnostics.csv"));
  CHECK(fs::exists(a / "final.bin"));
  CHECK(fs::exists(a / "diameters.svg"));

  RunConfig other = c;
  other.experiment.seed += 1;
  CHECK(run_experiment(other).tables[1].rows != ra.tables[1].rows);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("studies check their preconditions") {
  RunConfig c = default_config("relaxation");
  c.kernel.family = "inverse_power";
  CHECK_THROWS_AS(run_experiment(c), PreconditionError);
  RunConfig h = default_config("hetero");
  h.micro.dim = 1;
  CHECK_THROWS_AS(run_experiment(h), PreconditionError);
}
