// End-to-end tests of the renormlab binary: exit-code taxonomy,
// artifact formats, determinism across worker counts, and the
// echo-config round trip. The binary path arrives as argv[1].
#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string g_binary;

struct Run {
  int exit_code = -1;
  fs::path dir;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

json slurp_json(const fs::path& p) { return json::parse(slurp(p)); }

// Run the binary with `args`, outputs under a fresh directory.
Run run_cli(const std::string& name, const std::string& args,
            const std::string& env = "") {
  Run r;
  r.dir = fs::temp_directory_path() / "renormlab_cli_tests" / name;
  fs::remove_all(r.dir);
  fs::create_directories(r.dir);
  fs::path errfile = r.dir / "stderr.txt";
  std::string cmd = env + (env.empty() ? "" : " ") + g_binary + " " + args +
                    " --out " + r.dir.string() + " 2>" + errfile.string();
  int status = std::system(cmd.c_str());
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(errfile);
  return r;
}

// As above but without appending --out (for echo-config and errors
// that happen before any output is written).
Run run_raw(const std::string& name, const std::string& args) {
  Run r;
  r.dir = fs::temp_directory_path() / "renormlab_cli_tests" / name;
  fs::remove_all(r.dir);
  fs::create_directories(r.dir);
  fs::path errfile = r.dir / "stderr.txt";
  std::string cmd = g_binary + " " + args + " 2>" + errfile.string();
  int status = std::system(cmd.c_str());
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(errfile);
  return r;
}

}  // namespace

TEST_CASE("rotnum on the zero-parameter map") {
  auto r = run_cli("rotnum0", "rotnum --family arnold-cubic --theta 0");
  CHECK(r.exit_code == 0);
  auto out = slurp_json(r.dir / "rotnum.json");
  CHECK(out["rho"] == "0");
  CHECK(out["rational"] == true);
  CHECK(out["accuracy_flag"] == false);
}

TEST_CASE("schema violations exit 2 and name the field") {
  auto r = run_cli("badtheta", "rotnum --family arnold-cubic --theta abc");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("theta") != std::string::npos);

  auto r2 = run_cli("badfam", "rotnum --family nonsense --theta 0.3");
  CHECK(r2.exit_code == 2);
  CHECK(r2.err.find("family") != std::string::npos);

  auto r3 = run_raw("badsub", "frobnicate");
  CHECK(r3.exit_code == 2);

  auto r4 = run_cli("badkey", "rotnum --theta 0.3 --nonsense 1");
  CHECK(r4.exit_code == 2);

  auto r5 = run_cli("badprec",
                    "scaling --cf golden --depth 8 --precision f128");
  CHECK(r5.exit_code == 2);
}

TEST_CASE("computational failures exit 1 with a module code") {
  // rational rotation number: the partition combinatorics end early
  auto r = run_cli("ratpart", "partition --family arnold-cubic --theta 0 "
                              "--level 5");
  CHECK(r.exit_code == 1);
  CHECK(r.err.find("geometry.") != std::string::npos);
}

TEST_CASE("precision flags exit 3 and land in the manifest") {
  auto r = run_cli("flagged", "rotnum --family arnold-cubic --theta 0.3 "
                              "--tol 1e-12 --max_iter 50");
  CHECK(r.exit_code == 3);
  CHECK(slurp_json(r.dir / "rotnum.json")["accuracy_flag"] == true);
  auto manifest = slurp_json(r.dir / "manifest.json");
  REQUIRE(manifest["warnings"].is_array());
  CHECK(manifest["warnings"].size() == 1);
}

TEST_CASE("converge on identical maps writes an all-zero table") {
  auto r = run_cli("convid", "converge --cf golden --depth 12 --levels 8");
  CHECK(r.exit_code == 0);
  CHECK(slurp_json(r.dir / "converge.json")["exact_identity"] == true);
  std::istringstream csv(slurp(r.dir / "converge.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "n,d_n");
  int rows = 0;
  while (std::getline(csv, line)) {
    auto comma = line.find(',');
    CHECK(std::stod(line.substr(comma + 1)) == 0.0);
    ++rows;
  }
  CHECK(rows == 9);
}

TEST_CASE("scaling artifact format is pinned") {
  auto r = run_cli("scalefmt", "scaling --cf golden --depth 12 --levels 8");
  CHECK(r.exit_code == 0);
  std::string csv = slurp(r.dir / "scaling.csv");
  CHECK(csv.substr(0, 22) == "m,len_Im,ratio,aitken\n");
  CHECK(csv.find("\r") == std::string::npos);
  auto out = slurp_json(r.dir / "scaling.json");
  double limit = std::stod(out["limit"].get<std::string>());
  CHECK(limit > 0.5);
  CHECK(limit < 1.0);
}

TEST_CASE("julia raster artifact and worker-count determinism") {
  std::string args = "julia --cf golden --depth 12 --level 2 "
                     "--resolution 128 --max_iter 64";
  auto r1 = run_cli("julia_w1", args + " --workers 1");
  auto r8 = run_cli("julia_w8", args + " --workers 8");
  CHECK(r1.exit_code == 0);
  CHECK(r8.exit_code == 0);

  std::string pgm = slurp(r1.dir / "julia.pgm");
  CHECK(pgm.substr(0, 15) == "P5 128 128 255\n");
  CHECK(pgm.size() == 15 + 128 * 128);
  CHECK(pgm == slurp(r8.dir / "julia.pgm"));
  CHECK(slurp(r1.dir / "julia.json") == slurp(r8.dir / "julia.json"));
}

TEST_CASE("re-running an identical config reproduces artifacts byte for byte") {
  std::string args = "partition --cf golden --depth 14 --level 6";
  auto ra = run_cli("part_a", args);
  auto rb = run_cli("part_b", args);
  CHECK(ra.exit_code == 0);
  CHECK(slurp(ra.dir / "partition.csv") == slurp(rb.dir / "partition.csv"));
  CHECK(slurp(ra.dir / "partition_stats.json") ==
        slurp(rb.dir / "partition_stats.json"));
  auto stats = slurp_json(ra.dir / "partition_stats.json");
  std::string csv = slurp(ra.dir / "partition.csv");
  auto rows = std::count(csv.begin(), csv.end(), '\n') - 1;
  CHECK(stats["atom_count"].get<long long>() == rows);
}

TEST_CASE("echo-config round trip is byte identical") {
  auto base = fs::temp_directory_path() / "renormlab_cli_tests" / "echo";
  fs::remove_all(base);
  fs::create_directories(base);
  auto e1 = base / "e1.json";
  auto e2 = base / "e2.json";
  std::string cmd1 = g_binary + " scaling --cf golden --depth 10 --levels 9 "
                                "--echo-config > " + e1.string();
  REQUIRE(std::system(cmd1.c_str()) == 0);
  std::string cmd2 = g_binary + " scaling --config " + e1.string() +
                     " --echo-config > " + e2.string();
  REQUIRE(std::system(cmd2.c_str()) == 0);
  CHECK(slurp(e1) == slurp(e2));
  // the echoed config carries defaults plus the resolved precision
  auto cfg = slurp_json(e1);
  CHECK(cfg["depth"] == 10);
  CHECK(cfg["precision"] == "f64");
  CHECK(cfg.contains("family"));
}

TEST_CASE("extended precision is selectable by flag and environment") {
  auto rf = run_cli("prec_flag",
                    "scaling --cf golden --depth 10 --levels 8 "
                    "--precision ext");
  CHECK(rf.exit_code == 0);
  CHECK(slurp_json(rf.dir / "manifest.json")["precision"] == "ext");

  auto re = run_cli("prec_env", "scaling --cf golden --depth 10 --levels 8",
                    "RENORMLAB_PRECISION=ext");
  CHECK(re.exit_code == 0);
  CHECK(slurp_json(re.dir / "manifest.json")["precision"] == "ext");
  // at 40 digits the lengths carry more than 17 significant digits
  std::string cell = slurp(re.dir / "scaling.csv");
  auto line_end = cell.find('\n', cell.find('\n') + 1);
  auto first_row = cell.substr(cell.find('\n') + 1,
                               line_end - cell.find('\n') - 1);
  auto c1 = first_row.find(',');
  auto c2 = first_row.find(',', c1 + 1);
  CHECK(c2 - c1 > 30);  // 40-digit decimal payload
}

TEST_CASE("manifest records the run") {
  auto r = run_cli("manifest", "tune --family arnold-cubic --cf silver "
                               "--depth 10");
  CHECK(r.exit_code == 0);
  auto m = slurp_json(r.dir / "manifest.json");
  CHECK(m["subcommand"] == "tune");
  CHECK(m["config_hash"].get<std::string>().size() == 16);
  CHECK(m["config"]["cf"]["period"][0] == 2);
  CHECK(m["timings"].contains("total"));
  double theta =
      std::stod(slurp_json(r.dir / "tune.json")["theta"].get<std::string>());
  CHECK(theta > 0.0);
  CHECK(theta < 1.0);
}

TEST_CASE("fatou residual table meets its tolerance") {
  auto r = run_cli("fatou", "fatou --p 0 --q 1 --side attracting");
  CHECK(r.exit_code == 0);
  auto out = slurp_json(r.dir / "fatou.json");
  CHECK(out["max_abel_residual"].get<double>() <= 1e-6);
  std::string csv = slurp(r.dir / "fatou.csv");
  CHECK(csv.substr(0, csv.find('\n')) ==
        "index,z_re,z_im,phi_re,phi_im,abel_residual");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 33);  // header + 32
}

TEST_CASE("grid-area summary exposes a positive pointed density") {
  auto r = run_cli("gridarea", "grid-area --height 200");
  CHECK(r.exit_code == 0);
  auto out = slurp_json(r.dir / "grid_area.json");
  CHECK(out["c_hat"].get<double>() > 0.0);
  std::string csv = slurp(r.dir / "grid_area.csv");
  CHECK(csv.substr(0, csv.find('\n')) == "center_re,center_im,area,generation");
}

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: %s <renormlab binary> [doctest args]\n",
                 argv[0]);
    return 1;
  }
  g_binary = argv[1];
  doctest::Context ctx;
  ctx.applyCommandLine(argc - 1, argv + 1);
  return ctx.run();
}
