#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gwdr/matrix_io.hpp"
#include "gwdr/run.hpp"
#include "test_support.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

using namespace gwdr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gwdr_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST_CASE("csv round trip is exact at 17 significant digits") {
  const fs::path dir = temp_dir("csv");
  Matrix m(3, 3);
  m << 1.0 / 3.0, 1e-17, -0.0, 1e300, -2.5000000000000004, 0.1, 3.0, M_PI, -1e-308;
  const fs::path f = dir / "m.csv";
  write_csv_matrix(f.string(), m);
  const Matrix back = read_csv_matrix(f.string());
  CHECK(back == m);

  // write -> read -> write is byte-stable
  const fs::path g = dir / "m2.csv";
  write_csv_matrix(g.string(), back);
  CHECK(slurp(f) == slurp(g));
}

TEST_CASE("csv reader skips headers and reports bad lines") {
  const fs::path dir = temp_dir("csv_hdr");
  {
    std::ofstream out(dir / "h.csv");
    out << "x,y\n1,2\n3,4\n";
  }
  const Matrix m = read_csv_matrix((dir / "h.csv").string());
  CHECK(m.rows() == 2);
  CHECK(m(1, 1) == 4.0);

  {
    std::ofstream out(dir / "bad.csv");
    out << "1,2\n3,oops\n";
  }
  try {
    read_csv_matrix((dir / "bad.csv").string());
    FAIL("expected CsvError");
  } catch (const CsvError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }

  {
    std::ofstream out(dir / "ragged.csv");
    out << "1,2\n3\n";
  }
  CHECK_THROWS_AS(read_csv_matrix((dir / "ragged.csv").string()), CsvError);

  {
    std::ofstream out(dir / "labels.csv");
    out << "label\n0\n2\n1\n";
  }
  CHECK(read_csv_labels((dir / "labels.csv").string()) == LabelVector{0, 2, 1});
}

TEST_CASE("config json parsing and validation") {
  const fs::path dir = temp_dir("config");
  {
    std::ofstream out(dir / "c.json");
    out << R"({"task": "fgwdr", "n": 4, "d": 2, "loss": "kl", "alpha": 0.25,
               "kernel": {"kind": "sne", "xi": 12}, "seeds": [3, 5],
               "solver": {"restarts": 7}, "gwdr": {"lr": 0.2, "bcd_iters": 9},
               "blobs": {"samples": 40, "clusters": 2, "dim": 3}})";
  }
  const RunConfig c = parse_config_json((dir / "c.json").string());
  CHECK(c.task == TaskKind::fgwdr);
  CHECK(c.n == 4);
  CHECK(c.loss == LossKind::KL);
  CHECK(c.alpha == 0.25);
  CHECK(c.kernel.kind == KernelKind::sne);
  CHECK(c.kernel.xi == 12.0);
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 5});
  CHECK(c.solver.restarts == 7);
  CHECK(c.adam.lr == 0.2);
  CHECK(c.bcd_iters == 9);
  REQUIRE(c.blobs.has_value());
  CHECK(c.blobs->samples == 40);

  {
    std::ofstream out(dir / "bad.json");
    out << R"({"task": "nope"})";
  }
  CHECK_THROWS_AS(parse_config_json((dir / "bad.json").string()), ConfigError);
  CHECK_THROWS_AS(parse_config_json((dir / "missing.json").string()), ConfigError);
}

TEST_CASE("default alpha grid carries thirteen values") {
  const auto& grid = default_alpha_grid();
  CHECK(grid.size() == 13);
  CHECK(grid.front() == 0.0);
  CHECK(grid.back() == 1.0);
  CHECK(grid[1] == 0.000001);
  CHECK(grid[11] == 0.999999);
}

TEST_CASE("cluster run writes metrics, labels and a manifest") {
  const fs::path dir = temp_dir("cluster_run");
  RunConfig c;
  c.task = TaskKind::cluster_srgwb;
  c.n = 2;
  c.seeds = {0, 1};
  c.blobs = BlobSpec{24, 2, 3, 8.0, 5};
  c.output_dir = (dir / "out").string();
  execute(c);

  const auto metrics = load_json(dir / "out" / "metrics.json");
  CHECK(metrics["per_seed"].size() == 2);
  CHECK(metrics["per_seed"][0]["metrics"].contains("ari"));
  CHECK(metrics["aggregate"]["ari"]["mean"].get<double>() == doctest::Approx(1.0));
  CHECK(fs::exists(dir / "out" / "labels_seed0.csv"));
  CHECK(fs::exists(dir / "out" / "structure_seed1.csv"));
  CHECK(fs::exists(dir / "out" / "report_seed0.json"));

  const auto manifest = load_json(dir / "out" / "manifest.json");
  CHECK(manifest["version"] == kVersion);
  CHECK(manifest["config"]["task"] == "cluster_srgwb");
  CHECK(manifest["timings"].contains("stages"));
}

TEST_CASE("missing ground truth degrades metrics to effective_clusters") {
  const fs::path dir = temp_dir("no_labels");
  const BlobData blobs = make_blobs(BlobSpec{20, 2, 3, 8.0, 1});
  write_csv_matrix((dir / "x.csv").string(), blobs.X.values);

  RunConfig c;
  c.task = TaskKind::cluster_srgwb;
  c.n = 2;
  c.seeds = {0};
  c.input_path = (dir / "x.csv").string();
  c.output_dir = (dir / "out").string();
  execute(c);

  const auto metrics = load_json(dir / "out" / "metrics.json");
  const auto& m = metrics["per_seed"][0]["metrics"];
  CHECK(m.contains("effective_clusters"));
  CHECK(!m.contains("ari"));
  CHECK(!m.contains("homogeneity"));
  CHECK(!m.contains("silhouette"));
}

TEST_CASE("embedding run emits svg with one marker per nonempty prototype") {
  const fs::path dir = temp_dir("gwdr_run");
  RunConfig c;
  c.task = TaskKind::gwdr;
  c.n = 2;
  c.d = 2;
  c.seeds = {0};
  c.blobs = BlobSpec{24, 2, 3, 10.0, 3};
  c.output_dir = (dir / "out").string();
  execute(c);

  CHECK(fs::exists(dir / "out" / "embeddings_seed0.csv"));
  CHECK(fs::exists(dir / "out" / "weights_seed0.csv"));
  const std::string svg = slurp(dir / "out" / "plot_seed0.svg");
  CHECK(svg.find("viewBox=\"0 0 800 800\"") != std::string::npos);

  const Vector weights = [&] {
    const Matrix m = read_csv_matrix((dir / "out" / "weights_seed0.csv").string());
    return Vector(m.col(0));
  }();
  int nonempty = 0;
  for (Eigen::Index j = 0; j < weights.size(); ++j)
    if (weights(j) > kEmptyColumnMass) ++nonempty;
  int markers = 0;
  for (std::size_t pos = svg.find("<circle"); pos != std::string::npos;
       pos = svg.find("<circle", pos + 1))
    ++markers;
  CHECK(markers == nonempty);

  // deterministic bytes for a fixed seed
  RunConfig c2 = c;
  c2.output_dir = (dir / "out2").string();
  execute(c2);
  CHECK(slurp(dir / "out" / "plot_seed0.svg") == slurp(dir / "out2" / "plot_seed0.svg"));
}

TEST_CASE("alpha grid override controls the table size") {
  const fs::path dir = temp_dir("alpha_grid");
  RunConfig c;
  c.task = TaskKind::alpha_grid;
  c.n = 2;
  c.d = 2;
  c.seeds = {0};
  c.alpha_grid = {0.0, 1.0};
  c.blobs = BlobSpec{20, 2, 3, 8.0, 2};
  c.output_dir = (dir / "out").string();
  execute(c);

  const auto doc = load_json(dir / "out" / "alpha_grid.json");
  CHECK(doc["grid"].size() == 2);
  CHECK(doc.contains("alpha_star"));

  // the selection needs ground truth
  const BlobData blobs = make_blobs(BlobSpec{20, 2, 3, 8.0, 2});
  write_csv_matrix((dir / "x.csv").string(), blobs.X.values);
  RunConfig no_truth = c;
  no_truth.blobs.reset();
  no_truth.input_path = (dir / "x.csv").string();
  no_truth.output_dir = (dir / "out3").string();
  CHECK_THROWS_AS(execute(no_truth), ConfigError);
}

TEST_CASE("config errors surface before any solver work") {
  RunConfig c;
  c.input_path = "/definitely/not/here.csv";
  CHECK_THROWS_AS(execute(c), ConfigError);

  RunConfig big;
  big.blobs = BlobSpec{10, 2, 3, 8.0, 1};
  big.n = 50;  // n > N
  CHECK_THROWS_AS(execute(big), ConfigError);
}

#ifdef GWDR_CLI_PATH
TEST_CASE("cli exit codes: 0 on success, 1 on config error") {
  const fs::path dir = temp_dir("cli_exit");
  const std::string cli = GWDR_CLI_PATH;
  const std::string blob_cmd = cli + " blobs --samples 20 --clusters 2 --dim 3 --seed 1" +
                               " --data-out " + (dir / "x.csv").string() + " --labels-out " +
                               (dir / "y.csv").string();
  CHECK(std::system(blob_cmd.c_str()) == 0);

  const std::string run_cmd = cli + " run --input " + (dir / "x.csv").string() + " --labels " +
                              (dir / "y.csv").string() +
                              " --task cluster_srgwb --n 2 --seeds 0 --out " +
                              (dir / "out").string();
  CHECK(std::system(run_cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "out" / "metrics.json"));

  const std::string bad_cmd = cli + " run --input /nope.csv --task cluster_srgwb --n 2 --out " +
                              (dir / "out_bad").string() + " 2>/dev/null";
  const int rc = std::system(bad_cmd.c_str());
  CHECK(WEXITSTATUS(rc) == 1);
}
#endif
