#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pat/harness.hpp"
#include "support.hpp"

using namespace pat;
using namespace pat::testing;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Summary rows without the trailing wall-time column.
std::string strip_wall_time(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) {
      const std::string rel = fs::relative(e.path(), root).string();
      files[rel] = e.path().filename() == "summary.csv" ? strip_wall_time(slurp(e.path())) : slurp(e.path());
    }
  return files;
}

}  // namespace

TEST_CASE("noise") {
  const DetectorArray det = DetectorArray::uniform(630);
  const TimeAxis axis{4000, 0.001, 4.0};
  Sinogram m = Sinogram::zeros(det, axis.n_t, axis.dt);
  for (std::size_t d = 0; d < m.n_det; ++d)
    for (std::size_t k = 0; k < m.n_t; ++k) m.at(d, k) = std::sin(0.01 * k + d) * std::exp(-1e-3 * k);

  SUBCASE("no-noise sentinel") {
    const Sinogram same = add_noise(m, kNoNoise, 1);
    CHECK(same.samples == m.samples);
  }
  SUBCASE("empirical SNR") {
    const Sinogram noisy = add_noise(m, 10.0, 7);
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t n = 0; n < m.samples.size(); ++n) {
      const double e = noisy.samples[n] - m.samples[n];
      sum += e;
      sq += e * e;
    }
    const double count = static_cast<double>(m.samples.size());
    const double sigma = std::sqrt(sq / count - (sum / count) * (sum / count));
    const double snr = 20.0 * std::log10(m.max_abs() / sigma);
    CHECK(std::abs(snr - 10.0) <= 0.2);
  }
  SUBCASE("sigma ratio") {
    CHECK(std::abs(noise_sigma(m, 5.0) / noise_sigma(m, 10.0) - std::pow(10.0, 5.0 / 20.0)) <= 1e-12);
  }
  SUBCASE("deterministic per seed, inactive rows untouched") {
    const DetectorArray half = DetectorArray::uniform(64, Arc::lower_half());
    Sinogram h = Sinogram::zeros(half, 100, 0.01);
    for (std::size_t d = 0; d < h.n_det; ++d)
      if (h.active(d))
        for (std::size_t k = 0; k < h.n_t; ++k) h.at(d, k) = 1.0;
    const Sinogram a = add_noise(h, 5.0, 3);
    const Sinogram b = add_noise(h, 5.0, 3);
    const Sinogram c = add_noise(h, 5.0, 4);
    CHECK(a.samples == b.samples);
    CHECK(a.samples != c.samples);
    for (std::size_t d = 0; d < h.n_det; ++d)
      if (!h.active(d))
        for (std::size_t k = 0; k < h.n_t; ++k) CHECK(a.at(d, k) == 0.0);
  }
  SUBCASE("zero data with finite SNR") {
    CHECK_THROWS_AS(add_noise(Sinogram::zeros(det, 10, 0.1), 10.0, 1), std::invalid_argument);
  }
}

TEST_CASE("relative L2 error") {
  const Grid2D g = Grid2D::covering_unit_disk(0.05, 6);
  const Field f = build_initial_pressure(PhantomSpec::builtin("mandrill"), g).values;
  CHECK(rel_l2_error(f, f) == 0.0);
  CHECK(rel_l2_error(Field(g), f) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rel_l2_error(2.0 * f, f) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(rel_l2_error(f, Field(g)), std::invalid_argument);
  // Different grids: the reference is resampled onto the reconstruction grid.
  const Grid2D fine = Grid2D::covering_unit_disk(0.04, 6);
  const Field smooth = build_initial_pressure(PhantomSpec::builtin("smooth"), fine).values;
  const Field coarse = build_initial_pressure(PhantomSpec::builtin("smooth"), g).values;
  CHECK(rel_l2_error(coarse, smooth) < 0.05);
}

TEST_CASE("arc and variant names") {
  CHECK(parse_arc("full") == Arc::full());
  CHECK(parse_arc("lower_half") == Arc::lower_half());
  const Arc a = parse_arc("200, 300");
  CHECK(a.start == doctest::Approx(200.0 * std::numbers::pi / 180.0));
  CHECK(a.end == doctest::Approx(300.0 * std::numbers::pi / 180.0));
  CHECK_THROWS_AS(parse_arc("upper"), std::invalid_argument);
  CHECK(parse_medium_variant(to_string(MediumVariant::product_in_rho)) == MediumVariant::product_in_rho);
  CHECK_THROWS_AS(parse_medium_variant("kappa"), std::invalid_argument);
  CHECK(arc_label(Arc::full()) != arc_label(Arc::lower_half()));
}

TEST_CASE("experiment spec parsing") {
  const ExperimentSpec s = ExperimentSpec::parse(
      "name = demo\nphantom = builtin:fish\nmedia = true, product_in_kappa\narcs = full; lower_half\n"
      "T_multiples = 2, 4\nsnr_db = inf, 10\nmethods = tr, landweber\nk = 7\nseeds = 1, 2\noutput = /tmp/x\n");
  CHECK(s.name == "demo");
  CHECK(s.media.size() == 2);
  CHECK(s.arcs.size() == 2);
  CHECK(s.T_multiples == std::vector<double>{2.0, 4.0});
  CHECK(std::isinf(s.snr_db[0]));
  CHECK(s.methods.size() == 2);
  CHECK(s.k == 7);
  CHECK(s.seeds.size() == 2);
  CHECK(s.output_dir == "/tmp/x");
  CHECK(s.n_det == 630);
  CHECK(s.sim_dx == 0.0095);
  CHECK(s.recon_dx == 0.01);
  CHECK_THROWS_AS(ExperimentSpec::parse("colour = red\n"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentSpec::parse("methods = magic\n"), std::invalid_argument);
  CHECK_THROWS_AS(ExperimentSpec::parse("T_multiples = -1\n"), std::invalid_argument);
}

TEST_CASE("small experiment") {
  const fs::path root = fs::temp_directory_path() / "pat_test_harness";
  fs::remove_all(root);
  ExperimentSpec s;
  s.name = "tiny";
  s.phantom = "builtin:smooth";
  s.n_det = 48;
  s.arcs = {Arc::full(), Arc::lower_half()};
  s.T_multiples = {2.0};
  s.snr_db = {kNoNoise, 10.0};
  s.methods = {ReconMethod::time_reversal, ReconMethod::neumann, ReconMethod::landweber};
  s.k = 2;
  s.seeds = {1, 2};
  s.sim_dx = 0.045;
  s.recon_dx = 0.05;
  s.pml_width = 8;
  s.threads = 3;

  SUBCASE("runs every cell and is reproducible") {
    s.output_dir = (root / "a").string();
    const ExperimentReport a = run_experiment(s);
    // Clean data: 2 arcs x 3 methods; noisy data: 2 arcs x 2 seeds x 3 methods.
    CHECK(a.cells.size() == 18);
    for (const CellResult& c : a.cells) {
      CAPTURE(c.method);
      CHECK(c.error.empty());
      CHECK(std::isfinite(c.rel_l2_error));
    }
    const std::string summary = slurp(a.summary_path);
    CHECK(summary.rfind(kSummaryHeader, 0) == 0);

    s.output_dir = (root / "b").string();
    s.threads = 1;
    run_experiment(s);
    const auto ta = tree(root / "a");
    const auto tb = tree(root / "b");
    CHECK(ta.size() == tb.size());
    for (const auto& [name, content] : ta) {
      CAPTURE(name);
      REQUIRE(tb.count(name) == 1);
      CHECK(content == tb.at(name));
    }
    CHECK_FALSE(report_summaries({a.summary_path}).empty());
  }
  SUBCASE("zero methods emits only data") {
    s.methods.clear();
    s.output_dir = (root / "c").string();
    const ExperimentReport r = run_experiment(s);
    CHECK(r.cells.empty());
    bool has_data = false;
    for (const auto& e : fs::directory_iterator(root / "c"))
      if (e.path().extension() == ".sino") has_data = true;
    CHECK(has_data);
  }
}

TEST_CASE("verify suites report") {
  const VerifyReport r = verify("norms", "tiny");
  CHECK(r.passed());
  CHECK(r.checks.size() == 2);
  std::ostringstream out;
  print_report(r, out);
  CHECK(out.str().find("PASSED") != std::string::npos);
  CHECK_THROWS_AS(verify("bogus", "tiny"), std::invalid_argument);
  CHECK_THROWS_AS(verify("norms", "huge"), std::invalid_argument);
}
