#include <doctest.h>

#include "oracles.hpp"
#include "seqrpf/config.hpp"
#include "seqrpf/svg.hpp"
#include "seqrpf/table.hpp"

using namespace seqrpf;

TEST_CASE("derived streams are deterministic and distinct") {
  CHECK(derive_stream(7, 0) == derive_stream(7, 0));
  CHECK(derive_stream(7, 0) != derive_stream(7, 1));
  CHECK(derive_stream(7, 0) != derive_stream(8, 0));

  Rng a(derive_stream(42, 3)), b(derive_stream(42, 3));
  for (int i = 0; i < 100; ++i) CHECK(a.bits() == b.bits());
}

TEST_CASE("uniform draws stay in range and pick honors zero weights") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0);
    CHECK(u < 1);
  }
  for (int i = 0; i < 200; ++i) {
    const int k = rng.pick({0.0, 1.0, 0.0, 2.0});
    CHECK((k == 1 || k == 3));
  }
}

TEST_CASE("line fit recovers exact affine data") {
  std::vector<double> x{1, 2, 3, 4, 5}, y;
  for (double v : x) y.push_back(3 - 2 * v);
  const LineFit f = fit_line(x, y);
  CHECK(f.slope == doctest::Approx(-2).epsilon(1e-12));
  CHECK(f.intercept == doctest::Approx(3).epsilon(1e-12));
  CHECK(f.r2 == doctest::Approx(1).epsilon(1e-12));
}

TEST_CASE("parallel for fills every slot once") {
  for (int jobs : {1, 4}) {
    std::vector<int> out(97, -1);
    parallel_for(97, jobs, [&](int i) { out[i] = i * i; });
    for (int i = 0; i < 97; ++i) CHECK(out[i] == i * i);
  }
}

TEST_CASE("golden mean admissible words count like fibonacci") {
  const SftSpec gm = make_golden_mean(12);
  validate(gm);
  for (int k = 1; k <= 10; ++k)
    CHECK(static_cast<long long>(admissible_blocks(gm, 0, k).size()) == oracle::fib(k + 2));
}

TEST_CASE("golden mean positivity horizon is two") {
  const SftSpec gm = make_golden_mean(8);
  CHECK_FALSE(primitivity_check(gm, 1));
  CHECK(primitivity_check(gm, 2));
  CHECK(probe_positivity_horizon(gm, 8) == 2);
}

TEST_CASE("dead transition rows are rejected") {
  SftSpec bad = make_full_shift(2, 4);
  bad.transitions[1](0, 0) = 0;
  bad.transitions[1](0, 1) = 0;
  CHECK_THROWS_AS(validate(bad), Error);
}

TEST_CASE("memory-2 golden mean recodes onto three blocks with five edges") {
  SftSpec gm = make_golden_mean(6);
  gm.memory = 2;
  for (int s = 0; s < gm.window(); ++s) {
    gm.potentials[s] = Eigen::VectorXd::Zero(gm.tuple_count(s));
    gm.observables[s] = Eigen::VectorXd::Zero(gm.tuple_count(s));
  }
  const SftSpec one = recode_to_memory_one(gm);
  CHECK(one.memory == 1);
  CHECK(one.alphabet_sizes[0] == 3);
  CHECK(one.transitions[0].sum() == 5);
}

TEST_CASE("seeded primitive specs are valid and reproducible") {
  const SftSpec a = make_seeded_primitive(3, 8, 0.3, 1.0, 99);
  const SftSpec b = make_seeded_primitive(3, 8, 0.3, 1.0, 99);
  validate(a);
  CHECK(primitivity_check(a, 2));
  for (int s = 0; s < a.window(); ++s) {
    CHECK(a.transitions[s] == b.transitions[s]);
    CHECK(a.potentials[s] == b.potentials[s]);
  }
}

TEST_CASE("step matrix entries follow the weighted-adjacency formula") {
  SftSpec gm = make_golden_mean(4);
  gm.potentials[0] << 0.25, -0.5;
  gm.observables[0] << 1.0, 2.0;
  const cplx z(0.3, -0.2);
  const OperatorMatrix op = build_sft_operator(gm, 0, z);
  for (int b = 0; b < 2; ++b)
    for (int a = 0; a < 2; ++a) {
      const cplx want = gm.transitions[0](a, b) == 0
                            ? cplx(0, 0)
                            : std::exp(gm.potentials[0](a) + z * gm.observables[0](a));
      CHECK(std::abs(op.entries(b, a) - want) <= 1e-15);
    }
}

TEST_CASE("twenty-step golden mean composition carries fibonacci entries") {
  const SftSpec gm = make_golden_mean(8);
  const SftFamily fam(gm);
  const ScaledProduct p = compose_scaled(fam, 0, 20, cplx(0, 0));
  const Eigen::MatrixXcd full = p.matrix * std::exp(p.log_scale);
  CHECK(std::abs(full(0, 0).real() - double(oracle::fib(21))) <= 1e-6);
  CHECK(std::abs(full(0, 1).real() - double(oracle::fib(20))) <= 1e-6);
  CHECK(std::abs(full(1, 0).real() - double(oracle::fib(20))) <= 1e-6);
  CHECK(std::abs(full(1, 1).real() - double(oracle::fib(19))) <= 1e-6);
}

TEST_CASE("weak norm of the two-step golden mean composition is three") {
  const SftSpec gm = make_golden_mean(8);
  const SftFamily fam(gm);
  CHECK(weak_norm(compose_scaled(fam, 0, 2, cplx(0, 0))) == doctest::Approx(3).epsilon(1e-12));
}

TEST_CASE("csv serialization is stable and exact") {
  Table t({"n", "value"});
  t.add_row({1.0, 1.0 / 3});
  CHECK(to_csv(t) == "n,value\n1,0.33333333333333331\n");
  CHECK_THROWS_AS(t.add_row({1.0}), Error);
  const double v = 0.1234567890123456789;
  CHECK(std::stod(format_cell(v)) == v);
}

TEST_CASE("plots skip points that cannot be drawn") {
  Series s{"data", {1, 2, 3}, {1, std::nan(""), 4}};
  PlotOptions po;
  po.title = "t";
  po.log_y = true;
  const std::string svg = render_plot({s}, po);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("nan") == std::string::npos);
}

TEST_CASE("circle presets validate and expose the mode dimension") {
  const CircleSpec spec = make_circle_doubling(2, 0.1, 4, 6);
  validate(spec);
  const CircleFamily fam(spec);
  CHECK(fam.dim(0) == 13);
}

TEST_CASE("configs parse explicit systems and reject stray keys") {
  const json good = json::parse(R"({
    "system": {
      "type": "sft",
      "window_len": 4,
      "alphabet": 2,
      "transitions": [[1, 1], [1, 0]],
      "potential": {"type": "constant", "value": 0.0},
      "observable": {"type": "symbol-linear", "scale": 2.0}
    },
    "params": {"n": 16},
    "seed": 5
  })");
  const ExperimentConfig cfg = parse_config(good);
  CHECK(cfg.seed == 5);
  CHECK(cfg.system.sft.window() == 4);
  CHECK(cfg.system.sft.observables[1](1) == 2.0);

  json stray = good;
  stray["system"]["bogus"] = 1;
  CHECK_THROWS_AS(parse_config(stray), Error);
  json stray2 = good;
  stray2["extra"] = true;
  CHECK_THROWS_AS(parse_config(stray2), Error);
}

TEST_CASE("config hashes ignore key order but track content") {
  const char* a = R"({"seed": 3, "system": {"type": "sft", "preset": "golden-mean"}})";
  const char* b = R"({"system": {"preset": "golden-mean", "type": "sft"}, "seed": 3})";
  CHECK(parse_config(json::parse(a)).hash == parse_config(json::parse(b)).hash);
  const char* c = R"({"seed": 4, "system": {"type": "sft", "preset": "golden-mean"}})";
  CHECK(parse_config(json::parse(a)).hash != parse_config(json::parse(c)).hash);
}

TEST_CASE("value generators fill tables and check lengths") {
  const json cfg = json::parse(R"({
    "system": {
      "type": "sft",
      "preset": "full-shift",
      "alphabet": 2,
      "window_len": 3,
      "observable": {"type": "values", "data": [[0.5, -0.5], [1.0, -1.0], [2.0, -2.0]]}
    }
  })");
  const SftSpec spec = parse_config(cfg).system.sft;
  CHECK(spec.observables[2](0) == 2.0);

  json bad = cfg;
  bad["system"]["observable"]["data"] = {{0.5}, {1.0}, {2.0}};
  CHECK_THROWS_AS(parse_config(bad), Error);
}
