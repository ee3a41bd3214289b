#include "doctest.h"
#include "oracles.hpp"

#include "prmf/checkpoint.hpp"
#include "prmf/config.hpp"
#include "prmf/errors.hpp"
#include "prmf/pipeline.hpp"
#include "prmf/prior.hpp"
#include "prmf/report.hpp"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("prmf-test-" + tag + "-" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spill(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << bytes;
}

prmf::ModelCheckpoint sample_checkpoint() {
  std::mt19937_64 rng(1);
  prmf::ModelCheckpoint c;
  c.model.u = oracle::random_factor(3, 2, 1.0, rng);
  c.model.v = oracle::random_factor(4, 2, 1.0, rng);
  c.model.theta = prmf::PrecisionMatrix(3, {{0, 0, 1.5}, {0, 2, -0.25}, {1, 1, 1e-300}});
  c.model.global_mean = 3.52;
  c.model.user_known = {1, 0, 1};
  c.model.item_known = {1, 1, 0, 1};
  c.ids.users = prmf::IndexMap::from_externals({"u1", "u2", "u3"});
  c.ids.items = prmf::IndexMap::from_externals({"a", "b", "c", "d"});
  c.params.d = 2;
  c.params.alpha = 0.25;
  c.params.gamma = 0.3;
  c.params.seed = 77;
  c.fingerprint = 0x0123456789abcdefULL;
  c.best_iteration = 4;
  return c;
}

prmf::RunConfig tiny_config(const std::string& out, prmf::Method method) {
  prmf::RunConfig c;
  c.ratings_path = std::string(PRMF_TEST_DATA) + "/tiny.tsv";
  c.social_path = std::string(PRMF_TEST_DATA) + "/tiny_social.txt";
  c.dataset = "tiny";
  c.method = method;
  c.output_dir = out;
  c.seeds = {1, 2};
  c.params.d = 3;
  c.params.lambda_u = 0.05;
  c.params.lambda_v = 0.05;
  c.params.learning_rate = 0.01;
  c.params.epochs = 5;
  c.params.max_iter = 3;
  c.params.rho = 10;
  if (method != prmf::Method::Pmf) c.params.alpha = 0.25;
  if (method == prmf::Method::PrmfImp || method == prmf::Method::PrmfExp) c.params.beta = 2.0;
  return c;
}

}  // namespace

TEST_CASE("checkpoint round trip is bitwise") {
  TempDir dir("ckpt");
  const auto c = sample_checkpoint();
  save_checkpoint(c, dir.file("m.ckpt"));
  const auto r = prmf::load_checkpoint(dir.file("m.ckpt"));
  CHECK(r.model.u == c.model.u);
  CHECK(r.model.v == c.model.v);
  CHECK(r.model.theta == c.model.theta);
  CHECK(r.model.global_mean == c.model.global_mean);
  CHECK(r.model.user_known == c.model.user_known);
  CHECK(r.model.item_known == c.model.item_known);
  CHECK(r.ids == c.ids);
  CHECK(r.params.alpha == c.params.alpha);
  CHECK(r.params.seed == 77);
  CHECK(r.fingerprint == c.fingerprint);
  CHECK(r.best_iteration == 4);
  save_checkpoint(r, dir.file("again.ckpt"));
  CHECK(slurp(dir.file("again.ckpt")) == slurp(dir.file("m.ckpt")));
}

TEST_CASE("damaged checkpoints are rejected") {
  TempDir dir("bad");
  save_checkpoint(sample_checkpoint(), dir.file("m.ckpt"));
  const std::string good = slurp(dir.file("m.ckpt"));

  std::string v = good;
  v[8] = 2;  // version follows the 8-byte magic
  spill(dir.file("v.ckpt"), v);
  CHECK_THROWS_AS(prmf::load_checkpoint(dir.file("v.ckpt")), prmf::ParseError);

  std::string magic = good;
  magic[0] = 'X';
  spill(dir.file("x.ckpt"), magic);
  CHECK_THROWS_AS(prmf::load_checkpoint(dir.file("x.ckpt")), prmf::ParseError);

  spill(dir.file("t.ckpt"), good.substr(0, good.size() - 5));
  CHECK_THROWS_AS(prmf::load_checkpoint(dir.file("t.ckpt")), prmf::ParseError);

  spill(dir.file("long.ckpt"), good + "x");
  CHECK_THROWS_AS(prmf::load_checkpoint(dir.file("long.ckpt")), prmf::ParseError);

  CHECK_THROWS(prmf::load_checkpoint(dir.file("missing.ckpt")));
}

TEST_CASE("prior cache") {
  TempDir dir("prior");
  std::mt19937_64 rng(2);
  const auto r = oracle::random_ratings(9, 12, 0.5, rng);
  prmf::PriorModel p;
  p.sigma = prmf::build_sigma(r, nullptr, {prmf::CovarianceMode::ImplicitDense, 2});
  p.x = prmf::low_rank_factor(p.sigma, 3);
  save_prior_cache(p, 42, dir.file("p.bin"));
  const auto back = prmf::load_prior_cache(dir.file("p.bin"), 42);
  CHECK(back.sigma == p.sigma);
  CHECK(back.x == p.x);
  CHECK_THROWS_AS(prmf::load_prior_cache(dir.file("p.bin"), 43), prmf::ParseError);
}

TEST_CASE("method rules") {
  prmf::RunConfig c;
  c.ratings_path = "r.tsv";
  c.method = prmf::Method::PrmfExp;
  c.params.alpha = 0.5;
  c.params.beta = 10;
  CHECK_THROWS_AS(c.validate(), prmf::UsageError);
  c.social_path = "s.txt";
  CHECK_NOTHROW(c.validate());

  c.method = prmf::Method::Prmf;
  CHECK_THROWS_AS(c.validate(), prmf::UsageError);
  c.params.beta = 0;
  CHECK_NOTHROW(c.validate());
  c.params.alpha = 0;
  CHECK_THROWS_AS(c.validate(), prmf::UsageError);

  c.method = prmf::Method::Pmf;
  CHECK_NOTHROW(c.validate());
  c.params.alpha = 0.5;
  CHECK_THROWS_AS(c.validate(), prmf::UsageError);

  CHECK(prmf::parse_method("prmf-imp") == prmf::Method::PrmfImp);
  CHECK_THROWS_AS(prmf::parse_method("svd"), prmf::UsageError);

  prmf::HyperParams h;
  h.rho = 0;
  CHECK_THROWS_AS(h.validate(), prmf::UsageError);
  h = {};
  h.range = {5, 1};
  CHECK_THROWS_AS(h.validate(), prmf::UsageError);
  h = {};
  h.d = 0;
  CHECK_THROWS_AS(h.validate(), prmf::UsageError);
}

TEST_CASE("prepare, train and evaluate on a tiny dataset") {
  TempDir dir("pipe");
  std::ostringstream log;
  auto cfg = tiny_config(dir.path.string(), prmf::Method::PrmfImp);

  const auto prepared = prmf::cmd_prepare(cfg, log);
  REQUIRE(prepared.size() == 2);
  CHECK_FALSE(prepared[0].reused_split);
  CHECK(prepared[0].sizes.train + prepared[0].sizes.validation + prepared[0].sizes.test == 527);
  CHECK(prepared[0].sizes.test == 105);

  std::ostringstream log2;
  const auto again = prmf::cmd_prepare(cfg, log2);
  CHECK(again[0].reused_split);
  CHECK(again[0].reused_prior);
  CHECK(log2.str().find("reusing cached split") != std::string::npos);

  const auto rows = prmf::cmd_train(cfg, log);
  REQUIRE(rows.size() == 2);
  for (const auto& r : rows) {
    CHECK(r.metrics.rmse >= r.metrics.mae);
    CHECK(r.metrics.num_test_ratings == 105);
  }
  const auto report = slurp(dir.file("report-prmf-imp.csv"));
  const auto ckpt = slurp(dir.file("models/prmf-imp-seed-1.ckpt"));
  CHECK(report.rfind("dataset,method,seed,", 0) == 0);
  CHECK(fs::exists(dir.file("train-config.ini")));

  // rerun: identical bytes
  prmf::cmd_train(cfg, log);
  CHECK(slurp(dir.file("report-prmf-imp.csv")) == report);
  CHECK(slurp(dir.file("models/prmf-imp-seed-1.ckpt")) == ckpt);

  // the checkpoint re-scores to the same numbers
  const auto eval = prmf::cmd_evaluate(cfg, log);
  REQUIRE(eval.size() == 2);
  CHECK(eval[0].metrics.rmse == rows[0].metrics.rmse);
  CHECK(eval[1].metrics.mae == rows[1].metrics.mae);
  CHECK(eval[0].best_iteration == rows[0].best_iteration);

  // jobs > 1 gives the same report
  cfg.jobs = 2;
  prmf::cmd_train(cfg, log);
  CHECK(slurp(dir.file("report-prmf-imp.csv")) == report);
}

TEST_CASE("explicit prior needs the social file") {
  TempDir dir("exp");
  std::ostringstream log;
  auto cfg = tiny_config(dir.path.string(), prmf::Method::PrmfExp);
  cfg.seeds = {1};
  prmf::cmd_prepare(cfg, log);
  CHECK(log.str().find("dropped_unknown=1") != std::string::npos);
  const auto rows = prmf::cmd_train(cfg, log);
  CHECK(rows.size() == 1);
  cfg.social_path.clear();
  CHECK_THROWS_AS(prmf::cmd_prepare(cfg, log), prmf::UsageError);
}

TEST_CASE("sweep writes one row per grid point, reproducibly") {
  TempDir dir("sweep");
  std::ostringstream log;
  auto cfg = tiny_config(dir.path.string(), prmf::Method::Prmf);
  cfg.seeds = {1};
  cfg.gamma_grid = {0, 0.1, 10};
  prmf::cmd_prepare(cfg, log);
  const auto rows = prmf::cmd_sweep(cfg, log);
  CHECK(rows.size() == 3);
  const auto bytes = slurp(dir.file("sweep-prmf.csv"));
  prmf::cmd_sweep(cfg, log);
  CHECK(slurp(dir.file("sweep-prmf.csv")) == bytes);
  CHECK(fs::exists(dir.file("sweep-curve-prmf.csv")));
  cfg.gamma_grid.clear();
  CHECK_THROWS_AS(prmf::cmd_sweep(cfg, log), prmf::UsageError);
}

TEST_CASE("a missing ratings file is reported") {
  TempDir dir("missing");
  std::ostringstream log;
  auto cfg = tiny_config(dir.path.string(), prmf::Method::Pmf);
  cfg.ratings_path = dir.file("nope.tsv");
  CHECK_THROWS(prmf::cmd_prepare(cfg, log));
}
