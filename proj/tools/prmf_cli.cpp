// prmf: prepare splits, train, evaluate and sweep PMF / PRMF models.
//
//   prmf prepare --config run.ini
//   prmf train   --config run.ini --method prmf --alpha 0.125
//   prmf sweep   --config run.ini --method prmf-imp --gamma-grid 0 1e-4 0.3 10
#include "prmf/errors.hpp"
#include "prmf/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic relational matrix factorization"};
  app.set_config("--config", "", "key = value configuration file; command-line flags take precedence");
  app.require_subcommand(1);

  prmf::RunConfig cfg;
  std::string format = "tsv";
  std::string method = "pmf";

  app.add_option("--ratings", cfg.ratings_path, "Ratings file");
  app.add_option("--dataset-format", format, "tsv | double-colon")->check(CLI::IsMember({"tsv", "double-colon"}));
  app.add_option("--social", cfg.social_path, "Social edges file (user user per line)");
  app.add_option("--dataset", cfg.dataset, "Dataset label used in reports");
  app.add_option("--method", method, "pmf | prmf | prmf-imp | prmf-exp")
      ->check(CLI::IsMember({"pmf", "prmf", "prmf-imp", "prmf-exp"}));
  app.add_option("--output-dir", cfg.output_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", cfg.seeds, "Seed list; one run per seed")->capture_default_str();
  app.add_option("--jobs", cfg.jobs, "Concurrent runs")->capture_default_str();
  app.add_option("--train-fraction", cfg.train_fraction)->capture_default_str();
  app.add_option("--validation-fraction", cfg.validation_fraction, "Fraction of the training part held out")
      ->capture_default_str();
  app.add_option("--min-item-ratings", cfg.min_item_ratings, "Drop items with fewer ratings")->capture_default_str();
  app.add_option("--filter-before-split", cfg.filter_before_split)->capture_default_str();
  app.add_option("--covariance-floor", cfg.covariance_floor, "Minimum co-rated items for a covariance")
      ->capture_default_str();

  auto& p = cfg.params;
  app.add_option("--d", p.d, "Latent dimension")->capture_default_str();
  app.add_option("--lambda-u", p.lambda_u)->capture_default_str();
  app.add_option("--lambda-v", p.lambda_v)->capture_default_str();
  app.add_option("--alpha", p.alpha, "Dependency weight")->capture_default_str();
  app.add_option("--beta", p.beta, "Prior-information weight")->capture_default_str();
  app.add_option("--gamma", p.gamma, "l1 weight on Theta")->capture_default_str();
  app.add_option("--learning-rate", p.learning_rate)->capture_default_str();
  app.add_option("--rho", p.rho, "ADMM penalty")->capture_default_str();
  app.add_option("--epochs", p.epochs, "SGD epochs per outer iteration")->capture_default_str();
  app.add_option("--admm-iters", p.admm_iters, "ADMM iterations per outer iteration")->capture_default_str();
  app.add_option("--max-iter", p.max_iter, "Outer iterations")->capture_default_str();
  app.add_option("--rating-min", p.range.min)->capture_default_str();
  app.add_option("--rating-max", p.range.max)->capture_default_str();
  app.add_option("--decay", p.decay, "Per-epoch learning-rate decay")->capture_default_str();
  app.add_option("--gamma-grid", cfg.gamma_grid, "Gamma values for `sweep`");

  auto* prepare = app.add_subcommand("prepare", "Parse, filter and split ratings; build the prior cache");
  auto* train = app.add_subcommand("train", "Train one model per seed and write checkpoints + report");
  auto* evaluate = app.add_subcommand("evaluate", "Re-score saved checkpoints on their test splits");
  auto* sweep = app.add_subcommand("sweep", "Train across --gamma-grid and write sparsity/RMSE curves");
  for (auto* sub : {prepare, train, evaluate, sweep}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.format = prmf::parse_rating_format(format);
    cfg.method = prmf::parse_method(method);
    if (*prepare) prmf::cmd_prepare(cfg, std::cerr);
    if (*train) prmf::cmd_train(cfg, std::cerr);
    if (*evaluate) prmf::cmd_evaluate(cfg, std::cerr);
    if (*sweep) prmf::cmd_sweep(cfg, std::cerr);
  } catch (const prmf::DivergenceError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 3;
  } catch (const prmf::UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return 1;
  }
  return 0;
}
