#include "prmf/config.hpp"

#include "prmf/errors.hpp"

#include <cstdio>
#include <filesystem>
#include <sstream>

namespace prmf {

Method parse_method(const std::string& name) {
  if (name == "pmf") return Method::Pmf;
  if (name == "prmf") return Method::Prmf;
  if (name == "prmf-imp") return Method::PrmfImp;
  if (name == "prmf-exp") return Method::PrmfExp;
  throw UsageError("unknown method '" + name + "' (expected pmf, prmf, prmf-imp or prmf-exp)");
}

std::string to_string(Method method) {
  switch (method) {
    case Method::Pmf: return "pmf";
    case Method::Prmf: return "prmf";
    case Method::PrmfImp: return "prmf-imp";
    case Method::PrmfExp: return "prmf-exp";
  }
  return "?";
}

CovarianceMode covariance_mode(Method method) {
  switch (method) {
    case Method::PrmfImp: return CovarianceMode::ImplicitDense;
    case Method::PrmfExp: return CovarianceMode::ExplicitMasked;
    default: return CovarianceMode::None;
  }
}

void RunConfig::validate() const {
  if (ratings_path.empty()) throw UsageError("config: ratings path is required");
  if (seeds.empty()) throw UsageError("config: at least one seed is required");
  if (jobs < 1) throw UsageError("config: jobs must be >= 1");
  if (min_item_ratings < 0) throw UsageError("config: min_item_ratings must be >= 0");
  params.validate();
  switch (method) {
    case Method::Pmf:
      if (params.alpha != 0.0 || params.beta != 0.0) throw UsageError("config: method pmf requires alpha = 0 and beta = 0");
      break;
    case Method::Prmf:
      if (params.beta != 0.0) throw UsageError("config: method prmf forces beta = 0 (use prmf-imp or prmf-exp)");
      if (!(params.alpha > 0)) throw UsageError("config: method prmf requires alpha > 0");
      break;
    case Method::PrmfImp:
    case Method::PrmfExp:
      if (!(params.alpha > 0) || !(params.beta > 0))
        throw UsageError("config: method " + to_string(method) + " requires alpha > 0 and beta > 0");
      if (method == Method::PrmfExp && social_path.empty())
        throw UsageError("config: method prmf-exp requires a social edges file");
      break;
  }
}

std::string RunConfig::dataset_label() const {
  if (!dataset.empty()) return dataset;
  return std::filesystem::path(ratings_path).filename().string();
}

std::string RunConfig::to_ini() const {
  std::ostringstream o;
  o.precision(17);
  const auto list = [&o](const auto& values) {
    o << '[';
    for (std::size_t i = 0; i < values.size(); ++i) o << (i ? "," : "") << values[i];
    o << "]\n";
  };
  o << "ratings=\"" << ratings_path << "\"\n";
  o << "dataset-format=\"" << to_string(format) << "\"\n";
  if (!social_path.empty()) o << "social=\"" << social_path << "\"\n";
  o << "dataset=\"" << dataset_label() << "\"\n";
  o << "method=\"" << to_string(method) << "\"\n";
  o << "output-dir=\"" << output_dir << "\"\n";
  o << "seed=";
  list(seeds);
  o << "jobs=" << jobs << "\n";
  o << "train-fraction=" << train_fraction << "\n";
  o << "validation-fraction=" << validation_fraction << "\n";
  o << "min-item-ratings=" << min_item_ratings << "\n";
  o << "filter-before-split=" << (filter_before_split ? "true" : "false") << "\n";
  o << "covariance-floor=" << covariance_floor << "\n";
  o << "d=" << params.d << "\n";
  o << "lambda-u=" << params.lambda_u << "\n";
  o << "lambda-v=" << params.lambda_v << "\n";
  o << "alpha=" << params.alpha << "\n";
  o << "beta=" << params.beta << "\n";
  o << "gamma=" << params.gamma << "\n";
  o << "learning-rate=" << params.learning_rate << "\n";
  o << "rho=" << params.rho << "\n";
  o << "epochs=" << params.epochs << "\n";
  o << "admm-iters=" << params.admm_iters << "\n";
  o << "max-iter=" << params.max_iter << "\n";
  o << "rating-min=" << params.range.min << "\n";
  o << "rating-max=" << params.range.max << "\n";
  o << "decay=" << params.decay << "\n";
  if (!gamma_grid.empty()) {
    o << "gamma-grid=";
    list(gamma_grid);
  }
  return o.str();
}

}  // namespace prmf
