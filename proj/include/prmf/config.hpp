#pragma once

#include "prmf/ingest.hpp"
#include "prmf/prior.hpp"
#include "prmf/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace prmf {

enum class Method { Pmf, Prmf, PrmfImp, PrmfExp };

Method parse_method(const std::string& name);  // pmf | prmf | prmf-imp | prmf-exp
std::string to_string(Method method);
CovarianceMode covariance_mode(Method method);

// Effective configuration of one CLI invocation (config file + flag overrides).
struct RunConfig {
  std::string ratings_path;
  RatingFormat format = RatingFormat::Tsv;
  std::string social_path;
  std::string dataset;  // label used in reports; defaults to the ratings file name
  Method method = Method::Pmf;
  HyperParams params;
  std::string output_dir = "runs";
  std::vector<std::uint64_t> seeds{1};
  double train_fraction = 0.8;
  double validation_fraction = 0.1;
  int min_item_ratings = 0;
  bool filter_before_split = true;
  int covariance_floor = 2;
  int jobs = 1;
  std::vector<double> gamma_grid;

  // Method/parameter consistency; throws UsageError.
  void validate() const;

  std::string dataset_label() const;

  // Key = value lines that --config accepts back.
  std::string to_ini() const;
};

}  // namespace prmf
