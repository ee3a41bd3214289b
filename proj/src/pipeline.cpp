#include "prmf/pipeline.hpp"

#include "prmf/checkpoint.hpp"
#include "prmf/errors.hpp"
#include "prmf/ingest.hpp"
#include "prmf/prior.hpp"

#include <atomic>
#include <chrono>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;

namespace prmf {

namespace {

std::string hex(std::uint64_t v) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t fnv1a(std::string_view data, std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Serializes log output from concurrent runs.
class Log {
 public:
  explicit Log(std::ostream& out) : out_(out) {}
  void line(const std::string& s) {
    std::lock_guard lock(mu_);
    out_ << s << '\n';
    out_.flush();
  }

 private:
  std::ostream& out_;
  std::mutex mu_;
};

std::vector<RawRecord> load_records(const RunConfig& c) {
  std::ifstream in(c.ratings_path, std::ios::binary);
  if (!in) throw UsageError("cannot open ratings file '" + c.ratings_path + "'");
  return parse_ratings(in, c.format, c.params.range, c.ratings_path);
}

std::uint64_t split_key(const RunConfig& c, std::uint64_t seed) {
  std::uint64_t h = fnv1a(read_file(c.ratings_path));
  h = fnv1a(to_string(c.format) + ";" + g17(c.train_fraction) + ";" + g17(c.validation_fraction) + ";" +
                std::to_string(c.min_item_ratings) + ";" + (c.filter_before_split ? "pre" : "post") + ";" +
                std::to_string(seed) + ";" + g17(c.params.range.min) + ";" + g17(c.params.range.max),
            h);
  return h;
}

std::uint64_t prior_key(const RunConfig& c, std::uint64_t seed) {
  std::uint64_t h = split_key(c, seed);
  h = fnv1a(to_string(c.method) + ";" + std::to_string(c.covariance_floor) + ";" + std::to_string(c.params.d), h);
  if (!c.social_path.empty()) h = fnv1a(read_file(c.social_path), h);
  return h;
}

void write_records(const std::string& path, const std::vector<RawRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& r : records) out << r.user << '\t' << r.item << '\t' << g17(r.rating) << '\n';
  if (!out) throw UsageError("cannot write '" + path + "'");
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
  if (!out) throw UsageError("cannot write '" + path + "'");
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "' (run `prepare` first)");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  return lines;
}

SparseRatings read_split_file(const std::string& path, const IdMap& ids) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "' (run `prepare` first)");
  return to_sparse(parse_ratings(in, RatingFormat::Tsv, std::nullopt, path), ids);
}

void write_config(const RunConfig& c, const std::string& command) {
  fs::create_directories(c.output_dir);
  std::ofstream out(RunPaths{c.output_dir}.file(command + "-config.ini"), std::ios::binary | std::ios::trunc);
  out << "# effective configuration of `prmf " << command << "`\n" << c.to_ini();
}

PriorModel load_or_build_prior(const RunConfig& c, std::uint64_t seed, const DataSplit& split, Log& log,
                               bool* reused) {
  const RunPaths paths{c.output_dir};
  const auto key = prior_key(c, seed);
  const auto path = paths.prior_cache(to_string(c.method), seed);
  if (fs::exists(path)) {
    try {
      auto prior = load_prior_cache(path, key);
      if (reused) *reused = true;
      log.line("seed=" + std::to_string(seed) + " reusing prior cache " + path);
      return prior;
    } catch (const ParseError& err) {
      log.line("seed=" + std::to_string(seed) + " rebuilding prior cache: " + err.what());
    }
  }
  std::optional<SocialEdges> social;
  if (covariance_mode(c.method) == CovarianceMode::ExplicitMasked) {
    std::ifstream in(c.social_path, std::ios::binary);
    if (!in) throw UsageError("cannot open social file '" + c.social_path + "'");
    social = parse_social(in, split.ids.users, c.social_path);
    log.line("social edges=" + std::to_string(social->edges.size()) +
             " dropped_unknown=" + std::to_string(social->dropped_unknown) +
             " dropped_self_loops=" + std::to_string(social->dropped_self_loops));
  }
  PriorModel prior;
  prior.sigma = build_sigma(split.train, social ? &*social : nullptr, {covariance_mode(c.method), c.covariance_floor});
  prior.x = low_rank_factor(prior.sigma, c.params.d);
  fs::create_directories(fs::path(path).parent_path());
  save_prior_cache(prior, key, path);
  if (reused) *reused = false;
  log.line("seed=" + std::to_string(seed) + " wrote prior cache " + path + " (sigma nnz=" +
           std::to_string(prior.sigma.nonzeros()) + ")");
  return prior;
}

// Runs fn(index) for index in [0, n) on up to `jobs` threads; rethrows the first failure.
template <typename Fn>
void parallel_for(std::size_t n, int jobs, Fn fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mu;
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < n;) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first) first = std::current_exception();
      }
    }
  };
  const auto threads = std::min<std::size_t>(std::size_t(std::max(jobs, 1)), n);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (first) std::rethrow_exception(first);
}

HyperParams seeded(const HyperParams& p, std::uint64_t seed) {
  HyperParams q = p;
  q.seed = seed;
  return q;
}

}  // namespace

std::string RunPaths::split_dir(std::uint64_t seed) const {
  return (fs::path(root) / "splits" / ("seed-" + std::to_string(seed))).string();
}
std::string RunPaths::prior_cache(const std::string& method, std::uint64_t seed) const {
  return (fs::path(root) / "cache" / ("prior-" + method + "-seed-" + std::to_string(seed) + ".bin")).string();
}
std::string RunPaths::checkpoint(const std::string& method, std::uint64_t seed) const {
  return (fs::path(root) / "models" / (method + "-seed-" + std::to_string(seed) + ".ckpt")).string();
}
std::string RunPaths::file(const std::string& name) const { return (fs::path(root) / name).string(); }

std::vector<PreparedSeed> cmd_prepare(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (!fs::exists(config.ratings_path)) throw UsageError("ratings file '" + config.ratings_path + "' not found");
  if (!config.social_path.empty() && !fs::exists(config.social_path))
    throw UsageError("social file '" + config.social_path + "' not found");
  Log log(out);
  write_config(config, "prepare");
  const RunPaths paths{config.output_dir};

  std::optional<std::vector<RawRecord>> records;
  std::vector<PreparedSeed> prepared;
  for (const auto seed : config.seeds) {
    PreparedSeed ps;
    ps.seed = seed;
    const auto dir = paths.split_dir(seed);
    const auto key = hex(split_key(config, seed));
    const auto key_file = (fs::path(dir) / "key.txt").string();
    if (fs::exists(key_file) && read_lines(key_file) == std::vector<std::string>{key}) {
      ps.reused_split = true;
      log.line("seed=" + std::to_string(seed) + " reusing cached split " + dir);
    } else {
      if (!records) {
        records = load_records(config);
        if (config.filter_before_split) records = filter_min_item_ratings(*records, config.min_item_ratings);
        log.line("loaded " + std::to_string(records->size()) + " ratings from " + config.ratings_path);
      }
      auto parts = split_records(*records, config.train_fraction, config.validation_fraction, seed);
      if (!config.filter_before_split && config.min_item_ratings > 0) {
        // Post-split variant: item counts come from the training part only.
        std::unordered_map<std::string, int> counts;
        for (const auto& r : parts.train) ++counts[r.item];
        const auto keep = [&](std::vector<RawRecord>& v) {
          std::erase_if(v, [&](const RawRecord& r) { return counts[r.item] < config.min_item_ratings; });
        };
        keep(parts.train);
        keep(parts.validation);
        keep(parts.test);
      }
      const auto ids = IdMap::build(*records);
      fs::create_directories(dir);
      write_records((fs::path(dir) / "train.tsv").string(), parts.train);
      write_records((fs::path(dir) / "validation.tsv").string(), parts.validation);
      write_records((fs::path(dir) / "test.tsv").string(), parts.test);
      write_lines((fs::path(dir) / "users.txt").string(), ids.users.externals());
      write_lines((fs::path(dir) / "items.txt").string(), ids.items.externals());
      write_lines(key_file, {key});
      log.line("seed=" + std::to_string(seed) + " wrote split " + dir + " (train=" +
               std::to_string(parts.train.size()) + " validation=" + std::to_string(parts.validation.size()) +
               " test=" + std::to_string(parts.test.size()) + ")");
    }
    const auto loaded = load_split(config, seed);
    ps.sizes = {loaded.data.train.size(), loaded.data.validation.size(), loaded.data.test.size()};
    if (covariance_mode(config.method) != CovarianceMode::None)
      load_or_build_prior(config, seed, loaded.data, log, &ps.reused_prior);
    prepared.push_back(ps);
  }
  return prepared;
}

LoadedSplit load_split(const RunConfig& config, std::uint64_t seed) {
  const auto dir = fs::path(RunPaths{config.output_dir}.split_dir(seed));
  const auto key_file = (dir / "key.txt").string();
  if (read_lines(key_file) != std::vector<std::string>{hex(split_key(config, seed))})
    throw UsageError("split in " + dir.string() + " was prepared with a different configuration (run `prepare`)");
  LoadedSplit out;
  out.data.ids.users = IndexMap::from_externals(read_lines((dir / "users.txt").string()));
  out.data.ids.items = IndexMap::from_externals(read_lines((dir / "items.txt").string()));
  out.data.train = read_split_file((dir / "train.tsv").string(), out.data.ids);
  out.data.validation = read_split_file((dir / "validation.tsv").string(), out.data.ids);
  out.data.test = read_split_file((dir / "test.tsv").string(), out.data.ids);
  return out;
}

std::vector<ReportRow> cmd_train(const RunConfig& config, std::ostream& out) {
  config.validate();
  Log log(out);
  write_config(config, "train");
  const RunPaths paths{config.output_dir};
  const auto method = to_string(config.method);
  fs::create_directories(fs::path(paths.checkpoint(method, 0)).parent_path());

  std::vector<ReportRow> rows(config.seeds.size());
  std::vector<TimingRow> timings(config.seeds.size());
  parallel_for(config.seeds.size(), config.jobs, [&](std::size_t idx) {
    const auto seed = config.seeds[idx];
    const auto start = std::chrono::steady_clock::now();
    const auto split = load_split(config, seed);
    const auto params = seeded(config.params, seed);
    std::optional<PriorModel> prior;
    if (covariance_mode(config.method) != CovarianceMode::None) {
      const auto path = paths.prior_cache(method, seed);
      if (!fs::exists(path)) throw UsageError("missing prior cache " + path + " (run `prepare` first)");
      prior = load_prior_cache(path, prior_key(config, seed));
    }
    TrainOptions opts;
    const auto tag = "seed=" + std::to_string(seed) + " ";
    opts.log = [&log, tag](const std::string& l) { log.line(tag + l); };
    TrainResult trained;
    try {
      trained = train_prmf(split.data.train, split.data.validation, prior ? &*prior : nullptr, params, opts);
    } catch (const DivergenceError& err) {
      log.line(tag + "method=" + method + " " + err.what());
      throw;
    }
    const auto fp = config_fingerprint(params, config.dataset_label());
    const auto metrics = evaluate(trained.model, split.data.test, params.range, fp);
    save_checkpoint({trained.model, split.data.ids, params, fp, trained.best_iteration}, paths.checkpoint(method, seed));
    write_trace(paths.file("trace-" + method + "-seed-" + std::to_string(seed) + ".csv"), trained.trace);
    rows[idx] = {config.dataset_label(), method, params, metrics, trained.model.theta.sparsity(), trained.best_iteration};
    timings[idx] = {method, seed,
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count()};
    char buf[160];
    std::snprintf(buf, sizeof buf, "test rmse=%.6f mae=%.6f best_iteration=%d", metrics.rmse, metrics.mae,
                  trained.best_iteration);
    log.line(tag + buf);
  });
  write_report(paths.file("report-" + method + ".csv"), rows);
  write_timings(paths.file("timings-" + method + ".csv"), timings);
  return rows;
}

std::vector<ReportRow> cmd_evaluate(const RunConfig& config, std::ostream& out) {
  config.validate();
  Log log(out);
  write_config(config, "evaluate");
  const RunPaths paths{config.output_dir};
  const auto method = to_string(config.method);
  std::vector<ReportRow> rows;
  for (const auto seed : config.seeds) {
    const auto ckpt = load_checkpoint(paths.checkpoint(method, seed));
    const auto split = load_split(config, seed);
    if (!(ckpt.ids == split.data.ids)) throw UsageError("checkpoint id maps do not match the prepared split");
    const auto metrics = evaluate(ckpt.model, split.data.test, ckpt.params.range, ckpt.fingerprint);
    rows.push_back({config.dataset_label(), method, ckpt.params, metrics, ckpt.model.theta.sparsity(), ckpt.best_iteration});
    char buf[160];
    std::snprintf(buf, sizeof buf, "seed=%llu test rmse=%.6f mae=%.6f", static_cast<unsigned long long>(seed),
                  metrics.rmse, metrics.mae);
    log.line(buf);
  }
  write_report(paths.file("evaluation-" + method + ".csv"), rows);
  return rows;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.gamma_grid.empty()) throw UsageError("sweep: empty gamma grid");
  if (config.method == Method::Pmf) throw UsageError("sweep: gamma has no effect for method pmf");
  Log log(out);
  write_config(config, "sweep");
  const RunPaths paths{config.output_dir};
  const auto method = to_string(config.method);

  // One task per (seed, gamma); results land in fixed slots so output order is stable.
  const std::size_t per_seed = config.gamma_grid.size();
  std::vector<SweepRow> rows(config.seeds.size() * per_seed);
  std::vector<LoadedSplit> splits;
  std::vector<std::optional<PriorModel>> priors;
  for (const auto seed : config.seeds) {
    splits.push_back(load_split(config, seed));
    std::optional<PriorModel> prior;
    if (covariance_mode(config.method) != CovarianceMode::None) {
      const auto path = paths.prior_cache(method, seed);
      if (!fs::exists(path)) throw UsageError("missing prior cache " + path + " (run `prepare` first)");
      prior = load_prior_cache(path, prior_key(config, seed));
    }
    priors.push_back(std::move(prior));
  }
  parallel_for(rows.size(), config.jobs, [&](std::size_t task) {
    const std::size_t s = task / per_seed;
    const double gamma = config.gamma_grid[task % per_seed];
    const auto& data = splits[s].data;
    const auto params = seeded(config.params, config.seeds[s]);
    const std::vector<double> one{gamma};
    const auto pts = gamma_sweep(data.train, data.validation, data.test, priors[s] ? &*priors[s] : nullptr, params,
                                 one);
    rows[task] = {config.seeds[s], pts.front()};
    char buf[200];
    std::snprintf(buf, sizeof buf, "seed=%llu gamma=%g sparsity=%.6f rmse=%.6f%s",
                  static_cast<unsigned long long>(config.seeds[s]), gamma, pts.front().sparsity, pts.front().rmse,
                  pts.front().error ? " (failed)" : "");
    log.line(buf);
  });
  write_sweep(paths.file("sweep-" + method + ".csv"), rows);
  write_sweep_curve(paths.file("sweep-curve-" + method + ".csv"), rows);
  return rows;
}

}  // namespace prmf
