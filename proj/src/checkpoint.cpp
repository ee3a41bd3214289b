#include "prmf/checkpoint.hpp"

#include "prmf/errors.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <type_traits>

namespace prmf {

namespace {

constexpr std::array<char, 8> kModelMagic{'P', 'R', 'M', 'F', 'C', 'K', 'P', 'T'};
constexpr std::array<char, 8> kPriorMagic{'P', 'R', 'M', 'F', 'P', 'R', 'I', 'O'};
constexpr std::uint32_t kPriorVersion = 1;

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary | std::ios::trunc), path_(path) {
    if (!out_) throw UsageError("cannot open '" + path + "' for writing");
  }

  template <typename T>
  void put(T value) {
    static_assert(std::is_arithmetic_v<T>);
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    U bits = std::bit_cast<U>(value);
    for (std::size_t b = 0; b < sizeof(U); ++b) out_.put(char((bits >> (8 * b)) & 0xff));
  }

  void bytes(const char* data, std::size_t n) { out_.write(data, std::streamsize(n)); }

  void string(const std::string& s) {
    put(std::uint32_t(s.size()));
    bytes(s.data(), s.size());
  }

  template <typename Derived>
  void matrix(const Eigen::MatrixBase<Derived>& a) {
    for (Index r = 0; r < a.rows(); ++r)
      for (Index c = 0; c < a.cols(); ++c) put(double(a(r, c)));
  }

  void finish() {
    out_.flush();
    if (!out_) throw UsageError("write to '" + path_ + "' failed");
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
    if (!in_) throw UsageError("cannot open '" + path + "'");
  }

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint8_t>>;
    unsigned char buf[sizeof(U)];
    raw(reinterpret_cast<char*>(buf), sizeof(U));
    U bits = 0;
    for (std::size_t b = 0; b < sizeof(U); ++b) bits |= U(buf[b]) << (8 * b);
    return std::bit_cast<T>(bits);
  }

  void raw(char* data, std::size_t n) {
    in_.read(data, std::streamsize(n));
    if (std::size_t(in_.gcount()) != n) fail("truncated file");
  }

  std::string string() {
    const auto n = get<std::uint32_t>();
    std::string s(n, '\0');
    raw(s.data(), n);
    return s;
  }

  std::uint64_t count(std::uint64_t limit) {
    const auto n = get<std::uint64_t>();
    if (n > limit) fail("implausible element count");
    return n;
  }

  FactorMatrix matrix(Index rows, Index cols) {
    FactorMatrix a(rows, cols);
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) a(r, c) = get<double>();
    return a;
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) fail("trailing bytes");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(path_, 0, what); }

 private:
  std::ifstream in_;
  std::string path_;
};

constexpr std::uint64_t kMaxCount = std::uint64_t(1) << 40;

void write_sparse(Writer& w, const SymmetricSparse<double>& s) {
  w.put(std::uint64_t(s.entries().size()));
  for (const auto& e : s.entries()) {
    w.put(std::uint32_t(e.row));
    w.put(std::uint32_t(e.col));
    w.put(e.value);
  }
}

SymmetricSparse<double> read_sparse(Reader& r, int size) {
  const auto nnz = r.count(kMaxCount);
  std::vector<SymmetricEntry<double>> entries;
  entries.reserve(nnz);
  for (std::uint64_t t = 0; t < nnz; ++t) {
    const auto row = r.get<std::uint32_t>();
    const auto col = r.get<std::uint32_t>();
    const auto value = r.get<double>();
    if (row > col || col >= std::uint32_t(size)) r.fail("sparse entry out of canonical range");
    entries.push_back({int(row), int(col), value});
  }
  return SymmetricSparse<double>(size, std::move(entries));
}

void write_index_map(Writer& w, const IndexMap& map) {
  w.put(std::uint64_t(map.size()));
  for (const auto& s : map.externals()) w.string(s);
}

IndexMap read_index_map(Reader& r) {
  const auto n = r.count(kMaxCount);
  std::vector<std::string> ext;
  ext.reserve(n);
  for (std::uint64_t t = 0; t < n; ++t) ext.push_back(r.string());
  return IndexMap::from_externals(std::move(ext));
}

void check_magic(Reader& r, const std::array<char, 8>& magic) {
  std::array<char, 8> got{};
  r.raw(got.data(), got.size());
  if (got != magic) r.fail("bad magic");
}

}  // namespace

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path) {
  const auto& m = ckpt.model;
  if (m.u.cols() != m.v.cols()) throw UsageError("save_checkpoint: factor dimensions differ");
  Writer w(path);
  w.bytes(kModelMagic.data(), kModelMagic.size());
  w.put(kCheckpointVersion);
  w.put(std::uint64_t(m.u.rows()));
  w.put(std::uint64_t(m.v.rows()));
  w.put(std::uint64_t(m.u.cols()));
  w.matrix(m.u);
  w.matrix(m.v);
  if (m.theta.size() != 0 && m.theta.size() != m.u.rows())
    throw UsageError("save_checkpoint: Theta size does not match U");
  write_sparse(w, m.theta);
  w.put(m.global_mean);
  if (m.user_known.size() != std::size_t(m.u.rows()) || m.item_known.size() != std::size_t(m.v.rows()))
    throw UsageError("save_checkpoint: known-user/item flags missing");
  for (auto b : m.user_known) w.put(std::uint8_t(b));
  for (auto b : m.item_known) w.put(std::uint8_t(b));
  write_index_map(w, ckpt.ids.users);
  write_index_map(w, ckpt.ids.items);
  const auto& p = ckpt.params;
  w.put(std::int64_t(p.d));
  for (double x : {p.lambda_u, p.lambda_v, p.alpha, p.beta, p.gamma, p.learning_rate, p.rho}) w.put(x);
  for (int x : {p.epochs, p.admm_iters, p.max_iter}) w.put(std::int64_t(x));
  w.put(p.seed);
  for (double x : {p.range.min, p.range.max, p.decay}) w.put(x);
  w.put(std::uint8_t(p.shuffle));
  w.put(ckpt.fingerprint);
  w.put(std::int64_t(ckpt.best_iteration));
  w.finish();
}

ModelCheckpoint load_checkpoint(const std::string& path) {
  Reader r(path);
  check_magic(r, kModelMagic);
  const auto version = r.get<std::uint32_t>();
  if (version != kCheckpointVersion)
    r.fail("checkpoint format version " + std::to_string(version) + " is not supported (expected " +
           std::to_string(kCheckpointVersion) + ")");
  ModelCheckpoint ckpt;
  auto& m = ckpt.model;
  const auto users = r.count(kMaxCount);
  const auto items = r.count(kMaxCount);
  const auto d = r.count(1 << 20);
  m.u = r.matrix(Index(users), Index(d));
  m.v = r.matrix(Index(items), Index(d));
  m.theta = read_sparse(r, int(users));
  m.global_mean = r.get<double>();
  m.user_known.resize(users);
  m.item_known.resize(items);
  for (auto& b : m.user_known) b = r.get<std::uint8_t>();
  for (auto& b : m.item_known) b = r.get<std::uint8_t>();
  ckpt.ids.users = read_index_map(r);
  ckpt.ids.items = read_index_map(r);
  auto& p = ckpt.params;
  p.d = int(r.get<std::int64_t>());
  for (double* x : {&p.lambda_u, &p.lambda_v, &p.alpha, &p.beta, &p.gamma, &p.learning_rate, &p.rho}) *x = r.get<double>();
  for (int* x : {&p.epochs, &p.admm_iters, &p.max_iter}) *x = int(r.get<std::int64_t>());
  p.seed = r.get<std::uint64_t>();
  for (double* x : {&p.range.min, &p.range.max, &p.decay}) *x = r.get<double>();
  p.shuffle = r.get<std::uint8_t>() != 0;
  ckpt.fingerprint = r.get<std::uint64_t>();
  ckpt.best_iteration = int(r.get<std::int64_t>());
  r.expect_end();
  return ckpt;
}

void save_prior_cache(const PriorModel& prior, std::uint64_t key, const std::string& path) {
  Writer w(path);
  w.bytes(kPriorMagic.data(), kPriorMagic.size());
  w.put(kPriorVersion);
  w.put(key);
  w.put(std::uint64_t(prior.sigma.size()));
  write_sparse(w, prior.sigma);
  w.put(std::uint64_t(prior.x.cols()));
  if (prior.x.rows() != prior.sigma.size()) throw UsageError("save_prior_cache: X rows do not match Sigma");
  w.matrix(prior.x);
  w.finish();
}

PriorModel load_prior_cache(const std::string& path, std::uint64_t expected_key) {
  Reader r(path);
  check_magic(r, kPriorMagic);
  if (r.get<std::uint32_t>() != kPriorVersion) r.fail("prior cache version is not supported");
  if (r.get<std::uint64_t>() != expected_key) r.fail("prior cache key does not match the configuration");
  PriorModel prior;
  const auto m = r.count(kMaxCount);
  prior.sigma = read_sparse(r, int(m));
  const auto d = r.count(1 << 20);
  prior.x = r.matrix(Index(m), Index(d));
  r.expect_end();
  return prior;
}

}  // namespace prmf
