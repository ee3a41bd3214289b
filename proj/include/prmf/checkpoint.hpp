#pragma once

#include "prmf/evaluation.hpp"
#include "prmf/ingest.hpp"

#include <cstdint>
#include <string>

namespace prmf {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Binary layout, all integers and floats little-endian:
//   "PRMFCKPT" u32 version
//   u64 m, n, d
//   f64[m*d] U (row-major), f64[n*d] V
//   u64 nnz, nnz x (u32 row, u32 col, f64 value)   Theta, row <= col
//   f64 global_mean, u8[m] user_known, u8[n] item_known
//   IdMap: users then items, each u64 count + count x (u32 len, bytes)
//   HyperParams: i64 d, f64 lambda_u lambda_v alpha beta gamma learning_rate rho,
//                i64 epochs admm_iters max_iter, u64 seed, f64 rating_min rating_max decay, u8 shuffle
//   u64 fingerprint, i64 best_iteration
struct ModelCheckpoint {
  Model model;
  IdMap ids;
  HyperParams params;
  std::uint64_t fingerprint = 0;
  int best_iteration = 0;  // outer iteration the model was taken from
};

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path);
// Throws ParseError on a bad magic, version mismatch, or truncated file.
ModelCheckpoint load_checkpoint(const std::string& path);

// Cached prior: "PRMFPRIO" u32 version, u64 key, u64 m, u64 nnz + Sigma
// triples, u64 d + f64[m*d] X.
void save_prior_cache(const PriorModel& prior, std::uint64_t key, const std::string& path);
PriorModel load_prior_cache(const std::string& path, std::uint64_t expected_key);

}  // namespace prmf
