// Solved-instance datasets: sampling + oracle solving, and the .padd binary
// format with a one-line JSON sidecar describing provenance.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <string>

#include "pad/problems.hpp"

namespace pad {

struct Dataset {
  ProblemId id = ProblemId::P1;
  int M = 0;
  Eigen::MatrixXd X;   // n x x_len
  Eigen::MatrixXd Y;   // n x y_len, oracle solutions
  Eigen::VectorXd f;   // n, oracle objective values
  std::uint64_t seed = 0;
  int n() const { return static_cast<int>(X.rows()); }
};

// Sample n feasible instances and solve each with the oracle.  Row i depends
// only on (seed, i), so results are identical for any worker count.
Dataset generate_dataset(ProblemId id, int M, int n, std::uint64_t seed, int workers = 1);

// "P3_M5_train.padd"
std::filesystem::path dataset_filename(ProblemId id, int M, const std::string& split);

// Writes <path> and the sidecar <path>.jsonl, both atomically.
void write_dataset(const Dataset& ds, const std::filesystem::path& path);

// Reads <path>; picks up the generation seed from the sidecar when present.
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace pad
