#ifndef PERRONLAB_COMMON_HPP
#define PERRONLAB_COMMON_HPP

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace perronlab {

using Vec = Eigen::VectorXd;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Error hierarchy; the CLI maps these onto exit codes.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
  using Error::Error;
};

struct InfeasibleError : Error {
  using Error::Error;
};

struct SolverError : Error {
  SolverError(const std::string& msg, Vec best, std::vector<double> history)
      : Error(msg), best_iterate(std::move(best)), residual_history(std::move(history)) {}
  Vec best_iterate;
  std::vector<double> residual_history;
};

// Raised when no small-norm test-function sequence exists at the current
// resolution; carries the observed capacity values so callers can report
// the positive-capacity signature.
struct PsiConstructionError : Error {
  PsiConstructionError(const std::string& msg, std::vector<double> values, int max_depth)
      : Error(msg), observed_values(std::move(values)), achievable_depth(max_depth) {}
  std::vector<double> observed_values;
  int achievable_depth = 0;
};

// SplitMix64; used to derive independent per-sample seeds from a master
// seed so Monte Carlo estimates do not depend on execution order.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter) {
  return splitmix64(master ^ splitmix64(counter + 1));
}

// Parallelism cap shared by the batch front-ends (PERRON_LAB_THREADS).
int thread_cap();

}  // namespace perronlab

#endif
