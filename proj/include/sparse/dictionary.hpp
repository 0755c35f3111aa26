#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "sparse/problem.hpp"

namespace sparse {

struct TrainingSet {
  Matrix samples;           // d x N
  std::vector<int> labels;  // empty when unlabeled
  int num_classes = 0;

  TrainingSet() = default;
  explicit TrainingSet(Matrix y) : samples(std::move(y)) {}
  TrainingSet(Matrix y, std::vector<int> l);

  bool labeled() const { return !labels.empty(); }
  // c x N one-hot class indicator H
  Matrix label_matrix() const;
  // M x N joint label matrix L: L(a, i) = 1 when atom a is assigned the class of sample i
  Matrix joint_label_matrix(const std::vector<int>& atom_class) const;
};

struct LearnedDictionary {
  Dictionary dict;
  std::optional<Matrix> classifier;  // C, c x M
  std::optional<Matrix> transform;   // A, M x M
  std::vector<double> objective_trace;
  Matrix codes;  // M x N codes of the training data
  unsigned flags = 0;
};

struct KsvdOptions {
  Index num_atoms = 0;
  Index sparsity = 1;
  std::size_t sweeps = 10;
  // per-column stop ||r|| <= eps instead of k atoms when > 0 (denoising)
  double error_bound = 0.0;
  bool parallel = true;
};

// one atom-update pass; residual is Y - D X and is kept in sync
void ksvd_update_atoms(const Matrix& y, Matrix& d, Matrix& codes, Matrix& residual);

// leading singular triplet of e (e ~ s u v^T)
void leading_triplet(const Matrix& e, Vector& u, double& s, Vector& v);

// seeded shuffle of nonzero training columns, normalized
Matrix init_from_samples(const Matrix& y, Index num_atoms, std::uint64_t seed);

LearnedDictionary ksvd_train(const TrainingSet& data, Index num_atoms, Index sparsity_k,
                             std::size_t sweeps, const SolverConfig& config = {});
// generic entry used by the denoiser and the supervised wrappers
LearnedDictionary ksvd_run(const Matrix& y, Matrix initial, const KsvdOptions& opt);

struct ModResult {
  Dictionary dict;
  Matrix codes;  // rescaled to compensate for normalization
  bool ridge = false;
};
ModResult mod_update(const TrainingSet& data, const Matrix& codes);

// mean Euclidean distance between y and the atoms
double llc_default_sigma(const Vector& y, const Dictionary& dict);
Vector llc_encode(const Vector& y, const Dictionary& dict, double mu, double sigma);

struct LlcCodebookResult {
  Dictionary dict;
  std::size_t skipped = 0;
  std::vector<double> objective_trace;  // reconstruction error before and after each pass
};
// step_overrides: learning_rate (1e-2), decay (0.95), passes (1), sigma (mean distance)
LlcCodebookResult llc_codebook_optimize(const TrainingSet& data, const Dictionary& initial,
                                        double mu, const SolverConfig& config = {});
double llc_reconstruction_error(const Matrix& samples, const Matrix& codebook, double mu,
                                double sigma);
Matrix kmeans_codebook(const Matrix& samples, Index k, std::uint64_t seed, std::size_t iterations = 20);

// atoms split across classes proportionally to class frequency, contiguous blocks
std::vector<int> assign_atoms_to_classes(const TrainingSet& data, Index num_atoms);

// step_overrides: sweeps (default 20)
LearnedDictionary dksvd_train(const TrainingSet& data, Index num_atoms, Index sparsity_k, double mu,
                              const SolverConfig& config = {});
LearnedDictionary lcksvd_train(const TrainingSet& data, Index num_atoms, Index sparsity_k, double mu,
                               double eta, const SolverConfig& config = {});

int supervised_classify(const LearnedDictionary& model, const Vector& y, Index sparsity_k);

void save_model(std::ostream& out, const LearnedDictionary& model);
LearnedDictionary load_model(std::istream& in);
void write_objective_csv(std::ostream& out, const std::vector<double>& trace);

}  // namespace sparse
