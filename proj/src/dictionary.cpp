#include "sparse/dictionary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "sparse/error.hpp"
#include "sparse/greedy.hpp"
#include "sparse/parallel.hpp"
#include "sparse/rng.hpp"

namespace sparse {

namespace {

// D * X skipping zero code entries
Matrix sparse_product(const Matrix& d, const Matrix& codes) {
  Matrix out = Matrix::Zero(d.rows(), codes.cols());
  for (Index i = 0; i < codes.cols(); ++i)
    for (Index a = 0; a < codes.rows(); ++a)
      if (codes(a, i) != 0.0) out.col(i).noalias() += codes(a, i) * d.col(a);
  return out;
}

// rows of codes scaled by s, columns of d divided by s
void rescale_atoms(Matrix& d, Matrix& codes, const Vector& s) {
  for (Index a = 0; a < d.cols(); ++a) {
    if (s[a] == 0.0) continue;
    d.col(a) /= s[a];
    codes.row(a) *= s[a];
  }
}

// least-squares map from codes to targets, T X^T (X X^T + eps I)^{-1}
Matrix fit_linear_map(const Matrix& target, const Matrix& codes) {
  Matrix g = codes * codes.transpose();
  g.diagonal().array() += 1e-10;
  const Matrix rhs = codes * target.transpose();
  return g.ldlt().solve(rhs).transpose();
}

// solve (C + mu diag(b)^2 + reg I) x = 1 with one 10x retry on mu, then sum-normalize
Vector llc_solve(const Matrix& z, const Vector& b, double mu, double reg) {
  const Index m = z.cols();
  const Matrix c = z.transpose() * z;
  for (int attempt = 0; attempt < 2; ++attempt) {
    Matrix a = c;
    a.diagonal() += mu * b.cwiseAbs2();
    a.diagonal().array() += reg;
    Eigen::LDLT<Matrix> ldlt(a);
    bool ok = ldlt.info() == Eigen::Success && ldlt.isPositive();
    if (ok) {
      const Vector dg = ldlt.vectorD().cwiseAbs();
      ok = dg.minCoeff() > 1e-14 * std::max(dg.maxCoeff(), 1e-300);
    }
    if (ok) {
      const Vector xh = ldlt.solve(Vector::Ones(m));
      const double s = xh.sum();
      if (xh.allFinite() && s != 0.0) return xh / s;
    }
    mu *= 10.0;
  }
  throw SingularSystem("llc: regularized covariance is singular");
}

}  // namespace

TrainingSet::TrainingSet(Matrix y, std::vector<int> l) : samples(std::move(y)), labels(std::move(l)) {
  if (Index(labels.size()) != samples.cols()) throw InvalidArgument("training set: label count mismatch");
  for (int v : labels) {
    if (v < 0) throw InvalidArgument("training set: negative label");
    num_classes = std::max(num_classes, v + 1);
  }
}

Matrix TrainingSet::label_matrix() const {
  if (!labeled()) throw InvalidArgument("training set has no labels");
  Matrix h = Matrix::Zero(num_classes, samples.cols());
  for (Index i = 0; i < samples.cols(); ++i) h(labels[i], i) = 1.0;
  return h;
}

Matrix TrainingSet::joint_label_matrix(const std::vector<int>& atom_class) const {
  if (!labeled()) throw InvalidArgument("training set has no labels");
  Matrix l = Matrix::Zero(Index(atom_class.size()), samples.cols());
  for (Index a = 0; a < l.rows(); ++a)
    for (Index i = 0; i < l.cols(); ++i)
      if (atom_class[a] == labels[i]) l(a, i) = 1.0;
  return l;
}

void leading_triplet(const Matrix& e, Vector& u, double& s, Vector& v) {
  if (e.rows() <= e.cols()) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(e * e.transpose());
    u = es.eigenvectors().col(e.rows() - 1);
    s = std::sqrt(std::max(es.eigenvalues()[e.rows() - 1], 0.0));
    v = s > 0.0 ? Vector(e.transpose() * u / s) : Vector::Zero(e.cols());
  } else {
    Eigen::SelfAdjointEigenSolver<Matrix> es(e.transpose() * e);
    v = es.eigenvectors().col(e.cols() - 1);
    s = std::sqrt(std::max(es.eigenvalues()[e.cols() - 1], 0.0));
    if (s > 0.0) {
      u = e * v / s;
      u.normalize();
    } else {
      u = Vector::Zero(e.rows());
      u[0] = 1.0;
    }
  }
}

void ksvd_update_atoms(const Matrix& y, Matrix& d, Matrix& codes, Matrix& residual) {
  const Index m = d.cols();
  std::vector<char> taken(y.cols(), 0);
  std::vector<Index> omega;
  Vector u, v;
  for (Index l = 0; l < m; ++l) {
    omega.clear();
    for (Index i = 0; i < codes.cols(); ++i)
      if (codes(l, i) != 0.0) omega.push_back(i);
    if (omega.empty()) {
      // dead atom: take the worst-represented sample, its code row stays zero
      Index worst = -1;
      double wv = 0.0;
      for (Index i = 0; i < y.cols(); ++i) {
        if (taken[i]) continue;
        const double r = residual.col(i).squaredNorm();
        if (r > wv) {
          wv = r;
          worst = i;
        }
      }
      if (worst >= 0 && y.col(worst).norm() > 0.0) {
        d.col(l) = y.col(worst).normalized();
        taken[worst] = 1;
      }
      continue;
    }
    const Index k = Index(omega.size());
    Matrix e(y.rows(), k);
    for (Index j = 0; j < k; ++j) e.col(j) = residual.col(omega[j]) + codes(l, omega[j]) * d.col(l);
    double s = 0.0;
    leading_triplet(e, u, s, v);
    d.col(l) = u;
    for (Index j = 0; j < k; ++j) {
      codes(l, omega[j]) = s * v[j];
      residual.col(omega[j]) = e.col(j) - (s * v[j]) * u;
    }
  }
}

Matrix init_from_samples(const Matrix& y, Index num_atoms, std::uint64_t seed) {
  std::vector<Index> idx(y.cols());
  for (Index i = 0; i < y.cols(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  Matrix d(y.rows(), num_atoms);
  Index got = 0;
  for (Index i : idx) {
    if (got == num_atoms) break;
    const double n = y.col(i).norm();
    if (n == 0.0) continue;
    d.col(got++) = y.col(i) / n;
  }
  if (got < num_atoms) throw InvalidArgument("ksvd: fewer nonzero training columns than atoms");
  return d;
}

LearnedDictionary ksvd_run(const Matrix& y, Matrix d, const KsvdOptions& opt) {
  const Index m = d.cols();
  const bool fixed_k = opt.error_bound <= 0.0;
  const Index max_atoms = fixed_k ? std::min(opt.sparsity, m) : std::min(y.rows(), m);
  Matrix codes = Matrix::Zero(m, y.cols());
  Matrix residual = y;
  LearnedDictionary out;
  for (std::size_t sweep = 0; sweep < opt.sweeps; ++sweep) {
    Matrix fresh = opt.parallel ? batch_omp(d, y, max_atoms, 0.0, opt.error_bound, &out.flags)
                                : batch_omp_serial(d, y, max_atoms, 0.0, opt.error_bound, &out.flags);
    const Matrix fresh_res = y - sparse_product(d, fresh);
    if (fixed_k && sweep > 0) {
      // keep a column's previous code when the greedy code is worse
      for (Index i = 0; i < y.cols(); ++i) {
        if (fresh_res.col(i).squaredNorm() <= residual.col(i).squaredNorm()) {
          codes.col(i) = fresh.col(i);
          residual.col(i) = fresh_res.col(i);
        }
      }
    } else {
      codes = std::move(fresh);
      residual = fresh_res;
    }
    ksvd_update_atoms(y, d, codes, residual);
    out.objective_trace.push_back(residual.norm());
  }
  out.dict = Dictionary(std::move(d), false);
  out.codes = std::move(codes);
  return out;
}

LearnedDictionary ksvd_train(const TrainingSet& data, Index num_atoms, Index sparsity_k,
                             std::size_t sweeps, const SolverConfig& config) {
  const Matrix& y = data.samples;
  if (num_atoms < 1 || num_atoms > y.cols()) throw InvalidArgument("ksvd_train: num_atoms must lie in [1, N]");
  if (sparsity_k < 1) throw InvalidArgument("ksvd_train: sparsity must be >= 1");
  KsvdOptions opt;
  opt.num_atoms = num_atoms;
  opt.sparsity = sparsity_k;
  opt.sweeps = sweeps;
  opt.parallel = config.param("parallel", 1.0) != 0.0;
  LearnedDictionary out = ksvd_run(y, init_from_samples(y, num_atoms, config.seed), opt);
  out.dict = normalize_columns(out.dict.atoms());
  return out;
}

ModResult mod_update(const TrainingSet& data, const Matrix& codes) {
  const Matrix& y = data.samples;
  if (codes.cols() != y.cols()) throw InvalidArgument("mod_update: code count mismatch");
  ModResult r;
  Matrix g = codes * codes.transpose();
  const Matrix rhs = codes * y.transpose();
  Eigen::LLT<Matrix> llt(g);
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    const Vector dg = Matrix(llt.matrixL()).diagonal();
    ok = dg.minCoeff() > 1e-7 * dg.maxCoeff();
  }
  Matrix d;
  if (ok) {
    d = llt.solve(rhs).transpose();
  } else {
    r.ridge = true;
    g.diagonal().array() += 1e-10;
    d = g.ldlt().solve(rhs).transpose();
  }
  r.codes = codes;
  rescale_atoms(d, r.codes, d.colwise().norm().transpose());
  r.dict = Dictionary(std::move(d), false);
  return r;
}

double llc_default_sigma(const Vector& y, const Dictionary& dict) {
  return (dict.atoms().colwise() - y).colwise().norm().mean();
}

Vector llc_encode(const Vector& y, const Dictionary& dict, double mu, double sigma) {
  const Matrix& d = dict.atoms();
  if (d.cols() == 0) throw InvalidArgument("llc_encode: empty dictionary");
  if (y.size() != d.rows()) throw InvalidArgument("llc_encode: dimension mismatch");
  if (!(mu > 0.0 && sigma > 0.0)) throw InvalidArgument("llc_encode: mu and sigma must be positive");
  if (d.cols() == 1) return Vector::Ones(1);
  const Matrix z = d.colwise() - y;
  const Vector dist = z.colwise().norm().transpose();
  const Vector b = (dist / sigma).array().min(700.0).exp().matrix();
  return llc_solve(z, b, mu, 0.0);
}

double llc_reconstruction_error(const Matrix& samples, const Matrix& codebook, double mu, double sigma) {
  double err = 0.0;
  const Dictionary dict(codebook);
  for (Index i = 0; i < samples.cols(); ++i) {
    const Vector c = llc_encode(samples.col(i), dict, mu, sigma);
    err += (samples.col(i) - codebook * c).squaredNorm();
  }
  return err;
}

LlcCodebookResult llc_codebook_optimize(const TrainingSet& data, const Dictionary& initial, double mu,
                                        const SolverConfig& config) {
  const Matrix& x = data.samples;
  Matrix b = initial.atoms();
  if (x.rows() != b.rows()) throw InvalidArgument("llc_codebook_optimize: dimension mismatch");
  if (!(mu > 0.0)) throw InvalidArgument("llc_codebook_optimize: mu must be positive");
  const double lr0 = config.param("learning_rate", 1e-2);
  const double decay = config.param("decay", 0.95);
  const auto passes = std::size_t(config.param("passes", 1));
  double sigma = config.param("sigma", 0.0);
  if (sigma <= 0.0) {
    double acc = 0.0;
    for (Index i = 0; i < x.cols(); ++i) acc += (b.colwise() - x.col(i)).colwise().norm().sum();
    sigma = acc / double(x.cols() * b.cols());
    if (sigma <= 0.0) sigma = 1.0;
  }

  LlcCodebookResult out;
  out.objective_trace.push_back(llc_reconstruction_error(x, b, mu, sigma));
  double lr = lr0;
  for (std::size_t pass = 0; pass < passes; ++pass) {
    for (Index i = 0; i < x.cols(); ++i) {
      const Vector xi = x.col(i);
      const Matrix z = b.colwise() - xi;
      const Vector dist = z.colwise().norm().transpose();
      Vector w = (dist / sigma).array().min(700.0).exp().matrix();
      const double wmin = w.minCoeff(), wmax = w.maxCoeff();
      w = wmax > wmin ? Vector((w.array() - wmin) / (wmax - wmin)) : Vector::Zero(w.size());
      const double reg = 1e-10 * std::max(z.squaredNorm(), 1e-300);
      const Vector c = llc_solve(z, w, mu, reg);

      std::vector<Index> id;
      for (Index j = 0; j < c.size(); ++j)
        if (std::abs(c[j]) > 0.01) id.push_back(j);
      if (id.empty()) {
        ++out.skipped;
        continue;
      }
      Matrix bi(b.rows(), Index(id.size()));
      for (Index j = 0; j < bi.cols(); ++j) bi.col(j) = b.col(id[j]);
      const Matrix zi = bi.colwise() - xi;
      const Vector ct = llc_solve(zi, Vector::Zero(bi.cols()), 0.0, 1e-10 * std::max(zi.squaredNorm(), 1e-300));
      const Vector r = xi - bi * ct;
      const Matrix grad = -2.0 * r * ct.transpose();
      bi -= (lr / ct.norm()) * grad;
      for (Index j = 0; j < bi.cols(); ++j) {
        const double n = bi.col(j).norm();
        if (n > 1.0) bi.col(j) /= n;
        b.col(id[j]) = bi.col(j);
      }
    }
    lr *= decay;
    out.objective_trace.push_back(llc_reconstruction_error(x, b, mu, sigma));
  }
  for (Index j = 0; j < b.cols(); ++j) {
    const double n = b.col(j).norm();
    if (n > 1.0) b.col(j) /= n;
  }
  out.dict = Dictionary(std::move(b), false);
  return out;
}

Matrix kmeans_codebook(const Matrix& samples, Index k, std::uint64_t seed, std::size_t iterations) {
  if (k < 1 || k > samples.cols()) throw InvalidArgument("kmeans: k must lie in [1, N]");
  std::vector<Index> idx(samples.cols());
  for (Index i = 0; i < samples.cols(); ++i) idx[i] = i;
  Rng rng(seed);
  rng.shuffle(idx);
  Matrix c(samples.rows(), k);
  for (Index j = 0; j < k; ++j) c.col(j) = samples.col(idx[j]);
  std::vector<Index> assign(samples.cols(), 0);
  for (std::size_t it = 0; it < iterations; ++it) {
    for (Index i = 0; i < samples.cols(); ++i) {
      Index best = 0;
      (c.colwise() - samples.col(i)).colwise().squaredNorm().minCoeff(&best);
      assign[i] = best;
    }
    Matrix sum = Matrix::Zero(samples.rows(), k);
    Vector cnt = Vector::Zero(k);
    for (Index i = 0; i < samples.cols(); ++i) {
      sum.col(assign[i]) += samples.col(i);
      cnt[assign[i]] += 1.0;
    }
    for (Index j = 0; j < k; ++j)
      if (cnt[j] > 0) c.col(j) = sum.col(j) / cnt[j];
  }
  return c;
}

std::vector<int> assign_atoms_to_classes(const TrainingSet& data, Index num_atoms) {
  if (!data.labeled()) throw InvalidArgument("atom assignment needs labels");
  const int c = data.num_classes;
  std::vector<double> freq(c, 0.0);
  for (int l : data.labels) freq[l] += 1.0;
  const double n = double(data.labels.size());
  // largest-remainder apportionment
  std::vector<Index> count(c, 0);
  std::vector<std::pair<double, int>> rem;
  Index used = 0;
  for (int k = 0; k < c; ++k) {
    const double share = freq[k] / n * double(num_atoms);
    count[k] = Index(std::floor(share));
    used += count[k];
    rem.emplace_back(share - std::floor(share), k);
  }
  std::stable_sort(rem.begin(), rem.end(), [](auto& a, auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; used < num_atoms; ++r, ++used) ++count[rem[r % rem.size()].second];
  std::vector<int> out;
  for (int k = 0; k < c; ++k)
    for (Index j = 0; j < count[k]; ++j) out.push_back(k);
  return out;
}

namespace {

struct Block {
  Matrix rows;
  double weight;
};

// stacked K-SVD; returns dictionary part normalized and each extra block divided
// by its weight and the atom norms. Zero-weight blocks are refit by least squares.
LearnedDictionary stacked_ksvd(const TrainingSet& data, Index num_atoms, Index k,
                               std::vector<Block> blocks, const SolverConfig& config,
                               std::vector<Matrix>& recovered) {
  const Matrix& y = data.samples;
  if (num_atoms < 1 || num_atoms > y.cols()) throw InvalidArgument("ksvd: num_atoms must lie in [1, N]");
  // zero-weight blocks are left out of the stack so the reduction to plain K-SVD is exact
  Index rows = y.rows();
  for (auto& b : blocks)
    if (b.weight > 0.0) rows += b.rows.rows();
  Matrix w(rows, y.cols());
  w.topRows(y.rows()) = y;
  Index at = y.rows();
  for (auto& b : blocks) {
    if (b.weight <= 0.0) continue;
    w.middleRows(at, b.rows.rows()) = std::sqrt(b.weight) * b.rows;
    at += b.rows.rows();
  }
  KsvdOptions opt;
  opt.num_atoms = num_atoms;
  opt.sparsity = k;
  opt.sweeps = std::size_t(config.param("sweeps", 20));
  opt.parallel = config.param("parallel", 1.0) != 0.0;
  LearnedDictionary res = ksvd_run(w, init_from_samples(w, num_atoms, config.seed), opt);
  const Matrix& z = res.dict.atoms();
  Matrix d = z.topRows(y.rows());
  const Vector norms = d.colwise().norm().transpose();
  rescale_atoms(d, res.codes, norms);
  at = y.rows();
  recovered.clear();
  for (auto& b : blocks) {
    Matrix part;
    if (b.weight > 0.0) {
      part = z.middleRows(at, b.rows.rows()) / std::sqrt(b.weight);
      at += b.rows.rows();
      for (Index a = 0; a < part.cols(); ++a)
        if (norms[a] > 0.0) part.col(a) /= norms[a];
    } else {
      part = fit_linear_map(b.rows, res.codes);
    }
    recovered.push_back(std::move(part));
  }
  if ((norms.array() == 0.0).any()) res.flags |= kRidgeFallback;
  LearnedDictionary out;
  out.dict = Dictionary(std::move(d), false);
  out.codes = std::move(res.codes);
  out.objective_trace = std::move(res.objective_trace);
  out.flags = res.flags;
  return out;
}

}  // namespace

LearnedDictionary dksvd_train(const TrainingSet& data, Index num_atoms, Index sparsity_k, double mu,
                              const SolverConfig& config) {
  if (!data.labeled()) throw InvalidArgument("dksvd_train: labels required");
  if (mu < 0.0) throw InvalidArgument("dksvd_train: mu must be nonnegative");
  std::vector<Matrix> parts;
  LearnedDictionary out = stacked_ksvd(data, num_atoms, sparsity_k, {{data.label_matrix(), mu}}, config, parts);
  out.classifier = std::move(parts[0]);
  return out;
}

LearnedDictionary lcksvd_train(const TrainingSet& data, Index num_atoms, Index sparsity_k, double mu,
                               double eta, const SolverConfig& config) {
  if (!data.labeled()) throw InvalidArgument("lcksvd_train: labels required");
  if (mu < 0.0 || eta < 0.0) throw InvalidArgument("lcksvd_train: weights must be nonnegative");
  const Matrix l = data.joint_label_matrix(assign_atoms_to_classes(data, num_atoms));
  std::vector<Matrix> parts;
  LearnedDictionary out =
      stacked_ksvd(data, num_atoms, sparsity_k, {{l, mu}, {data.label_matrix(), eta}}, config, parts);
  out.transform = std::move(parts[0]);
  out.classifier = std::move(parts[1]);
  return out;
}

int supervised_classify(const LearnedDictionary& model, const Vector& y, Index sparsity_k) {
  if (!model.classifier) throw InvalidArgument("supervised_classify: model has no classifier");
  const Vector x = omp_code(model.dict.atoms(), y, sparsity_k, 0.0);
  const Vector score = *model.classifier * x;
  Index best = 0;
  for (Index i = 1; i < score.size(); ++i)
    if (score[i] > score[best]) best = i;
  return int(best);
}

namespace {

static_assert(std::endian::native == std::endian::little, "model files are little-endian");

void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }

std::uint64_t get_u64(std::istream& in) {
  std::uint64_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 8)) throw DataError("model: truncated header");
  return v;
}

void put_rows(std::ostream& out, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c) {
      const double v = m(r, c);
      out.write(reinterpret_cast<const char*>(&v), 8);
    }
}

Matrix get_rows(std::istream& in, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      double v;
      if (!in.read(reinterpret_cast<char*>(&v), 8)) throw DataError("model: truncated payload");
      m(r, c) = v;
    }
  return m;
}

constexpr char kMagic[5] = {'S', 'P', 'K', 'D', '1'};

}  // namespace

void save_model(std::ostream& out, const LearnedDictionary& model) {
  const Matrix& d = model.dict.atoms();
  out.write(kMagic, 5);
  put_u64(out, std::uint64_t(d.rows()));
  put_u64(out, std::uint64_t(d.cols()));
  const unsigned char flags = (model.classifier ? 1 : 0) | (model.transform ? 2 : 0);
  out.put(char(flags));
  if (model.classifier) put_u64(out, std::uint64_t(model.classifier->rows()));
  if (model.transform) put_u64(out, std::uint64_t(model.transform->rows()));
  put_rows(out, d);
  if (model.classifier) put_rows(out, *model.classifier);
  if (model.transform) put_rows(out, *model.transform);
  if (!out) throw DataError("model: write failed");
}

LearnedDictionary load_model(std::istream& in) {
  char magic[5];
  if (!in.read(magic, 5) || std::memcmp(magic, kMagic, 5) != 0) throw DataError("model: bad magic");
  const auto d = Index(get_u64(in));
  const auto m = Index(get_u64(in));
  const int flags = in.get();
  if (flags < 0 || flags > 3) throw DataError("model: bad flags");
  Index crows = 0, arows = 0;
  if (flags & 1) crows = Index(get_u64(in));
  if (flags & 2) arows = Index(get_u64(in));
  if (d < 1 || m < 1) throw DataError("model: empty dictionary");
  LearnedDictionary out;
  out.dict = Dictionary(get_rows(in, d, m), false);
  if (flags & 1) out.classifier = get_rows(in, crows, m);
  if (flags & 2) out.transform = get_rows(in, arows, m);
  return out;
}

void write_objective_csv(std::ostream& out, const std::vector<double>& trace) {
  out << "sweep,objective\n";
  const auto old = out.precision(17);
  for (std::size_t i = 0; i < trace.size(); ++i) out << i + 1 << ',' << trace[i] << '\n';
  out.precision(old);
}

}  // namespace sparse
