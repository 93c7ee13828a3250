#pragma once

// Fixtures and independent oracles shared by the unit and acceptance tests.
// Oracles deliberately avoid the library's own algorithms.

#include "xplain/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

namespace xtest {

using xplain::Matrix;
using xplain::Vector;

inline std::filesystem::path source_dir() { return XPLAIN_SOURCE_DIR; }
inline std::filesystem::path data_dir() { return source_dir() / "data"; }

inline std::vector<std::filesystem::path> bundled_configs() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(data_dir())) {
    if (entry.path().extension() == ".json") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("xplain-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto file = path_ / name;
    std::ofstream(file, std::ios::binary) << text;
    return file;
  }

 private:
  std::filesystem::path path_;
};

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                            double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, Eigen::Index n, double scale = 1.0) {
  return random_matrix(rng, n, 1, scale).col(0);
}

// All-numeric dataset wrapping the given matrices.
inline xplain::Dataset numeric_dataset(Matrix X_train, std::vector<int> y_train, Matrix X_test,
                                       std::vector<int> y_test) {
  xplain::Dataset d;
  d.name = "synthetic";
  const auto n = static_cast<std::size_t>(X_train.cols());
  for (std::size_t j = 0; j < n; ++j) {
    d.columns.push_back({"f" + std::to_string(j), xplain::ColumnKind::numeric, {}});
    d.feature_names.push_back("f" + std::to_string(j));
    d.groups.push_back({j, j, 1, false});
  }
  d.X_train = std::move(X_train);
  d.X_test = std::move(X_test);
  d.y_train = std::move(y_train);
  d.y_test = std::move(y_test);
  return d;
}

// Labels drawn from a logistic model with the given weights.
inline std::vector<int> logistic_labels(std::mt19937_64& rng, const Matrix& X, const Vector& w,
                                        double w0) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<int> y(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(w0 + X.row(i).dot(w))));
    y[static_cast<std::size_t>(i)] = unit(rng) < p ? 1 : 0;
  }
  return y;
}

inline xplain::ModelHandle lr_handle(Vector w, double w0) {
  xplain::LogisticModel m;
  m.weights = std::move(w);
  m.intercept = w0;
  m.converged = true;
  return xplain::ModelHandle(m);
}

inline xplain::ModelHandle random_gnb(std::mt19937_64& rng, Eigen::Index n) {
  std::uniform_real_distribution<double> var(0.2, 3.0);
  std::uniform_real_distribution<double> prior(0.1, 0.9);
  xplain::GaussianNBModel m;
  for (int c = 0; c < 2; ++c) {
    m.means[c] = random_vector(rng, n);
    m.variances[c].resize(n);
    for (Eigen::Index j = 0; j < n; ++j) m.variances[c][j] = var(rng);
  }
  m.priors[1] = prior(rng);
  m.priors[0] = 1.0 - m.priors[1];
  return xplain::ModelHandle(m);
}

// ---- Shapley oracle: average marginal contribution over all orderings. ----

// v(S) = mean over background rows b of f(x on S, b elsewhere).
inline double coalition_value(const std::function<double(const Vector&)>& f, const Vector& x,
                              const Matrix& background, const std::vector<bool>& in) {
  double total = 0.0;
  for (Eigen::Index r = 0; r < background.rows(); ++r) {
    Vector z = background.row(r).transpose();
    for (std::size_t j = 0; j < in.size(); ++j) {
      if (in[j]) z[static_cast<Eigen::Index>(j)] = x[static_cast<Eigen::Index>(j)];
    }
    total += f(z);
  }
  return total / static_cast<double>(background.rows());
}

inline Vector permutation_shapley(const std::function<double(const Vector&)>& f, const Vector& x,
                                  const Matrix& background) {
  const auto n = static_cast<std::size_t>(x.size());
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Vector phi = Vector::Zero(x.size());
  double permutations = 0.0;
  do {
    std::vector<bool> in(n, false);
    double before = coalition_value(f, x, background, in);
    for (std::size_t j : order) {
      in[j] = true;
      const double after = coalition_value(f, x, background, in);
      phi[static_cast<Eigen::Index>(j)] += after - before;
      before = after;
    }
    permutations += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  return phi / permutations;
}

// ---- Spearman oracle: rank by counting, textbook Pearson. ----

inline std::vector<double> counting_ranks(const std::vector<double>& v) {
  std::vector<double> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double less = 0.0;
    double equal = 0.0;
    for (double other : v) {
      less += other < v[i];
      equal += other == v[i];
    }
    r[i] = less + (equal + 1.0) / 2.0;
  }
  return r;
}

inline double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0;
  double va = 0.0;
  double vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (a[i] - ma) * (b[i] - mb);
    va += (a[i] - ma) * (a[i] - ma);
    vb += (b[i] - mb) * (b[i] - mb);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

inline double oracle_spearman(const std::vector<double>& a, const std::vector<double>& b) {
  return pearson(counting_ranks(a), counting_ranks(b));
}

// ---- Logistic oracle: plain full-batch gradient descent. ----

struct OracleFit {
  Vector weights;
  double intercept = 0.0;
  int iterations = 0;
};

// Minimizes sum_i softplus(-s_i z_i) + 0.5 * l2 * |W|^2 with a fixed step
// derived from the Lipschitz bound; stops when the gradient norm < tol.
inline OracleFit gradient_descent_logistic(const Matrix& X, const std::vector<int>& y, double l2,
                                           double tol, int max_iterations) {
  const Eigen::Index n = X.cols();
  const Eigen::Index m = X.rows();
  Matrix A(m, n + 1);
  A.col(0).setOnes();
  A.rightCols(n) = X;
  // Hessian of the sum loss is bounded by 0.25 * A^T A.
  const double lipschitz =
      0.25 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A.transpose() * A).eigenvalues().maxCoeff() + l2;
  const double step = 1.0 / lipschitz;
  Vector theta = Vector::Zero(n + 1);
  OracleFit fit;
  for (int it = 0; it < max_iterations; ++it) {
    Vector grad = Vector::Zero(n + 1);
    for (Eigen::Index i = 0; i < m; ++i) {
      const double z = A.row(i).dot(theta);
      const double p = 1.0 / (1.0 + std::exp(-z));
      grad += (p - y[static_cast<std::size_t>(i)]) * A.row(i).transpose();
    }
    grad.tail(n) += l2 * theta.tail(n);
    fit.iterations = it + 1;
    if (grad.norm() < tol) break;
    theta -= step * grad;
  }
  fit.intercept = theta[0];
  fit.weights = theta.tail(n);
  return fit;
}

}  // namespace xtest
