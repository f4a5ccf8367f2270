#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "layerscope/analysis.hpp"

namespace layerscope {

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, int max_sweeps) {
  const Index n = symmetric.rows();
  require(n == symmetric.cols(), ErrorCode::Dimension, "jacobi_eigen: matrix is not square");
  require(symmetric.allFinite(), ErrorCode::Validation, "jacobi_eigen: non-finite entries");
  const double scale = symmetric.norm();
  require((symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(scale, 1.0),
          ErrorCode::Validation, "jacobi_eigen: matrix is not symmetric");

  Eigen::MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = eps * scale;

  auto off_diagonal = [&] {
    double sum = 0.0;
    for (Index j = 0; j < n; ++j)
      for (Index i = 0; i < n; ++i)
        if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
  };

  SymmetricEigen out;
  bool converged = n <= 1 || off_diagonal() <= tol;
  for (int sweep = 1; sweep <= max_sweeps && !converged; ++sweep) {
    out.sweeps = sweep;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        // Entries lost in rounding against both diagonal terms are dropped.
        if (std::abs(apq) <= tol / static_cast<double>(n) ||
            (std::abs(apq) <= eps * std::abs(a(p, p)) && std::abs(apq) <= eps * std::abs(a(q, q)))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        // A <- J^T A J with J the (p, q) rotation.
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    converged = off_diagonal() <= tol;
  }
  require(converged, ErrorCode::Numerical,
          "jacobi_eigen: no convergence after " + std::to_string(max_sweeps) + " sweeps");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (Index i = 0; i < n; ++i) {
    out.values[i] = a(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
  }
  return out;
}

namespace {

KMeansResult kmeans_once(const Eigen::MatrixXd& x, int k, Rng& rng, int max_iterations) {
  const Index n = x.rows();
  Eigen::MatrixXd centroids(k, x.cols());

  // k-means++ seeding.
  centroids.row(0) = x.row(static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  Series<double> nearest = (x.rowwise() - centroids.row(0)).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = nearest.sum();
    Index pick = 0;
    if (total > 0.0) {
      double target = rng.unit() * total;
      for (pick = 0; pick < n - 1; ++pick) {
        target -= nearest[pick];
        if (target < 0.0) break;
      }
    } else {
      pick = static_cast<Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centroids.row(c) = x.row(pick);
    nearest = nearest.cwiseMin((x.rowwise() - centroids.row(c)).rowwise().squaredNorm());
  }

  KMeansResult r;
  r.assignments.assign(static_cast<std::size_t>(n), -1);
  for (int it = 0; it < max_iterations; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Eigen::Index best = 0;
      (centroids.rowwise() - x.row(i)).rowwise().squaredNorm().minCoeff(&best);
      if (r.assignments[static_cast<std::size_t>(i)] != static_cast<int>(best)) {
        r.assignments[static_cast<std::size_t>(i)] = static_cast<int>(best);
        changed = true;
      }
    }

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, x.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const int a = r.assignments[static_cast<std::size_t>(i)];
      sums.row(a) += x.row(i);
      ++counts[static_cast<std::size_t>(a)];
    }
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: take over the point farthest from its own centroid.
      Index far = 0;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        const double dist = (x.row(i) - centroids.row(r.assignments[static_cast<std::size_t>(i)])).squaredNorm();
        if (dist > far_d) {
          far_d = dist;
          far = i;
        }
      }
      centroids.row(c) = x.row(far);
      r.assignments[static_cast<std::size_t>(far)] = c;
      changed = true;
    }
    if (!changed) break;
  }

  r.centroids = centroids;
  for (Index i = 0; i < n; ++i)
    r.inertia += (x.row(i) - centroids.row(r.assignments[static_cast<std::size_t>(i)])).squaredNorm();
  return r;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts, int max_iterations) {
  require(k >= 1, ErrorCode::Validation, "kmeans: k must be positive");
  require(points.rows() >= k, ErrorCode::Validation, "kmeans: fewer points than clusters");
  require(restarts >= 1, ErrorCode::Validation, "kmeans: need at least one restart");
  Rng rng(seed);
  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int run = 0; run < restarts; ++run) {
    KMeansResult r = kmeans_once(points, k, rng, max_iterations);
    if (r.inertia < best.inertia) best = std::move(r);
  }
  return best;
}

ClusterResult spectral_cluster(const Eigen::MatrixXd& profiles, double gamma, int k, std::uint64_t seed) {
  const Index n = profiles.rows();
  require(k >= 1 && n >= k, ErrorCode::Validation, "spectral_cluster: need at least k rows");
  require(gamma > 0.0, ErrorCode::Validation, "spectral_cluster: gamma must be positive");
  require(profiles.allFinite(), ErrorCode::Validation, "spectral_cluster: non-finite profiles");

  Eigen::MatrixXd affinity = Eigen::MatrixXd::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      affinity(i, j) = affinity(j, i) = std::exp(-gamma * (profiles.row(i) - profiles.row(j)).squaredNorm());

  const Series<double> degree = affinity.rowwise().sum();
  Series<double> inv_sqrt(n);
  for (Index i = 0; i < n; ++i) inv_sqrt[i] = degree[i] > 0.0 ? 1.0 / std::sqrt(degree[i]) : 0.0;
  Eigen::MatrixXd laplacian = -(inv_sqrt.asDiagonal() * affinity * inv_sqrt.asDiagonal());
  laplacian.diagonal().array() += 1.0;

  const SymmetricEigen eig = jacobi_eigen(laplacian);

  ClusterResult result;
  result.k = k;
  result.gamma = gamma;
  result.eigenvalues = eig.values.head(k);
  result.embedding = eig.vectors.leftCols(k);
  for (Index i = 0; i < n; ++i) {
    const double norm = result.embedding.row(i).norm();
    if (norm > 0.0) result.embedding.row(i) /= norm;
  }

  const KMeansResult km = kmeans(result.embedding, k, seed);
  // Renumber clusters by first appearance so equal partitions print equally.
  std::vector<int> relabel(static_cast<std::size_t>(k), -1);
  int next = 0;
  result.assignments.reserve(static_cast<std::size_t>(n));
  for (int a : km.assignments) {
    auto& slot = relabel[static_cast<std::size_t>(a)];
    if (slot < 0) slot = next++;
    result.assignments.push_back(slot);
  }
  return result;
}

}  // namespace layerscope
