#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "layerscope/generator.hpp"

namespace layerscope {

// ---------------------------------------------------------------------------
// Latent-variable ranking

struct LatentRank {
  Index index = 0;
  double coefficient = 0.0;
  double score = 0.0;  // |coefficient| for the logistic fit, |r| for the fallback
};

struct RankingOptions {
  double ridge = 1e-3;
  int max_iterations = 50;
  double tolerance = 1e-8;
};

struct LatentRanking {
  enum class Method { LogisticIrls, PointBiserial };
  Method method = Method::LogisticIrls;
  bool converged = false;
  int iterations = 0;
  double intercept = 0.0;
  std::vector<LatentRank> ranks;  // sorted by score, ties to the lower index
};

/// Fits presence ~ logistic(intercept + latents * beta) with an L2 penalty on
/// beta by damped Newton (IRLS) and ranks variables by |beta|. When IRLS does
/// not converge the ranking falls back to point-biserial correlations.
LatentRanking rank_latents(const Eigen::MatrixXd& latents, const Series<double>& presence,
                           const RankingOptions& options = {});

/// Point-biserial correlation of each column with a 0/1 vector; constant
/// columns get 0.
Series<double> point_biserial(const Eigen::MatrixXd& latents, const Series<double>& presence);

// ---------------------------------------------------------------------------
// Activation profiles

struct ProfileCondition {
  std::string label;                  // e.g. "z11=-15"
  std::map<Index, double> overrides;  // z index -> value
  std::optional<Series<double>> code;
};

/// Per-feature-map mean post-activation over many generated outputs.
struct ActivationProfile {
  std::size_t layer_index = 0;
  TensorTS means;  // n_maps x layer samples
  Index n_outputs_averaged = 0;
  std::string label;
};

/// Mean post-activation block of `layer_index` over the given latents. The
/// reduction order is fixed, so the result does not depend on thread count.
ActivationProfile profile_from_latents(const GeneratorSpec& spec, const WeightBundle& weights,
                                       const std::vector<LatentVector>& latents, std::size_t layer_index);

/// Output i of every condition draws its free z entries from
/// derive_seed(root_seed, i), so conditions differ only in their overrides.
std::vector<ActivationProfile> build_profiles(const GeneratorSpec& spec, const WeightBundle& weights,
                                              Index n_per_condition, const std::vector<ProfileCondition>& conditions,
                                              std::size_t layer_index, std::uint64_t root_seed);

// ---------------------------------------------------------------------------
// Spectral clustering

struct SymmetricEigen {
  Series<double> values;   // ascending
  Eigen::MatrixXd vectors; // column i pairs with values[i]
  int sweeps = 0;
};

/// Cyclic Jacobi rotations; throws Numerical after `max_sweeps` without convergence.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, int max_sweeps = 100);

struct KMeansResult {
  std::vector<int> assignments;
  Eigen::MatrixXd centroids;
  double inertia = 0.0;
};

/// k-means++ seeding with `restarts` runs; keeps the lowest-inertia run.
/// Empty clusters are re-seeded with the point farthest from its centroid.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed, int restarts = 10,
                    int max_iterations = 300);

struct ClusterResult {
  std::vector<int> assignments;  // per row; ids in [0, k), numbered by first appearance
  int k = 2;
  double gamma = 1e-10;
  Eigen::MatrixXd embedding;  // n x k, rows normalized
  Series<double> eigenvalues; // the k smallest Laplacian eigenvalues
};

inline constexpr double kDefaultGamma = 1e-10;

/// RBF affinity exp(-gamma |p_i - p_j|^2) with a zero diagonal, symmetric
/// normalized Laplacian, k smallest eigenvectors, row normalization, k-means.
ClusterResult spectral_cluster(const Eigen::MatrixXd& profiles, double gamma = kDefaultGamma, int k = 2,
                               std::uint64_t seed = 0);

// ---------------------------------------------------------------------------
// Feature-map selection

struct MapDistance {
  Index map = 0;
  double distance = 0.0;
};

/// 1 - cos(a, b); 1 when either side has zero norm.
double cosine_distance(const Series<double>& a, const Series<double>& b);

/// For each feature map, the mean cosine distance between its series in
/// `extreme` and in each of `traces`. Returns the `top_n` smallest, ties to the
/// lower map index.
std::vector<MapDistance> nearest_maps_by_cosine(const TensorTS& extreme, const std::vector<TensorTS>& traces,
                                                std::size_t top_n);

}  // namespace layerscope
