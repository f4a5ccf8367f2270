#include "layerscope/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "layerscope/parallel.hpp"

namespace layerscope {

namespace {

double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<LatentRank> sorted_ranks(const Series<double>& coefficients, const Series<double>& scores) {
  std::vector<LatentRank> ranks;
  for (Index i = 0; i < coefficients.size(); ++i) ranks.push_back({i, coefficients[i], scores[i]});
  std::stable_sort(ranks.begin(), ranks.end(), [](const LatentRank& a, const LatentRank& b) { return a.score > b.score; });
  return ranks;
}

}  // namespace

Series<double> point_biserial(const Eigen::MatrixXd& latents, const Series<double>& presence) {
  const Series<double> dy = presence.array() - presence.mean();
  const double syy = dy.squaredNorm();
  Series<double> r = Series<double>::Zero(latents.cols());
  for (Index j = 0; j < latents.cols(); ++j) {
    const Series<double> dx = latents.col(j).array() - latents.col(j).mean();
    const double sxx = dx.squaredNorm();
    if (sxx > 0.0 && syy > 0.0) r[j] = dx.dot(dy) / std::sqrt(sxx * syy);
  }
  return r;
}

LatentRanking rank_latents(const Eigen::MatrixXd& latents, const Series<double>& presence,
                           const RankingOptions& options) {
  const Index n = latents.rows();
  const Index d = latents.cols();
  require(presence.size() == n, ErrorCode::Dimension, "rank_latents: presence length differs from sample count");
  require(n >= 50, ErrorCode::Validation, "rank_latents: need at least 50 samples");
  require(latents.allFinite(), ErrorCode::Validation, "rank_latents: non-finite latents");
  Index positives = 0;
  for (Index i = 0; i < n; ++i) {
    require(presence[i] == 0.0 || presence[i] == 1.0, ErrorCode::Validation, "rank_latents: presence must be 0/1");
    positives += presence[i] == 1.0;
  }
  require(positives > 0 && positives < n, ErrorCode::Validation, "rank_latents: presence has a single class");

  Eigen::MatrixXd X(n, d + 1);
  X.col(0).setOnes();
  X.rightCols(d) = latents;

  Series<double> penalty = Series<double>::Constant(d + 1, options.ridge);
  penalty[0] = 0.0;  // intercept is not shrunk

  auto objective = [&](const Series<double>& beta) {
    const Series<double> eta = X * beta;
    double nll = 0.0;
    for (Index i = 0; i < n; ++i) nll += softplus(eta[i]) - presence[i] * eta[i];
    return nll + 0.5 * beta.cwiseProduct(penalty).dot(beta);
  };

  LatentRanking result;
  Series<double> beta = Series<double>::Zero(d + 1);
  double current = objective(beta);
  for (int it = 1; it <= options.max_iterations && !result.converged; ++it) {
    result.iterations = it;
    const Series<double> eta = X * beta;
    Series<double> p(n), w(n);
    for (Index i = 0; i < n; ++i) {
      p[i] = sigmoid(eta[i]);
      w[i] = p[i] * (1.0 - p[i]);
    }
    const Series<double> grad = X.transpose() * (p - presence) + penalty.cwiseProduct(beta);
    Eigen::MatrixXd hessian = X.transpose() * w.asDiagonal() * X;
    hessian.diagonal() += penalty;
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(hessian);
    if (ldlt.info() != Eigen::Success) break;
    const Series<double> step = ldlt.solve(grad);
    if (!step.allFinite()) break;

    // Halve the Newton step until the penalized likelihood does not get worse.
    double t = 1.0;
    Series<double> candidate = beta - step;
    double next = objective(candidate);
    for (int halvings = 0; halvings < 40 && !(next <= current); ++halvings) {
      t *= 0.5;
      candidate = beta - t * step;
      next = objective(candidate);
    }
    if (!(next <= current)) break;
    const double moved = (t * step).cwiseAbs().maxCoeff();
    beta = candidate;
    current = next;
    if (moved < options.tolerance) result.converged = true;
  }

  if (result.converged) {
    result.method = LatentRanking::Method::LogisticIrls;
    result.intercept = beta[0];
    const Series<double> coef = beta.tail(d);
    result.ranks = sorted_ranks(coef, coef.cwiseAbs());
  } else {
    result.method = LatentRanking::Method::PointBiserial;
    const Series<double> r = point_biserial(latents, presence);
    result.ranks = sorted_ranks(r, r.cwiseAbs());
  }
  return result;
}

ActivationProfile profile_from_latents(const GeneratorSpec& spec, const WeightBundle& weights,
                                       const std::vector<LatentVector>& latents, std::size_t layer_index) {
  require(!latents.empty(), ErrorCode::Validation, "profile: need at least one output");
  require(layer_index >= 1 && layer_index <= spec.layers.size(), ErrorCode::Validation,
          "profile: layer " + std::to_string(layer_index) + " does not exist");

  // Fixed-size chunks reduced in index order keep the sum independent of scheduling.
  constexpr std::size_t kChunk = 8;
  const std::size_t n_chunks = (latents.size() + kChunk - 1) / kChunk;
  const Index rows = spec.channels_at(layer_index);
  const Index cols = spec.samples_at(layer_index);
  std::vector<TensorTS> partial(n_chunks);
  parallel_for(n_chunks, [&](std::size_t c) {
    TensorTS sum = TensorTS::Zero(rows, cols);
    const std::size_t end = std::min(latents.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) sum += forward(spec, weights, latents[i]).layer(layer_index);
    partial[c] = std::move(sum);
  });

  ActivationProfile profile;
  profile.layer_index = layer_index;
  profile.n_outputs_averaged = static_cast<Index>(latents.size());
  profile.means = TensorTS::Zero(rows, cols);
  for (const auto& p : partial) profile.means += p;
  profile.means /= static_cast<double>(latents.size());
  return profile;
}

std::vector<ActivationProfile> build_profiles(const GeneratorSpec& spec, const WeightBundle& weights,
                                              Index n_per_condition, const std::vector<ProfileCondition>& conditions,
                                              std::size_t layer_index, std::uint64_t root_seed) {
  require(n_per_condition >= 1, ErrorCode::Validation, "build_profiles: need at least one output per condition");
  std::vector<ActivationProfile> out;
  for (const auto& cond : conditions) {
    std::vector<LatentVector> latents;
    latents.reserve(static_cast<std::size_t>(n_per_condition));
    for (Index i = 0; i < n_per_condition; ++i) {
      Rng rng(derive_seed(root_seed, static_cast<std::uint64_t>(i)));
      latents.push_back(sample_latent(rng, spec, cond.overrides, cond.code));
    }
    ActivationProfile p = profile_from_latents(spec, weights, latents, layer_index);
    p.label = cond.label;
    out.push_back(std::move(p));
  }
  return out;
}

double cosine_distance(const Series<double>& a, const Series<double>& b) {
  require(a.size() == b.size(), ErrorCode::Dimension, "cosine_distance: length mismatch");
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 1.0;
  return 1.0 - a.dot(b) / (na * nb);
}

std::vector<MapDistance> nearest_maps_by_cosine(const TensorTS& extreme, const std::vector<TensorTS>& traces,
                                                std::size_t top_n) {
  require(!traces.empty(), ErrorCode::Validation, "nearest_maps_by_cosine: no interpolation steps");
  for (const auto& t : traces)
    require(t.rows() == extreme.rows() && t.cols() == extreme.cols(), ErrorCode::Dimension,
            "nearest_maps_by_cosine: inconsistent layer shapes");

  std::vector<MapDistance> maps;
  for (Index m = 0; m < extreme.rows(); ++m) {
    const Series<double> ref = extreme.row(m).transpose();
    double total = 0.0;
    for (const auto& t : traces) total += cosine_distance(ref, t.row(m).transpose());
    maps.push_back({m, total / static_cast<double>(traces.size())});
  }
  std::stable_sort(maps.begin(), maps.end(),
                   [](const MapDistance& a, const MapDistance& b) { return a.distance < b.distance; });
  maps.resize(std::min(top_n, maps.size()));
  return maps;
}

}  // namespace layerscope
