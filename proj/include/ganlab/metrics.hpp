#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ganlab/matrix.hpp"
#include "ganlab/nn.hpp"

namespace ganlab {

// A batch of n d-dimensional points with a provenance label.
struct SampleSet {
    Matrix points;
    std::string label;

    int n() const { return points.rows(); }
    int dim() const { return points.cols(); }
};

struct GaussianStats {
    std::vector<double> mean;
    Matrix cov;
};

// Ordered (step, value) pairs; steps strictly increasing.
struct MetricSeries {
    std::vector<std::pair<std::int64_t, double>> entries;
};

// Exact Wasserstein-1 between equal-size sets: minimum over bijections of the
// mean Euclidean pair cost, solved as an assignment problem.
double w1_exact(const SampleSet& a, const SampleSet& b);

// Sliced approximation: mean 1D W1 over random unit directions, debiased by
// the expected projection shrinkage E|<e,u>| so that translated copies of the
// same set score their true separation. Exact for d = 1.
double w1_sliced(const SampleSet& a, const SampleSet& b, int projections, std::uint64_t seed);

struct PrecisionRecall {
    double precision = 0.0;
    double recall = 0.0;
};

// k-NN manifold coverage: a point is covered by a set if it lies within the
// k-th-neighbor radius (closed ball, self excluded) of any member. Precision
// covers fake by the real manifold, recall covers real by the fake manifold.
PrecisionRecall knn_precision_recall(const SampleSet& real, const SampleSet& fake, int k = 5);

GaussianStats fit_gaussian(const SampleSet& features);

// ||mu1-mu2||^2 + Tr(S1 + S2 - 2 (S1 S2)^{1/2}); matrix square root via
// symmetric eigendecomposition of S1^{1/2} S2 S1^{1/2}, eigenvalues below
// 1e-10 clipped. Small negative results (>= -1e-8) clamp to zero.
double frechet_distance(const GaussianStats& a, const GaussianStats& b);

// Unbiased squared MMD with kernel (u.v/d + 1)^3; within-set sums exclude the
// diagonal.
double kid(const SampleSet& x, const SampleSet& y);

// Mean cosine between the discriminator logit's input gradient and the
// direction towards the nearest center. Samples closer than 1e-9 to a center
// or with gradient norm below 1e-12 are excluded.
double grad_field_similarity(const MlpModel& disc, const SampleSet& samples,
                             const Matrix& centers);

// Step of the first entry within (1+slack) of the series minimum.
std::int64_t convergence_rate(const MetricSeries& series, double slack = 0.05);

// Number of centers holding at least min_count*(n/n_ref) nearest-assigned samples.
int mode_coverage(const SampleSet& samples, const Matrix& centers, int min_count = 10,
                  int n_ref = 10000);

using RowDistance = std::function<double(std::span<const double>, std::span<const double>)>;
double euclidean_row_distance(std::span<const double> a, std::span<const double> b);

// Per aligned row, summed distance along consecutive snapshots.
std::vector<double> trajectory_lengths(const std::vector<SampleSet>& snapshot_outputs,
                                       const RowDistance& dist = euclidean_row_distance);

using PointAssigner = std::function<int(std::span<const double>)>;
PointAssigner nearest_center_assigner(const Matrix& centers);

// Per consecutive snapshot pair, fraction of rows whose assigned class changes.
std::vector<double> class_change_probability(const std::vector<SampleSet>& snapshot_outputs,
                                             const PointAssigner& assigner);

double pearson(std::span<const double> xs, std::span<const double> ys);

}  // namespace ganlab
