#include "ganlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <vector>

#include "ganlab/common.hpp"
#include "ganlab/kernels.hpp"
#include "ganlab/linalg.hpp"
#include "ganlab/rng.hpp"

namespace ganlab {

namespace {

void require_nonempty(const SampleSet& s, const char* who) {
    if (s.n() < 1) {
        throw DataError(std::string(who) + ": empty sample set");
    }
    if (!s.points.all_finite()) {
        throw DataError(std::string(who) + ": non-finite sample values");
    }
}

void require_same_dim(const SampleSet& a, const SampleSet& b, const char* who) {
    if (a.dim() != b.dim()) {
        throw DimensionError(std::string(who) + ": dimension mismatch (" +
                             std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
    }
}

int nearest_center_index(const Matrix& centers, std::span<const double> point) {
    int best = 0;
    double best_sq = std::numeric_limits<double>::infinity();
    for (int c = 0; c < centers.rows(); ++c) {
        double sq = 0.0;
        for (int j = 0; j < centers.cols(); ++j) {
            const double diff = point[static_cast<std::size_t>(j)] - centers(c, j);
            sq += diff * diff;
        }
        if (sq < best_sq) {
            best_sq = sq;
            best = c;
        }
    }
    return best;
}

}  // namespace

double w1_exact(const SampleSet& a, const SampleSet& b) {
    require_nonempty(a, "w1_exact");
    require_nonempty(b, "w1_exact");
    require_same_dim(a, b, "w1_exact");
    if (a.n() != b.n()) {
        throw DimensionError("w1_exact: sample counts differ (" + std::to_string(a.n()) +
                             " vs " + std::to_string(b.n()) + ")");
    }
    Matrix cost = pairwise_sq_dists(a.points, b.points);
    for (double& v : cost.data()) {
        v = std::sqrt(v);
    }
    const AssignmentResult assignment = solve_assignment(cost);
    return assignment.total_cost / static_cast<double>(a.n());
}

double w1_sliced(const SampleSet& a, const SampleSet& b, int projections, std::uint64_t seed) {
    require_nonempty(a, "w1_sliced");
    require_nonempty(b, "w1_sliced");
    require_same_dim(a, b, "w1_sliced");
    if (a.n() != b.n()) {
        throw DimensionError("w1_sliced: sample counts differ");
    }
    if (projections < 1) {
        throw ConfigError("w1_sliced: projections must be >= 1");
    }
    const int n = a.n();
    const int d = a.dim();
    Rng rng(seed);
    std::vector<double> direction(static_cast<std::size_t>(d));
    std::vector<double> pa(static_cast<std::size_t>(n));
    std::vector<double> pb(static_cast<std::size_t>(n));
    double total = 0.0;
    for (int p = 0; p < projections; ++p) {
        double norm_sq = 0.0;
        do {
            norm_sq = 0.0;
            for (double& u : direction) {
                u = rng.normal();
                norm_sq += u * u;
            }
        } while (norm_sq < 1e-24);
        const double inv_norm = 1.0 / std::sqrt(norm_sq);
        for (int i = 0; i < n; ++i) {
            const auto ra = a.points.row(i);
            const auto rb = b.points.row(i);
            double sa = 0.0;
            double sb = 0.0;
            for (int j = 0; j < d; ++j) {
                const double u = direction[static_cast<std::size_t>(j)] * inv_norm;
                sa += u * ra[static_cast<std::size_t>(j)];
                sb += u * rb[static_cast<std::size_t>(j)];
            }
            pa[static_cast<std::size_t>(i)] = sa;
            pb[static_cast<std::size_t>(i)] = sb;
        }
        std::sort(pa.begin(), pa.end());
        std::sort(pb.begin(), pb.end());
        double w = 0.0;
        for (int i = 0; i < n; ++i) {
            w += std::abs(pa[static_cast<std::size_t>(i)] - pb[static_cast<std::size_t>(i)]);
        }
        total += w / static_cast<double>(n);
    }
    // A random projection shrinks any fixed displacement by E|<e,u>| on
    // average; dividing by that factor makes the estimate agree with the
    // unprojected distance for well-separated sets. The factor is
    // sqrt(pi)*Gamma((d+1)/2)/Gamma(d/2), equal to 1 when d == 1.
    const double debias = std::exp(0.5 * std::log(M_PI) + std::lgamma(0.5 * (d + 1)) -
                                   std::lgamma(0.5 * d));
    return debias * total / static_cast<double>(projections);
}

PrecisionRecall knn_precision_recall(const SampleSet& real, const SampleSet& fake, int k) {
    require_nonempty(real, "knn_precision_recall");
    require_nonempty(fake, "knn_precision_recall");
    require_same_dim(real, fake, "knn_precision_recall");
    if (k < 1) {
        throw ConfigError("knn_precision_recall: k must be >= 1");
    }
    if (real.n() <= k || fake.n() <= k) {
        throw DataError("knn_precision_recall: need more than k points per set");
    }
    const std::vector<double> real_radii = knn_radii(pairwise_sq_dists(real.points, real.points), k);
    const std::vector<double> fake_radii = knn_radii(pairwise_sq_dists(fake.points, fake.points), k);
    const Matrix cross_sq = pairwise_sq_dists(real.points, fake.points);

    int fake_covered = 0;
    for (int j = 0; j < fake.n(); ++j) {
        for (int i = 0; i < real.n(); ++i) {
            if (std::sqrt(cross_sq(i, j)) <= real_radii[static_cast<std::size_t>(i)]) {
                ++fake_covered;
                break;
            }
        }
    }
    int real_covered = 0;
    for (int i = 0; i < real.n(); ++i) {
        for (int j = 0; j < fake.n(); ++j) {
            if (std::sqrt(cross_sq(i, j)) <= fake_radii[static_cast<std::size_t>(j)]) {
                ++real_covered;
                break;
            }
        }
    }
    PrecisionRecall pr;
    pr.precision = static_cast<double>(fake_covered) / static_cast<double>(fake.n());
    pr.recall = static_cast<double>(real_covered) / static_cast<double>(real.n());
    return pr;
}

GaussianStats fit_gaussian(const SampleSet& features) {
    require_nonempty(features, "fit_gaussian");
    const int n = features.n();
    const int d = features.dim();
    if (n < 2) {
        throw DataError("fit_gaussian: need at least 2 samples");
    }
    GaussianStats stats;
    stats.mean.assign(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < n; ++i) {
        const auto row = features.points.row(i);
        for (int j = 0; j < d; ++j) {
            stats.mean[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
        }
    }
    for (double& m : stats.mean) {
        m /= static_cast<double>(n);
    }
    stats.cov = Matrix(d, d);
    for (int i = 0; i < n; ++i) {
        const auto row = features.points.row(i);
        for (int a = 0; a < d; ++a) {
            const double da = row[static_cast<std::size_t>(a)] - stats.mean[static_cast<std::size_t>(a)];
            for (int b = a; b < d; ++b) {
                const double db = row[static_cast<std::size_t>(b)] - stats.mean[static_cast<std::size_t>(b)];
                stats.cov(a, b) += da * db;
            }
        }
    }
    const double scale = 1.0 / static_cast<double>(n - 1);
    for (int a = 0; a < d; ++a) {
        for (int b = a; b < d; ++b) {
            stats.cov(a, b) *= scale;
            stats.cov(b, a) = stats.cov(a, b);
        }
    }
    return stats;
}

double frechet_distance(const GaussianStats& a, const GaussianStats& b) {
    const int d = static_cast<int>(a.mean.size());
    if (static_cast<int>(b.mean.size()) != d || a.cov.rows() != d || b.cov.rows() != d) {
        throw DimensionError("frechet_distance: dimension mismatch");
    }
    auto check_symmetric = [](const Matrix& m, const char* name) {
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = i + 1; j < m.cols(); ++j) {
                if (std::abs(m(i, j) - m(j, i)) > 1e-9) {
                    throw DataError(std::string("frechet_distance: ") + name +
                                    " covariance not symmetric");
                }
            }
        }
    };
    check_symmetric(a.cov, "first");
    check_symmetric(b.cov, "second");

    double mean_sq = 0.0;
    for (int j = 0; j < d; ++j) {
        const double diff = a.mean[static_cast<std::size_t>(j)] - b.mean[static_cast<std::size_t>(j)];
        mean_sq += diff * diff;
    }
    const Matrix sqrt_a = sqrt_psd(a.cov);
    Matrix inner = matmul(matmul(sqrt_a, b.cov), sqrt_a);
    // Round-off can leave the product slightly asymmetric; symmetrize before
    // the eigen solve.
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const double avg = 0.5 * (inner(i, j) + inner(j, i));
            inner(i, j) = avg;
            inner(j, i) = avg;
        }
    }
    const SymmetricEigen eig = eigen_symmetric(inner);
    double trace_sqrt = 0.0;
    for (double lambda : eig.values) {
        if (lambda > 1e-10) {
            trace_sqrt += std::sqrt(lambda);
        }
    }
    double trace_a = 0.0;
    double trace_b = 0.0;
    for (int j = 0; j < d; ++j) {
        trace_a += a.cov(j, j);
        trace_b += b.cov(j, j);
    }
    double result = mean_sq + trace_a + trace_b - 2.0 * trace_sqrt;
    if (result < 0.0) {
        if (result < -1e-8) {
            throw Error("frechet_distance: numerically negative result " +
                        std::to_string(result));
        }
        result = 0.0;
    }
    return result;
}

double kid(const SampleSet& x, const SampleSet& y) {
    require_nonempty(x, "kid");
    require_nonempty(y, "kid");
    require_same_dim(x, y, "kid");
    const int m = x.n();
    const int n = y.n();
    if (m < 2 || n < 2) {
        throw DataError("kid: need at least 2 samples per set");
    }
    const double d = static_cast<double>(x.dim());
    auto kernel_sum = [d](const Matrix& gram, bool skip_diagonal) {
        double total = 0.0;
        for (int i = 0; i < gram.rows(); ++i) {
            const auto row = gram.row(i);
            double partial = 0.0;
            for (int j = 0; j < gram.cols(); ++j) {
                if (skip_diagonal && i == j) {
                    continue;
                }
                const double base = row[static_cast<std::size_t>(j)] / d + 1.0;
                partial += base * base * base;
            }
            total += partial;
        }
        return total;
    };
    const double xx = kernel_sum(matmul_trans_b(x.points, x.points), true);
    const double yy = kernel_sum(matmul_trans_b(y.points, y.points), true);
    const double xy = kernel_sum(matmul_trans_b(x.points, y.points), false);
    return xx / (static_cast<double>(m) * (m - 1.0)) + yy / (static_cast<double>(n) * (n - 1.0)) -
           2.0 * xy / (static_cast<double>(m) * n);
}

double grad_field_similarity(const MlpModel& disc, const SampleSet& samples,
                             const Matrix& centers) {
    require_nonempty(samples, "grad_field_similarity");
    if (centers.rows() < 1 || centers.cols() != samples.dim()) {
        throw DimensionError("grad_field_similarity: bad center matrix");
    }
    const Matrix grads = input_gradient_of_logit(disc, samples.points);
    double total = 0.0;
    int kept = 0;
    for (int i = 0; i < samples.n(); ++i) {
        const auto point = samples.points.row(i);
        const int c = nearest_center_index(centers, point);
        double golden_sq = 0.0;
        double grad_sq = 0.0;
        double dot = 0.0;
        for (int j = 0; j < samples.dim(); ++j) {
            const double gold = centers(c, j) - point[static_cast<std::size_t>(j)];
            const double grad = grads(i, j);
            golden_sq += gold * gold;
            grad_sq += grad * grad;
            dot += gold * grad;
        }
        if (std::sqrt(golden_sq) <= 1e-9 || std::sqrt(grad_sq) < 1e-12) {
            continue;
        }
        total += dot / (std::sqrt(golden_sq) * std::sqrt(grad_sq));
        ++kept;
    }
    if (kept == 0) {
        throw DataError("grad_field_similarity: every sample excluded");
    }
    return total / static_cast<double>(kept);
}

std::int64_t convergence_rate(const MetricSeries& series, double slack) {
    if (series.entries.empty()) {
        throw DataError("convergence_rate: empty series");
    }
    if (slack < 0.0) {
        throw ConfigError("convergence_rate: slack must be >= 0");
    }
    double minimum = std::numeric_limits<double>::infinity();
    std::int64_t previous_step = std::numeric_limits<std::int64_t>::min();
    for (const auto& [step, value] : series.entries) {
        if (step <= previous_step) {
            throw DataError("convergence_rate: steps not strictly increasing");
        }
        previous_step = step;
        if (!std::isfinite(value) || value <= 0.0) {
            throw DataError("convergence_rate: values must be finite and positive");
        }
        minimum = std::min(minimum, value);
    }
    const double threshold = (1.0 + slack) * minimum;
    for (const auto& [step, value] : series.entries) {
        if (value <= threshold) {
            return step;
        }
    }
    return series.entries.back().first;  // unreachable: the minimum qualifies
}

int mode_coverage(const SampleSet& samples, const Matrix& centers, int min_count, int n_ref) {
    require_nonempty(samples, "mode_coverage");
    if (centers.rows() < 1 || centers.cols() != samples.dim()) {
        throw DimensionError("mode_coverage: bad center matrix");
    }
    if (min_count < 1 || n_ref < 1) {
        throw ConfigError("mode_coverage: min_count and n_ref must be >= 1");
    }
    std::vector<int> counts(static_cast<std::size_t>(centers.rows()), 0);
    for (int i = 0; i < samples.n(); ++i) {
        ++counts[static_cast<std::size_t>(nearest_center_index(centers, samples.points.row(i)))];
    }
    const double threshold =
        static_cast<double>(min_count) * static_cast<double>(samples.n()) / static_cast<double>(n_ref);
    int covered = 0;
    for (int count : counts) {
        if (static_cast<double>(count) >= threshold) {
            ++covered;
        }
    }
    return covered;
}

double euclidean_row_distance(std::span<const double> a, std::span<const double> b) {
    double sq = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double diff = a[j] - b[j];
        sq += diff * diff;
    }
    return std::sqrt(sq);
}

std::vector<double> trajectory_lengths(const std::vector<SampleSet>& snapshot_outputs,
                                       const RowDistance& dist) {
    if (snapshot_outputs.size() < 2) {
        throw DataError("trajectory_lengths: need at least 2 snapshots");
    }
    const int n = snapshot_outputs.front().n();
    const int d = snapshot_outputs.front().dim();
    for (const SampleSet& s : snapshot_outputs) {
        if (s.n() != n || s.dim() != d) {
            throw DimensionError("trajectory_lengths: snapshot shapes differ");
        }
    }
    std::vector<double> lengths(static_cast<std::size_t>(n), 0.0);
    for (std::size_t t = 0; t + 1 < snapshot_outputs.size(); ++t) {
        const Matrix& from = snapshot_outputs[t].points;
        const Matrix& to = snapshot_outputs[t + 1].points;
        for (int i = 0; i < n; ++i) {
            lengths[static_cast<std::size_t>(i)] += dist(from.row(i), to.row(i));
        }
    }
    return lengths;
}

PointAssigner nearest_center_assigner(const Matrix& centers) {
    if (centers.rows() < 1) {
        throw DimensionError("nearest_center_assigner: empty center matrix");
    }
    return [centers](std::span<const double> point) {
        return nearest_center_index(centers, point);
    };
}

std::vector<double> class_change_probability(const std::vector<SampleSet>& snapshot_outputs,
                                             const PointAssigner& assigner) {
    if (snapshot_outputs.size() < 2) {
        throw DataError("class_change_probability: need at least 2 snapshots");
    }
    const int n = snapshot_outputs.front().n();
    std::vector<std::vector<int>> classes;
    classes.reserve(snapshot_outputs.size());
    for (const SampleSet& s : snapshot_outputs) {
        if (s.n() != n) {
            throw DimensionError("class_change_probability: snapshot sizes differ");
        }
        std::vector<int> assigned(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            assigned[static_cast<std::size_t>(i)] = assigner(s.points.row(i));
        }
        classes.push_back(std::move(assigned));
    }
    std::vector<double> changes;
    changes.reserve(classes.size() - 1);
    for (std::size_t t = 0; t + 1 < classes.size(); ++t) {
        int changed = 0;
        for (int i = 0; i < n; ++i) {
            if (classes[t][static_cast<std::size_t>(i)] != classes[t + 1][static_cast<std::size_t>(i)]) {
                ++changed;
            }
        }
        changes.push_back(static_cast<double>(changed) / static_cast<double>(n));
    }
    return changes;
}

double pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) {
        throw DimensionError("pearson: size mismatch");
    }
    if (xs.size() < 2) {
        throw DataError("pearson: need at least 2 points");
    }
    const double n = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double syy = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = xs[i] - mx;
        const double dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) {
        throw DataError("pearson: zero variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace ganlab
