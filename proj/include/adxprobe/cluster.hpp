#pragma once

// KMeans, silhouette and k selection under cosine distance. Everything here is
// templated on the scalar type and accepts any dense Eigen expression whose
// rows are the points.

#include "adxprobe/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cstdint>
#include <future>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace adxprobe {

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// 1 - cos(a, b). Two zero vectors are at distance 0; a zero vector is at
/// distance 1 from any non-zero vector.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine_distance(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b)
{
    using Scalar = typename DerivedA::Scalar;
    const Scalar na = a.norm();
    const Scalar nb = b.norm();
    if (na == Scalar(0) && nb == Scalar(0))
        return Scalar(0);
    if (na == Scalar(0) || nb == Scalar(0))
        return Scalar(1);
    const Scalar cos = a.dot(b) / (na * nb);
    return std::clamp(Scalar(1) - cos, Scalar(0), Scalar(2));
}

/// Rows scaled to unit length; zero rows stay zero.
template <typename Derived>
RowMatrix<typename Derived::Scalar> normalize_rows(const Eigen::MatrixBase<Derived>& points)
{
    using Scalar = typename Derived::Scalar;
    RowMatrix<Scalar> out = points;
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const Scalar n = out.row(i).norm();
        if (n > Scalar(0))
            out.row(i) /= n;
    }
    return out;
}

/// Full pairwise cosine-distance matrix.
template <typename Derived>
RowMatrix<typename Derived::Scalar> pairwise_cosine_distances(const Eigen::MatrixBase<Derived>& points)
{
    using Scalar = typename Derived::Scalar;
    const RowMatrix<Scalar> unit = normalize_rows(points);
    RowMatrix<Scalar> dist = (RowMatrix<Scalar>::Ones(unit.rows(), unit.rows()) - unit * unit.transpose())
                                 .cwiseMax(Scalar(0))
                                 .cwiseMin(Scalar(2));
    for (Eigen::Index i = 0; i < unit.rows(); ++i) {
        const bool zi = unit.row(i).squaredNorm() == Scalar(0);
        for (Eigen::Index j = 0; j < unit.rows(); ++j) {
            const bool zj = unit.row(j).squaredNorm() == Scalar(0);
            if (i == j || (zi && zj))
                dist(i, j) = Scalar(0);
            else if (zi || zj)
                dist(i, j) = Scalar(1);
        }
    }
    return dist;
}

template <typename Scalar>
struct Clustering {
    int k = 0;
    std::vector<int> assignments;          // cluster index per point row
    RowMatrix<Scalar> centroids;           // unit (or zero) direction per cluster
    Scalar objective = Scalar(0);          // sum of point-to-centroid distances
    std::vector<Scalar> objective_history; // after every assignment/update step
    int iterations = 0;
    Scalar mean_silhouette = std::numeric_limits<Scalar>::quiet_NaN();

    std::vector<int> cluster_sizes() const
    {
        std::vector<int> sizes(static_cast<std::size_t>(k), 0);
        for (int a : assignments)
            ++sizes[static_cast<std::size_t>(a)];
        return sizes;
    }
};

struct KMeansOptions {
    int max_iterations = 100;
    int restarts = 5;
};

namespace detail {

template <typename Scalar>
Scalar unit_distance(const RowMatrix<Scalar>& unit, Eigen::Index i, const RowMatrix<Scalar>& centroids, Eigen::Index c)
{
    const bool zp = unit.row(i).squaredNorm() == Scalar(0);
    const bool zc = centroids.row(c).squaredNorm() == Scalar(0);
    if (zp && zc)
        return Scalar(0);
    if (zp || zc)
        return Scalar(1);
    return std::clamp(Scalar(1) - unit.row(i).dot(centroids.row(c)), Scalar(0), Scalar(2));
}

template <typename Scalar>
Scalar objective(const RowMatrix<Scalar>& unit, const RowMatrix<Scalar>& centroids, const std::vector<int>& assign)
{
    Scalar total(0);
    for (Eigen::Index i = 0; i < unit.rows(); ++i)
        total += unit_distance(unit, i, centroids, assign[static_cast<std::size_t>(i)]);
    return total;
}

inline std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Nearest centroid; on ties the current cluster wins, then the lowest index.
template <typename Scalar>
bool assign(const RowMatrix<Scalar>& unit, const RowMatrix<Scalar>& centroids, std::vector<int>& assignments, bool keep_ties)
{
    constexpr Scalar tie_eps = Scalar(1e-12);
    bool changed = false;
    for (Eigen::Index i = 0; i < unit.rows(); ++i) {
        int best = 0;
        Scalar best_d = unit_distance(unit, i, centroids, 0);
        for (Eigen::Index c = 1; c < centroids.rows(); ++c) {
            const Scalar d = unit_distance(unit, i, centroids, c);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        int& current = assignments[static_cast<std::size_t>(i)];
        if (keep_ties && current >= 0 && unit_distance(unit, i, centroids, current) <= best_d + tie_eps)
            best = current;
        if (best != current) {
            current = best;
            changed = true;
        }
    }
    return changed;
}

// Gives each empty cluster the point lying farthest from its own centroid,
// taken from a cluster that can spare it.
template <typename Scalar>
void repair_empty(const RowMatrix<Scalar>& unit, RowMatrix<Scalar>& centroids, std::vector<int>& assignments, int k)
{
    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments)
        ++sizes[static_cast<std::size_t>(a)];
    for (int c = 0; c < k; ++c) {
        if (sizes[static_cast<std::size_t>(c)] > 0)
            continue;
        Eigen::Index pick = -1;
        Scalar far = -1;
        for (Eigen::Index i = 0; i < unit.rows(); ++i) {
            const int a = assignments[static_cast<std::size_t>(i)];
            if (sizes[static_cast<std::size_t>(a)] < 2)
                continue;
            const Scalar d = unit_distance(unit, i, centroids, a);
            if (d > far) {
                far = d;
                pick = i;
            }
        }
        if (pick < 0)
            break;
        --sizes[static_cast<std::size_t>(assignments[static_cast<std::size_t>(pick)])];
        assignments[static_cast<std::size_t>(pick)] = c;
        sizes[static_cast<std::size_t>(c)] = 1;
        centroids.row(c) = unit.row(pick);
    }
}

// Per cluster, the better of the normalized member sum and the zero direction.
template <typename Scalar>
void update_centroids(const RowMatrix<Scalar>& unit, RowMatrix<Scalar>& centroids, const std::vector<int>& assignments)
{
    const Eigen::Index k = centroids.rows();
    RowMatrix<Scalar> sums = RowMatrix<Scalar>::Zero(k, unit.cols());
    std::vector<int> nonzero(static_cast<std::size_t>(k), 0);
    std::vector<int> zero(static_cast<std::size_t>(k), 0);
    for (Eigen::Index i = 0; i < unit.rows(); ++i) {
        const int a = assignments[static_cast<std::size_t>(i)];
        sums.row(a) += unit.row(i);
        if (unit.row(i).squaredNorm() == Scalar(0))
            ++zero[static_cast<std::size_t>(a)];
        else
            ++nonzero[static_cast<std::size_t>(a)];
    }
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto uc = static_cast<std::size_t>(c);
        if (nonzero[uc] + zero[uc] == 0)
            continue;
        const Scalar n = sums.row(c).norm();
        // Cost with unit direction s/|s|: nonzero - |s| + zero; with the zero direction: nonzero.
        if (n > Scalar(0) && Scalar(nonzero[uc]) - n + Scalar(zero[uc]) <= Scalar(nonzero[uc]))
            centroids.row(c) = sums.row(c) / n;
        else
            centroids.row(c).setZero();
    }
}

template <typename Scalar>
Clustering<Scalar> kmeans_once(const RowMatrix<Scalar>& unit, int k, std::uint64_t seed, int max_iterations)
{
    const Eigen::Index n = unit.rows();
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Eigen::Index> first(0, n - 1);

    // Farthest-point seeding from a random first center.
    std::vector<Eigen::Index> chosen{first(rng)};
    std::vector<Scalar> min_d(static_cast<std::size_t>(n));
    RowMatrix<Scalar> centroids = RowMatrix<Scalar>::Zero(k, unit.cols());
    centroids.row(0) = unit.row(chosen[0]);
    for (Eigen::Index i = 0; i < n; ++i)
        min_d[static_cast<std::size_t>(i)] = unit_distance(unit, i, centroids, 0);
    for (int c = 1; c < k; ++c) {
        Eigen::Index pick = 0;
        Scalar far = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
            const bool used = std::find(chosen.begin(), chosen.end(), i) != chosen.end();
            if (!used && min_d[static_cast<std::size_t>(i)] > far) {
                far = min_d[static_cast<std::size_t>(i)];
                pick = i;
            }
        }
        chosen.push_back(pick);
        centroids.row(c) = unit.row(pick);
        for (Eigen::Index i = 0; i < n; ++i)
            min_d[static_cast<std::size_t>(i)] = std::min(min_d[static_cast<std::size_t>(i)], unit_distance(unit, i, centroids, c));
    }

    Clustering<Scalar> result;
    result.k = k;
    result.assignments.assign(static_cast<std::size_t>(n), -1);
    assign(unit, centroids, result.assignments, false);
    result.objective_history.push_back(objective(unit, centroids, result.assignments));

    for (int it = 1; it <= max_iterations; ++it) {
        result.iterations = it;
        repair_empty(unit, centroids, result.assignments, k);
        update_centroids(unit, centroids, result.assignments);
        result.objective_history.push_back(objective(unit, centroids, result.assignments));
        const bool changed = assign(unit, centroids, result.assignments, true);
        result.objective_history.push_back(objective(unit, centroids, result.assignments));
        if (!changed && std::ranges::all_of(result.cluster_sizes(), [](int s) { return s > 0; }))
            break;
    }
    result.centroids = std::move(centroids);
    result.objective = result.objective_history.back();
    return result;
}

} // namespace detail

/// Lloyd iteration with farthest-point seeding; the best of `restarts` runs is kept.
/// Deterministic for a fixed seed.
template <typename Derived>
Clustering<typename Derived::Scalar> kmeans(const Eigen::MatrixBase<Derived>& points, int k, std::uint64_t seed,
                                            const KMeansOptions& options = {})
{
    using Scalar = typename Derived::Scalar;
    if (k < 2 || k > points.rows())
        throw InputError("kmeans: k=" + std::to_string(k) + " outside [2, " + std::to_string(points.rows()) + "]");
    const RowMatrix<Scalar> unit = normalize_rows(points);
    Clustering<Scalar> best;
    for (int r = 0; r < std::max(1, options.restarts); ++r) {
        auto run = detail::kmeans_once(unit, k, detail::splitmix64(seed * 31 + static_cast<std::uint64_t>(r)),
                                       options.max_iterations);
        if (r == 0 || run.objective < best.objective)
            best = std::move(run);
    }
    return best;
}

template <typename Scalar>
struct SilhouetteResult {
    std::vector<Scalar> scores;
    Scalar mean = Scalar(0);
};

/// Per-point (b - a) / max(a, b); points alone in their cluster score 0.
template <typename Derived>
SilhouetteResult<typename Derived::Scalar> silhouette(const Eigen::MatrixBase<Derived>& points,
                                                      const std::vector<int>& assignments, int k)
{
    using Scalar = typename Derived::Scalar;
    if (k < 2)
        throw InputError("silhouette: needs k >= 2");
    if (static_cast<Eigen::Index>(assignments.size()) != points.rows())
        throw InputError("silhouette: assignments do not cover every point");
    const auto dist = pairwise_cosine_distances(points);
    const Eigen::Index n = points.rows();

    std::vector<int> sizes(static_cast<std::size_t>(k), 0);
    for (int a : assignments) {
        if (a < 0 || a >= k)
            throw InputError("silhouette: cluster index out of range");
        ++sizes[static_cast<std::size_t>(a)];
    }
    if (std::count_if(sizes.begin(), sizes.end(), [](int s) { return s > 0; }) < 2)
        throw InputError("silhouette: needs at least two non-empty clusters");

    SilhouetteResult<Scalar> out;
    out.scores.resize(static_cast<std::size_t>(n));
    std::vector<Scalar> sum_to(static_cast<std::size_t>(k));
    for (Eigen::Index i = 0; i < n; ++i) {
        const int own = assignments[static_cast<std::size_t>(i)];
        if (sizes[static_cast<std::size_t>(own)] == 1) {
            out.scores[static_cast<std::size_t>(i)] = Scalar(0);
            continue;
        }
        std::fill(sum_to.begin(), sum_to.end(), Scalar(0));
        for (Eigen::Index j = 0; j < n; ++j)
            if (j != i)
                sum_to[static_cast<std::size_t>(assignments[static_cast<std::size_t>(j)])] += dist(i, j);
        const Scalar a = sum_to[static_cast<std::size_t>(own)] / Scalar(sizes[static_cast<std::size_t>(own)] - 1);
        Scalar b = std::numeric_limits<Scalar>::infinity();
        for (int c = 0; c < k; ++c)
            if (c != own && sizes[static_cast<std::size_t>(c)] > 0)
                b = std::min(b, sum_to[static_cast<std::size_t>(c)] / Scalar(sizes[static_cast<std::size_t>(c)]));
        const Scalar denom = std::max(a, b);
        out.scores[static_cast<std::size_t>(i)] = denom > Scalar(0) ? (b - a) / denom : Scalar(0);
    }
    out.mean = std::accumulate(out.scores.begin(), out.scores.end(), Scalar(0)) / Scalar(n);
    return out;
}

template <typename Scalar>
struct SelectKResult {
    int best_k = 0;
    Clustering<Scalar> clustering;
    std::vector<std::pair<int, Scalar>> scores; // (k, mean silhouette), ascending k
};

/// Runs kmeans + silhouette for every k in [k_min, k_max]; the highest mean
/// silhouette wins, ties going to the smaller k.
template <typename Derived>
SelectKResult<typename Derived::Scalar> select_k(const Eigen::MatrixBase<Derived>& points, int k_min, int k_max,
                                                 std::uint64_t seed, const KMeansOptions& options = {})
{
    using Scalar = typename Derived::Scalar;
    if (k_min < 2 || k_min > k_max || k_max > points.rows())
        throw InputError("select_k: range [" + std::to_string(k_min) + ", " + std::to_string(k_max)
                         + "] invalid for " + std::to_string(points.rows()) + " points");
    const RowMatrix<Scalar> data = points;

    std::vector<std::future<Clustering<Scalar>>> jobs;
    for (int k = k_min; k <= k_max; ++k)
        jobs.push_back(std::async(std::launch::async, [&data, k, seed, &options] {
            auto c = kmeans(data, k, seed, options);
            c.mean_silhouette = silhouette(data, c.assignments, k).mean;
            return c;
        }));

    SelectKResult<Scalar> out;
    for (auto& job : jobs) {
        auto c = job.get();
        out.scores.emplace_back(c.k, c.mean_silhouette);
        if (out.best_k == 0 || c.mean_silhouette > out.clustering.mean_silhouette) {
            out.best_k = c.k;
            out.clustering = std::move(c);
        }
    }
    return out;
}

} // namespace adxprobe
