#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace techprox {

using DistanceFn = std::function<double(const std::vector<double>&, const std::vector<double>&)>;

/// Sum of absolute coordinate differences. Throws on length mismatch.
double l1_distance(const std::vector<double>& x, const std::vector<double>& y);

/// 1 - (maximal normalized cross-correlation over circular shifts), computed
/// on z-normalized copies; a zero-variance input has zero similarity to
/// everything (distance 1).
double shape_distance(const std::vector<double>& x, const std::vector<double>& y);

/// Full n x n distance matrix (row-major). The serial variant is the
/// reference implementation the parallel kernel is checked against.
std::vector<double> distance_matrix_serial(const std::vector<std::vector<double>>& rows,
                                           const DistanceFn& distance);
std::vector<double> distance_matrix(const std::vector<std::vector<double>>& rows,
                                    const DistanceFn& distance, bool parallel = true);

/// One clusterable series: processed values under a stable id.
struct ClusterSeries {
    std::string id;
    std::vector<double> values;
};

struct ClusterAssignment {
    int k = 0;
    std::map<std::string, int> labels;          // series id -> cluster id
    std::vector<std::vector<double>> centroids; // one per cluster, series length
    int iterations = 0;
    std::uint64_t seed = 0;
    std::vector<double> cost_log;   // total cost after each iteration/swap
    long degenerate_series = 0;     // zero-variance inputs (shape convention)
};

enum class ClusterAlgorithm { KMeansL1, KMedoids, KShape };
const char* cluster_algorithm_name(ClusterAlgorithm algorithm);  // "kmeans-l1", ...
ClusterAlgorithm cluster_algorithm_from_name(std::string_view name);

/// Natural metric of each algorithm: l1 for the first two, shape distance
/// for kshape. Silhouettes and layouts should score with this.
DistanceFn cluster_metric(ClusterAlgorithm algorithm);

/// Lloyd-style iteration under l1: k-means++-style seeding, nearest-centroid
/// assignment (ties to the lowest cluster id), elementwise-median updates,
/// empty clusters re-seeded from the farthest member. Stops on a label
/// fixpoint or after max_iters rounds. cost_log is non-increasing.
ClusterAssignment kmeans_l1(const std::vector<ClusterSeries>& series, int k, std::uint64_t seed,
                            int max_iters = 100);

/// PAM: medoids are member series; steepest-descent swaps until no swap
/// improves the total l1 cost. cost_log (initial + per swap) is non-increasing.
ClusterAssignment kmedoids(const std::vector<ClusterSeries>& series, int k, std::uint64_t seed,
                           int max_iters = 100);

/// Shape-based clustering: shift-invariant NCC distance on z-normalized
/// series; centroids extracted as the leading eigenvector of the centered
/// within-cluster alignment matrix, sign-matched to the cluster mean.
ClusterAssignment kshape(const std::vector<ClusterSeries>& series, int k, std::uint64_t seed,
                         int max_iters = 100);

ClusterAssignment run_clustering(ClusterAlgorithm algorithm,
                                 const std::vector<ClusterSeries>& series, int k,
                                 std::uint64_t seed, int max_iters = 100);

/// Nearest-centroid labeling against externally trained centroids, under the
/// algorithm's natural metric (external-corpus training mode).
ClusterAssignment assign_to_centroids(const std::vector<ClusterSeries>& series,
                                      const std::vector<std::vector<double>>& centroids,
                                      ClusterAlgorithm algorithm);

struct SilhouetteReport {
    std::vector<double> per_sample;          // s_i = (b-a)/max(a,b), in [-1,1]
    std::map<int, double> per_cluster_mean;
    double global_mean = 0.0;
};

/// Silhouettes for a labeling (labels parallel to series). Singletons score
/// 0 by convention, as does a sample with max(a,b) = 0. Fewer than two
/// distinct clusters is an error.
SilhouetteReport silhouette(const std::vector<ClusterSeries>& series,
                            const std::vector<int>& labels, const DistanceFn& distance);

struct CentroidPoint {
    int cluster = 0;
    double x = 0.0;
    double y = 0.0;
    long size = 0;
};

struct CentroidLayout {
    std::vector<CentroidPoint> points;
    bool rank_deficient = false;  // second MDS coordinate zeroed
};

/// Classical MDS of the centroid distance matrix into 2D (distance defaults
/// to l1). Sizes are member counts. Needs at least two centroids.
CentroidLayout centroid_layout(const ClusterAssignment& assignment,
                               const DistanceFn& distance = {});

struct KSweepEntry {
    int k = 0;
    double silhouette_mean = 0.0;
};

/// Runs the algorithm for each k in [k_lo, k_hi] (clamped to [2, n]) and
/// reports the global mean silhouette under the algorithm's own metric.
std::vector<KSweepEntry> silhouette_sweep(const std::vector<ClusterSeries>& series,
                                          ClusterAlgorithm algorithm, int k_lo, int k_hi,
                                          std::uint64_t seed, int max_iters = 100);

void save_assignment_csv(const std::filesystem::path& path, const ClusterAssignment& assignment);
ClusterAssignment load_assignment_csv(const std::filesystem::path& path);
void save_silhouette_json(const std::filesystem::path& path, const SilhouetteReport& report);
void save_layout_csv(const std::filesystem::path& path, const CentroidLayout& layout);

}  // namespace techprox
