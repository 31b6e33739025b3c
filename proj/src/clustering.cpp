#include "techprox/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"
#include "techprox/numeric.hpp"
#include "techprox/util.hpp"

namespace techprox {

using nlohmann::json;

double l1_distance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw DataError("l1 distance needs equal lengths, got " + std::to_string(x.size()) +
                        " and " + std::to_string(y.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) total += std::abs(x[i] - y[i]);
    return total;
}

namespace {

/// Population z-normalization; zero-variance input becomes all zeros.
std::vector<double> znorm(const std::vector<double>& x) {
    const std::size_t m = x.size();
    const double mu = numeric::mean(x);
    double var = 0.0;
    for (double v : x) var += (v - mu) * (v - mu);
    var /= static_cast<double>(m);
    std::vector<double> z(m, 0.0);
    if (var < 1e-24) return z;
    const double sd = std::sqrt(var);
    for (std::size_t i = 0; i < m; ++i) z[i] = (x[i] - mu) / sd;
    return z;
}

double norm2(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}

/// Dot product of u circularly shifted by s against v.
double shifted_dot(const std::vector<double>& u, const std::vector<double>& v, std::size_t s) {
    const std::size_t m = u.size();
    double total = 0.0;
    for (std::size_t t = 0; t < m; ++t) total += u[(t + s) % m] * v[t];
    return total;
}

/// Max normalized cross-correlation over circular shifts of pre-normalized
/// inputs; either norm zero means zero similarity.
double max_ncc(const std::vector<double>& u, const std::vector<double>& v) {
    const double nu = norm2(u), nv = norm2(v);
    if (nu < 1e-150 || nv < 1e-150) return 0.0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s < u.size(); ++s) best = std::max(best, shifted_dot(u, v, s));
    return best / (nu * nv);
}

double shape_distance_z(const std::vector<double>& u, const std::vector<double>& v) {
    return 1.0 - max_ncc(u, v);
}

/// Best circular shift of u against a target (ties to the smallest shift);
/// a zero target aligns trivially at shift 0.
std::size_t best_shift(const std::vector<double>& u, const std::vector<double>& target) {
    if (norm2(target) < 1e-150 || norm2(u) < 1e-150) return 0;
    std::size_t best = 0;
    double best_dot = shifted_dot(u, target, 0);
    for (std::size_t s = 1; s < u.size(); ++s) {
        const double d = shifted_dot(u, target, s);
        if (d > best_dot) {
            best_dot = d;
            best = s;
        }
    }
    return best;
}

std::vector<double> circular_shift(const std::vector<double>& u, std::size_t s) {
    const std::size_t m = u.size();
    std::vector<double> out(m);
    for (std::size_t t = 0; t < m; ++t) out[t] = u[(t + s) % m];
    return out;
}

void validate_input(const std::vector<ClusterSeries>& series, int k) {
    if (series.empty()) throw ConfigError("clustering needs a non-empty series set");
    if (k < 1) throw ConfigError("cluster count must be at least 1");
    if (static_cast<std::size_t>(k) > series.size())
        throw ConfigError("cluster count " + std::to_string(k) + " exceeds the " +
                          std::to_string(series.size()) + " available series");
    for (const auto& s : series)
        if (s.values.size() != series.front().values.size())
            throw DataError("series " + s.id + " length differs from the rest");
}

/// k-means++-style seeding: first seed uniform, later seeds weighted by the
/// squared distance to the nearest seed so far.
std::vector<std::size_t> plus_plus_seeds(
    std::size_t n, int k, std::mt19937_64& eng,
    const std::function<double(std::size_t, std::size_t)>& point_distance) {
    std::vector<std::size_t> seeds;
    std::vector<char> taken(n, 0);
    std::size_t first = rng::pick_index(eng, n);
    seeds.push_back(first);
    taken[first] = 1;
    std::vector<double> nearest(n);
    for (std::size_t i = 0; i < n; ++i) nearest[i] = point_distance(i, first);
    while (static_cast<int>(seeds.size()) < k) {
        std::vector<double> weights(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (!taken[i]) weights[i] = nearest[i] * nearest[i];
        std::size_t pick = rng::pick_weighted(weights, eng);
        for (std::size_t step = 0; taken[pick] && step < n; ++step) pick = (pick + 1) % n;
        seeds.push_back(pick);
        taken[pick] = 1;
        for (std::size_t i = 0; i < n; ++i)
            nearest[i] = std::min(nearest[i], point_distance(i, pick));
    }
    return seeds;
}

/// Moves one member of a multi-member cluster (the farthest from its own
/// centroid) into each empty cluster, lowest empty id first.
void reseed_empty_clusters(std::vector<int>& labels, std::vector<double>& dist_own, int k) {
    std::vector<long> counts(k, 0);
    for (int c : labels) ++counts[c];
    for (int empty = 0; empty < k; ++empty) {
        if (counts[empty] > 0) continue;
        std::size_t pick = labels.size();
        double best = -1.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            if (counts[labels[i]] < 2) continue;
            if (dist_own[i] > best) {
                best = dist_own[i];
                pick = i;
            }
        }
        if (pick == labels.size()) continue;  // no donor; leave as-is
        --counts[labels[pick]];
        labels[pick] = empty;
        counts[empty] = 1;
        dist_own[pick] = 0.0;  // its next centroid collapses onto it
    }
}

std::map<std::string, int> label_map(const std::vector<ClusterSeries>& series,
                                     const std::vector<int>& labels) {
    std::map<std::string, int> out;
    for (std::size_t i = 0; i < series.size(); ++i) out[series[i].id] = labels[i];
    return out;
}

}  // namespace

double shape_distance(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size())
        throw DataError("shape distance needs equal lengths, got " + std::to_string(x.size()) +
                        " and " + std::to_string(y.size()));
    return shape_distance_z(znorm(x), znorm(y));
}

std::vector<double> distance_matrix_serial(const std::vector<std::vector<double>>& rows,
                                           const DistanceFn& distance) {
    const std::size_t n = rows.size();
    std::vector<double> out(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(rows[i], rows[j]);
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    return out;
}

std::vector<double> distance_matrix(const std::vector<std::vector<double>>& rows,
                                    const DistanceFn& distance, bool parallel) {
    const std::size_t n = rows.size();
    for (const auto& r : rows)
        if (r.size() != rows.front().size())
            throw DataError("distance matrix rows must share one length");
    std::vector<double> out(n * n, 0.0);
#pragma omp parallel for schedule(dynamic, 1) if (parallel)
    for (long i = 0; i < static_cast<long>(n); ++i)
        for (std::size_t j = static_cast<std::size_t>(i) + 1; j < n; ++j) {
            const double d = distance(rows[i], rows[j]);
            out[i * n + j] = d;
            out[j * n + i] = d;
        }
    return out;
}

const char* cluster_algorithm_name(ClusterAlgorithm algorithm) {
    switch (algorithm) {
        case ClusterAlgorithm::KMeansL1: return "kmeans-l1";
        case ClusterAlgorithm::KMedoids: return "kmedoids";
        case ClusterAlgorithm::KShape: return "kshape";
    }
    return "unknown";
}

ClusterAlgorithm cluster_algorithm_from_name(std::string_view name) {
    if (name == "kmeans-l1") return ClusterAlgorithm::KMeansL1;
    if (name == "kmedoids") return ClusterAlgorithm::KMedoids;
    if (name == "kshape") return ClusterAlgorithm::KShape;
    throw ConfigError("unknown clustering algorithm: " + std::string(name));
}

DistanceFn cluster_metric(ClusterAlgorithm algorithm) {
    if (algorithm == ClusterAlgorithm::KShape)
        return [](const std::vector<double>& a, const std::vector<double>& b) {
            return shape_distance(a, b);
        };
    return [](const std::vector<double>& a, const std::vector<double>& b) {
        return l1_distance(a, b);
    };
}

ClusterAssignment kmeans_l1(const std::vector<ClusterSeries>& series, int k, std::uint64_t seed,
                            int max_iters) {
    validate_input(series, k);
    const std::size_t n = series.size();
    const std::size_t m = series.front().values.size();

    ClusterAssignment out;
    out.k = k;
    out.seed = seed;
    std::mt19937_64 eng(fnv1a64_mix("kmeans-l1", seed));
    const auto seeds = plus_plus_seeds(n, k, eng, [&](std::size_t i, std::size_t j) {
        return l1_distance(series[i].values, series[j].values);
    });
    std::vector<std::vector<double>> centroids;
    for (std::size_t s : seeds) centroids.push_back(series[s].values);

    std::vector<int> labels(n, -1), prev(n, -2);
    std::vector<double> dist_own(n, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(n); ++i) {
            int best_c = 0;
            double best_d = l1_distance(series[i].values, centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = l1_distance(series[i].values, centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best_c = c;
                }
            }
            labels[i] = best_c;
            dist_own[i] = best_d;
        }
        reseed_empty_clusters(labels, dist_own, k);

        std::vector<std::vector<std::size_t>> members(k);
        for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);
        for (int c = 0; c < k; ++c) {
            if (members[c].empty()) continue;  //k donors were unavailable
            for (std::size_t col = 0; col < m; ++col) {
                std::vector<double> column;
                column.reserve(members[c].size());
                for (std::size_t i : members[c]) column.push_back(series[i].values[col]);
                centroids[c][col] = numeric::median(std::move(column));
            }
        }

        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            cost += l1_distance(series[i].values, centroids[labels[i]]);
        out.cost_log.push_back(cost);
        ++out.iterations;
        if (labels == prev) break;
        prev = labels;
    }
    out.labels = label_map(series, labels);
    out.centroids = std::move(centroids);
    return out;
}

ClusterAssignment kmedoids(const std::vector<ClusterSeries>& series, int k, std::uint64_t seed,
                           int max_iters) {
    validate_input(series, k);
    const std::size_t n = series.size();
    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    for (const auto& s : series) rows.push_back(s.values);
    const std::vector<double> d = distance_matrix(rows, [](const auto& a, const auto& b) {
        return l1_distance(a, b);
    });

    ClusterAssignment out;
    out.k = k;
    out.seed = seed;
    std::mt19937_64 eng(fnv1a64_mix("kmedoids", seed));
    std::vector<std::size_t> medoids = plus_plus_seeds(
        n, k, eng, [&](std::size_t i, std::size_t j) { return d[i * n + j]; });

    const auto total_cost = [&](const std::vector<std::size_t>& meds) {
        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t mi : meds) best = std::min(best, d[i * n + mi]);
            cost += best;
        }
        return cost;
    };

    double cost = total_cost(medoids);
    out.cost_log.push_back(cost);
    std::vector<char> is_medoid(n, 0);
    for (std::size_t mi : medoids) is_medoid[mi] = 1;

    for (int round = 0; round < max_iters; ++round) {
        double best_cost = cost;
        int best_slot = -1;
        std::size_t best_h = 0;
        for (int slot = 0; slot < k; ++slot) {
            std::vector<std::size_t> trial = medoids;
            for (std::size_t h = 0; h < n; ++h) {
                if (is_medoid[h]) continue;
                trial[slot] = h;
                const double c = total_cost(trial);
                if (c < best_cost - 1e-12) {
                    best_cost = c;
                    best_slot = slot;
                    best_h = h;
                }
            }
        }
        if (best_slot < 0) break;
        is_medoid[medoids[best_slot]] = 0;
        medoids[best_slot] = best_h;
        is_medoid[best_h] = 1;
        cost = best_cost;
        out.cost_log.push_back(cost);
        ++out.iterations;
    }

    std::vector<int> labels(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        int best_c = 0;
        double best_d = d[i * n + medoids[0]];
        for (int c = 1; c < k; ++c) {
            const double dist = d[i * n + medoids[c]];
            if (dist < best_d) {
                best_d = dist;
                best_c = c;
            }
        }
        labels[i] = best_c;
    }
    out.labels = label_map(series, labels);
    for (std::size_t mi : medoids) out.centroids.push_back(series[mi].values);
    return out;
}

ClusterAssignment kshape(const std::vector<ClusterSeries>& series, int k, std::uint64_t seed,
                         int max_iters) {
    validate_input(series, k);
    const std::size_t n = series.size();
    const std::size_t m = series.front().values.size();

    ClusterAssignment out;
    out.k = k;
    out.seed = seed;
    std::vector<std::vector<double>> z;
    z.reserve(n);
    for (const auto& s : series) {
        z.push_back(znorm(s.values));
        if (norm2(z.back()) < 1e-150) ++out.degenerate_series;
    }

    std::mt19937_64 eng(fnv1a64_mix("kshape", seed));
    const auto seeds = plus_plus_seeds(n, k, eng, [&](std::size_t i, std::size_t j) {
        return shape_distance_z(z[i], z[j]);
    });
    std::vector<std::vector<double>> centroids;
    for (std::size_t s : seeds) centroids.push_back(z[s]);

    std::vector<int> labels(n, -1), prev(n, -2);
    std::vector<double> dist_own(n, 0.0);
    for (int iter = 0; iter < max_iters; ++iter) {
#pragma omp parallel for schedule(static)
        for (long i = 0; i < static_cast<long>(n); ++i) {
            int best_c = 0;
            double best_d = shape_distance_z(z[i], centroids[0]);
            for (int c = 1; c < k; ++c) {
                const double d = shape_distance_z(z[i], centroids[c]);
                if (d < best_d) {
                    best_d = d;
                    best_c = c;
                }
            }
            labels[i] = best_c;
            dist_own[i] = best_d;
        }
        reseed_empty_clusters(labels, dist_own, k);

        // Shape extraction: leading eigenvector of the centered alignment
        // scatter matrix, signed toward the cluster mean.
        std::vector<std::vector<std::size_t>> members(k);
        for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);
        for (int c = 0; c < k; ++c) {
            if (members[c].empty()) continue;
            std::vector<std::vector<double>> aligned;
            aligned.reserve(members[c].size());
            for (std::size_t i : members[c])
                aligned.push_back(circular_shift(z[i], best_shift(z[i], centroids[c])));

            std::vector<double> scatter(m * m, 0.0);
            for (const auto& a : aligned)
                for (std::size_t p = 0; p < m; ++p)
                    for (std::size_t q = p; q < m; ++q) {
                        scatter[p * m + q] += a[p] * a[q];
                        if (q != p) scatter[q * m + p] = scatter[p * m + q];
                    }
            // Double-center: P = Q S Q with Q = I - (1/m) 1 1^T.
            std::vector<double> row_mean(m, 0.0);
            double grand = 0.0;
            for (std::size_t p = 0; p < m; ++p) {
                for (std::size_t q = 0; q < m; ++q) row_mean[p] += scatter[p * m + q];
                row_mean[p] /= static_cast<double>(m);
                grand += row_mean[p];
            }
            grand /= static_cast<double>(m);
            for (std::size_t p = 0; p < m; ++p)
                for (std::size_t q = 0; q < m; ++q)
                    scatter[p * m + q] += grand - row_mean[p] - row_mean[q];

            std::vector<double> shape = centroids[c];
            numeric::power_iteration(scatter, m, shape);
            std::vector<double> cluster_mean(m, 0.0);
            for (const auto& a : aligned)
                for (std::size_t p = 0; p < m; ++p) cluster_mean[p] += a[p];
            double orient = 0.0;
            for (std::size_t p = 0; p < m; ++p) orient += shape[p] * cluster_mean[p];
            if (orient < 0.0)
                for (auto& v : shape) v = -v;
            centroids[c] = znorm(shape);
        }

        double cost = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            cost += shape_distance_z(z[i], centroids[labels[i]]);
        out.cost_log.push_back(cost);
        ++out.iterations;
        if (labels == prev) break;
        prev = labels;
    }
    out.labels = label_map(series, labels);
    out.centroids = std::move(centroids);
    return out;
}

ClusterAssignment run_clustering(ClusterAlgorithm algorithm,
                                 const std::vector<ClusterSeries>& series, int k,
                                 std::uint64_t seed, int max_iters) {
    switch (algorithm) {
        case ClusterAlgorithm::KMeansL1: return kmeans_l1(series, k, seed, max_iters);
        case ClusterAlgorithm::KMedoids: return kmedoids(series, k, seed, max_iters);
        case ClusterAlgorithm::KShape: return kshape(series, k, seed, max_iters);
    }
    throw ConfigError("unknown clustering algorithm");
}

ClusterAssignment assign_to_centroids(const std::vector<ClusterSeries>& series,
                                      const std::vector<std::vector<double>>& centroids,
                                      ClusterAlgorithm algorithm) {
    if (centroids.empty()) throw ConfigError("assignment needs at least one centroid");
    const DistanceFn metric = cluster_metric(algorithm);
    ClusterAssignment out;
    out.k = static_cast<int>(centroids.size());
    out.centroids = centroids;
    std::vector<int> labels(series.size(), 0);
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(series.size()); ++i) {
        int best_c = 0;
        double best_d = metric(series[i].values, centroids[0]);
        for (std::size_t c = 1; c < centroids.size(); ++c) {
            const double d = metric(series[i].values, centroids[c]);
            if (d < best_d) {
                best_d = d;
                best_c = static_cast<int>(c);
            }
        }
        labels[i] = best_c;
    }
    out.labels = label_map(series, labels);
    if (algorithm == ClusterAlgorithm::KShape)
        for (const auto& s : series)
            if (norm2(znorm(s.values)) < 1e-150) ++out.degenerate_series;
    return out;
}

SilhouetteReport silhouette(const std::vector<ClusterSeries>& series,
                            const std::vector<int>& labels, const DistanceFn& distance) {
    const std::size_t n = series.size();
    if (labels.size() != n) throw DataError("labels must parallel the series set");
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(i);
    if (members.size() < 2)
        throw DataError("silhouette is undefined for fewer than two clusters");

    std::vector<std::vector<double>> rows;
    rows.reserve(n);
    for (const auto& s : series) rows.push_back(s.values);
    const std::vector<double> d = distance_matrix(rows, distance);

    SilhouetteReport report;
    report.per_sample.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& own = members[labels[i]];
        if (own.size() < 2) continue;  // singleton scores 0
        double a = 0.0;
        for (std::size_t j : own)
            if (j != i) a += d[i * n + j];
        a /= static_cast<double>(own.size() - 1);
        double b = std::numeric_limits<double>::infinity();
        for (const auto& [cluster, other] : members) {
            if (cluster == labels[i]) continue;
            double total = 0.0;
            for (std::size_t j : other) total += d[i * n + j];
            b = std::min(b, total / static_cast<double>(other.size()));
        }
        const double denom = std::max(a, b);
        report.per_sample[i] = denom == 0.0 ? 0.0 : (b - a) / denom;
    }
    for (const auto& [cluster, own] : members) {
        double total = 0.0;
        for (std::size_t i : own) total += report.per_sample[i];
        report.per_cluster_mean[cluster] = total / static_cast<double>(own.size());
    }
    report.global_mean = numeric::mean(report.per_sample);
    return report;
}

CentroidLayout centroid_layout(const ClusterAssignment& assignment, const DistanceFn& distance) {
    const std::size_t k = assignment.centroids.size();
    if (k < 2) throw DataError("centroid layout needs at least two centroids");
    const DistanceFn metric =
        distance ? distance : DistanceFn([](const auto& a, const auto& b) {
            return l1_distance(a, b);
        });

    // Classical MDS: double-center the squared distances, eigendecompose.
    std::vector<double> sq(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j) {
            const double d = metric(assignment.centroids[i], assignment.centroids[j]);
            sq[i * k + j] = d * d;
            sq[j * k + i] = d * d;
        }
    std::vector<double> row_mean(k, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) row_mean[i] += sq[i * k + j];
        row_mean[i] /= static_cast<double>(k);
        grand += row_mean[i];
    }
    grand /= static_cast<double>(k);
    std::vector<double> b(k * k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            b[i * k + j] = -0.5 * (sq[i * k + j] - row_mean[i] - row_mean[j] + grand);

    std::vector<double> values, vectors;
    numeric::jacobi_eigen_symmetric(std::move(b), k, values, vectors);

    CentroidLayout layout;
    const double tol = std::max(values[0], 0.0) * 1e-12 + 1e-300;
    const bool has_x = values[0] > tol;
    const bool has_y = k > 1 && values[1] > tol;
    layout.rank_deficient = !has_x || !has_y;

    std::map<int, long> sizes;
    for (const auto& [id, label] : assignment.labels) ++sizes[label];
    for (std::size_t c = 0; c < k; ++c) {
        CentroidPoint p;
        p.cluster = static_cast<int>(c);
        p.x = has_x ? std::sqrt(values[0]) * vectors[c * k + 0] : 0.0;
        p.y = has_y ? std::sqrt(values[1]) * vectors[c * k + 1] : 0.0;
        auto it = sizes.find(static_cast<int>(c));
        p.size = it == sizes.end() ? 0 : it->second;
        layout.points.push_back(p);
    }
    return layout;
}

std::vector<KSweepEntry> silhouette_sweep(const std::vector<ClusterSeries>& series,
                                          ClusterAlgorithm algorithm, int k_lo, int k_hi,
                                          std::uint64_t seed, int max_iters) {
    std::vector<KSweepEntry> entries;
    const int lo = std::max(2, k_lo);
    const int hi = std::min<int>(k_hi, static_cast<int>(series.size()));
    for (int k = lo; k <= hi; ++k) {
        const ClusterAssignment assignment = run_clustering(algorithm, series, k, seed, max_iters);
        std::vector<int> labels;
        labels.reserve(series.size());
        for (const auto& s : series) labels.push_back(assignment.labels.at(s.id));
        try {
            const SilhouetteReport report =
                silhouette(series, labels, cluster_metric(algorithm));
            entries.push_back({k, report.global_mean});
        } catch (const DataError&) {
            // degenerate labeling (all one cluster); skip this k
        }
    }
    return entries;
}

void save_assignment_csv(const std::filesystem::path& path, const ClusterAssignment& assignment) {
    std::string out = "series_id,cluster\n";
    for (const auto& [id, label] : assignment.labels)
        out += id + "," + std::to_string(label) + "\n";
    atomic_write_file(path, out);
}

ClusterAssignment load_assignment_csv(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    ClusterAssignment assignment;
    std::string line;
    long line_number = 0;
    int max_label = -1;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line_number == 1) continue;  // header
        const std::vector<std::string> cols = split(line, ',');
        if (cols.size() != 2)
            throw DataError("assignment line " + std::to_string(line_number) +
                            ": expected series_id,cluster");
        const int label = static_cast<int>(parse_long(cols[1], "cluster label"));
        assignment.labels[cols[0]] = label;
        max_label = std::max(max_label, label);
    }
    assignment.k = max_label + 1;
    return assignment;
}

void save_silhouette_json(const std::filesystem::path& path, const SilhouetteReport& report) {
    json j;
    j["global_mean"] = report.global_mean;
    json per_cluster = json::object();
    for (const auto& [cluster, mean] : report.per_cluster_mean)
        per_cluster[std::to_string(cluster)] = mean;
    j["per_cluster_mean"] = per_cluster;
    j["per_sample"] = report.per_sample;
    atomic_write_file(path, j.dump(2) + "\n");
}

void save_layout_csv(const std::filesystem::path& path, const CentroidLayout& layout) {
    std::string out = "cluster,x,y,size\n";
    for (const auto& p : layout.points)
        out += std::to_string(p.cluster) + "," + fmt_double(p.x) + "," + fmt_double(p.y) + "," +
               std::to_string(p.size) + "\n";
    atomic_write_file(path, out);
}

}  // namespace techprox
