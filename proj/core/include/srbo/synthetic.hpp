#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "srbo/data.hpp"

namespace srbo::synthetic {

/// The six two-dimensional artificial sets used for sanity experiments.
enum class Kind { gauss1, gauss2, gauss5, circle, xorish, spiral };

Kind parse_kind(const std::string& name);
std::string to_string(Kind kind);
std::vector<Kind> all_kinds();

/**
 * Balanced binary set with `per_class` samples in each class.
 *
 * gaussN : +1 ~ N((N,N), I), -1 ~ N((-N,-N), I)
 * circle : +1 uniform in the unit disk, -1 in the ring 1.2 <= r <= 2
 * xorish : four N(c, 0.5^2 I) blobs at (+-1,+-1), label = sign(x1 * x2)
 * spiral : two interleaved Archimedean spirals with N(0, 0.1^2) jitter
 */
Dataset generate(Kind kind, std::size_t per_class, std::uint64_t seed);

/// Gaussian pair with explicit centers; labels +1 for `mu_pos`.
Dataset gaussian_pair(double mu_pos, double mu_neg, std::size_t n_pos, std::size_t n_neg,
                      std::uint64_t seed);

/**
 * Anomaly-detection variant: `n_normal` normal points (+1) and
 * round(anomaly_fraction * n_normal) anomalies (-1). For the Gaussian kinds
 * the normal class is N((0.5,0.5), I) and the anomalies are centered at
 * `anomaly_mu`; the other kinds reuse the binary generator's classes.
 */
Dataset generate_anomaly(Kind kind, std::size_t n_normal, double anomaly_fraction,
                         std::uint64_t seed, double anomaly_mu = -1.0);

}  // namespace srbo::synthetic
