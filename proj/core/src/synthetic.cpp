#include "srbo/synthetic.hpp"

#include <cmath>
#include <numbers>

#include "srbo/error.hpp"

namespace srbo::synthetic {

namespace {

// Box-Muller on top of splitmix64 so the streams are reproducible across
// standard library implementations.
class Normal {
 public:
  explicit Normal(std::uint64_t seed) : rng_(seed) {}
  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = rng_.uniform();
    while (u1 <= 0.0) u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }
  double uniform() { return rng_.uniform(); }

 private:
  SplitMix64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

struct Builder {
  std::vector<double> features;
  std::vector<int> labels;
  void add(double x1, double x2, int y) {
    features.push_back(x1);
    features.push_back(x2);
    labels.push_back(y);
  }
  Dataset build() && {
    const auto n = labels.size();
    return Dataset(n, 2, std::move(features), std::move(labels));
  }
};

void add_class(Builder& b, Kind kind, int y, std::size_t count, Normal& rnd) {
  for (std::size_t i = 0; i < count; ++i) {
    switch (kind) {
      case Kind::gauss1:
      case Kind::gauss2:
      case Kind::gauss5: {
        const double mu = (kind == Kind::gauss1 ? 1.0 : kind == Kind::gauss2 ? 2.0 : 5.0) * y;
        const double x1 = mu + rnd();
        b.add(x1, mu + rnd(), y);
        break;
      }
      case Kind::circle: {
        const double angle = 2.0 * std::numbers::pi * rnd.uniform();
        const double r = y > 0 ? std::sqrt(rnd.uniform()) : 1.2 + 0.8 * rnd.uniform();
        b.add(r * std::cos(angle), r * std::sin(angle), y);
        break;
      }
      case Kind::xorish: {
        // Half of each class in each of its two quadrants.
        const double sx = (i % 2 == 0) ? 1.0 : -1.0;
        const double sy = sx * y;
        const double x1 = sx + 0.5 * rnd();
        b.add(x1, sy + 0.5 * rnd(), y);
        break;
      }
      case Kind::spiral: {
        const double t = 0.5 + 2.5 * std::numbers::pi * rnd.uniform();
        const double phase = y > 0 ? 0.0 : std::numbers::pi;
        const double r = t / (2.5 * std::numbers::pi) * 2.0;
        const double x1 = r * std::cos(t + phase) + 0.1 * rnd();
        b.add(x1, r * std::sin(t + phase) + 0.1 * rnd(), y);
        break;
      }
    }
  }
}

}  // namespace

Kind parse_kind(const std::string& name) {
  if (name == "gauss1") return Kind::gauss1;
  if (name == "gauss2") return Kind::gauss2;
  if (name == "gauss5") return Kind::gauss5;
  if (name == "circle") return Kind::circle;
  if (name == "xor") return Kind::xorish;
  if (name == "spiral") return Kind::spiral;
  throw ConfigError("unknown synthetic set '" + name +
                    "' (expected gauss1, gauss2, gauss5, circle, xor, spiral)");
}

std::string to_string(Kind kind) {
  switch (kind) {
    case Kind::gauss1: return "gauss1";
    case Kind::gauss2: return "gauss2";
    case Kind::gauss5: return "gauss5";
    case Kind::circle: return "circle";
    case Kind::xorish: return "xor";
    case Kind::spiral: return "spiral";
  }
  return "?";
}

std::vector<Kind> all_kinds() {
  return {Kind::gauss1, Kind::gauss2, Kind::gauss5, Kind::circle, Kind::xorish, Kind::spiral};
}

Dataset generate(Kind kind, std::size_t per_class, std::uint64_t seed) {
  Normal rnd(seed);
  Builder b;
  add_class(b, kind, +1, per_class, rnd);
  add_class(b, kind, -1, per_class, rnd);
  return std::move(b).build();
}

Dataset gaussian_pair(double mu_pos, double mu_neg, std::size_t n_pos, std::size_t n_neg,
                      std::uint64_t seed) {
  Normal rnd(seed);
  Builder b;
  for (std::size_t i = 0; i < n_pos; ++i) {
    const double x1 = mu_pos + rnd();
    b.add(x1, mu_pos + rnd(), +1);
  }
  for (std::size_t i = 0; i < n_neg; ++i) {
    const double x1 = mu_neg + rnd();
    b.add(x1, mu_neg + rnd(), -1);
  }
  return std::move(b).build();
}

Dataset generate_anomaly(Kind kind, std::size_t n_normal, double anomaly_fraction,
                         std::uint64_t seed, double anomaly_mu) {
  if (anomaly_fraction < 0.0) throw InputError("anomaly fraction must be non-negative");
  const auto n_anomaly =
      static_cast<std::size_t>(std::llround(anomaly_fraction * static_cast<double>(n_normal)));
  switch (kind) {
    case Kind::gauss1:
    case Kind::gauss2:
    case Kind::gauss5:
      return gaussian_pair(0.5, anomaly_mu, n_normal, n_anomaly, seed);
    default: {
      Normal rnd(seed);
      Builder b;
      add_class(b, kind, +1, n_normal, rnd);
      add_class(b, kind, -1, n_anomaly, rnd);
      return std::move(b).build();
    }
  }
}

}  // namespace srbo::synthetic
