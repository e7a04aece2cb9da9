#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ots/network.hpp"

namespace ots {

// Seedable 64-bit generator; split(stream) derives an independent stream.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64";

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);
  Rng split(std::uint64_t stream) const { return Rng(seed_, stream); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1p-53; }
  std::uint64_t next() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

struct BoxBounds {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;
};

// Support {xi' : S xi' <= t} of the active uncertainty coordinates. The
// full wind deviation vector is xi = embed * xi' + offset; coordinates with
// zero-width support are held at their fixed value in `offset`.
class UncertaintyPolytope {
 public:
  // Checks that the set is nonempty and bounded, has an interior point,
  // contains mu, and that second_moment - mu mu' is PSD.
  static UncertaintyPolytope from_halfspaces(
      Eigen::MatrixXd S, Eigen::VectorXd t, Eigen::VectorXd mu,
      std::optional<Eigen::MatrixXd> second_moment = std::nullopt);

  const Eigen::MatrixXd& S() const { return S_; }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& mu() const { return mu_; }
  const std::optional<Eigen::MatrixXd>& second_moment() const {
    return second_moment_;
  }
  const std::optional<BoxBounds>& box() const { return box_; }

  int dim() const { return static_cast<int>(S_.cols()); }
  int num_rows() const { return static_cast<int>(S_.rows()); }
  int full_dim() const { return static_cast<int>(embed_.rows()); }
  const Eigen::MatrixXd& embed() const { return embed_; }
  const Eigen::VectorXd& offset() const { return offset_; }

  Eigen::VectorXd to_full(const Eigen::VectorXd& reduced) const;
  Eigen::VectorXd full_mean() const { return to_full(mu_); }
  // Whether a full-space vector lies in the support (within tol).
  bool contains(const Eigen::VectorXd& full, double tol = 1e-9) const;

 private:
  friend UncertaintyPolytope reduced_box_support(
      const Eigen::VectorXd&, const Eigen::VectorXd&,
      const std::optional<Eigen::VectorXd>&);

  Eigen::MatrixXd S_;
  Eigen::VectorXd t_;
  Eigen::VectorXd mu_;
  std::optional<Eigen::MatrixXd> second_moment_;
  std::optional<BoxBounds> box_;
  Eigen::MatrixXd embed_;
  Eigen::VectorXd offset_;
};

// Box [lo, hi] with S = [I; -I], t = [hi; -lo], mean defaulting to the
// center and uniform second moments. Throws EmptyBoxError unless lo < hi.
UncertaintyPolytope box_support(
    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
    const std::optional<Eigen::VectorXd>& mu = std::nullopt);

// Like box_support, but coordinates with lo == hi are projected out and
// fixed. Throws EmptyBoxError when some lo > hi.
UncertaintyPolytope reduced_box_support(
    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
    const std::optional<Eigen::VectorXd>& mu = std::nullopt);

// Box from the wind farms' xi_min/xi_max.
UncertaintyPolytope wind_support(const Grid& grid);

// Support box [-rho * nominal, rho * nominal] centered at zero.
UncertaintyPolytope proportional_wind_support(const Grid& grid, double rho);

// max a'xi' over the support by LP (a in active coordinates).
double support_max(const UncertaintyPolytope& poly, const Eigen::VectorXd& a);

// Independent uniform draws on the box, as full-space vectors.
// Throws UnsupportedSupportError for non-box supports.
std::vector<Eigen::VectorXd> sample(const UncertaintyPolytope& poly, int count,
                                    std::uint64_t seed);

// All 2^dim box corners as full-space vectors, lexicographic (lower value
// first, first coordinate most significant). Throws DimensionTooLargeError
// above 20 active coordinates.
std::vector<Eigen::VectorXd> vertices(const UncertaintyPolytope& poly);

// CSV with one scenario per row and one column per wind farm.
void write_scenarios_csv(const std::string& path,
                         const std::vector<Eigen::VectorXd>& scenarios);
std::vector<Eigen::VectorXd> read_scenarios_csv(const std::string& path);

}  // namespace ots
