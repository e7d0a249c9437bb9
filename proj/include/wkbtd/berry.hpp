#pragma once

#include <Eigen/Core>

#include <filesystem>
#include <vector>

#include "wkbtd/errors.hpp"

namespace wkbtd {

/// Closed loop of normalized states |n_0>, ..., |n_{K-1}>, with |n_K> = |n_0>.
class StateLoop {
 public:
  static constexpr double kNormTolerance = 1e-12;
  static constexpr double kMinOverlap = 0.1;

  /// Throws ShapeError for ragged or empty input, NumericError for states
  /// that are not unit vectors, UndersamplingError when a consecutive
  /// overlap has modulus <= 0.1.
  explicit StateLoop(std::vector<Eigen::VectorXcd> states);

  Eigen::Index size() const { return static_cast<Eigen::Index>(states_.size()); }
  Eigen::Index dimension() const { return states_.front().size(); }
  const Eigen::VectorXcd& operator[](Eigen::Index j) const { return states_[j]; }
  const std::vector<Eigen::VectorXcd>& states() const { return states_; }

  /// <n_j | n_{j+1 mod K}>.
  std::complex<double> overlap(Eigen::Index j) const;
  double min_overlap() const;

  StateLoop reversed() const;

 private:
  std::vector<Eigen::VectorXcd> states_;
};

/// gamma = -Im sum_j log <n_j|n_{j+1}>, per-factor principal logs, reduced
/// to (-pi, pi].
double discrete_berry_phase(const StateLoop& loop);

/// Maps an angle to (-pi, pi].
double wrap_angle(double a);

/// Ground states of v . sigma for unit v on the circle of polar angle theta,
/// azimuth phi_j = 2 pi j / K, in a gauge smooth along the loop.
StateLoop sample_two_level_loop(double theta, int count);

/// Reads a loop from JSON ({"states": [[[re, im], ...], ...]}) or CSV (one
/// state per row: re_0, im_0, re_1, im_1, ...), chosen by file extension.
StateLoop load_state_loop(const std::filesystem::path& path);

}  // namespace wkbtd
