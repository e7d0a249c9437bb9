#include "wkbtd/berry.hpp"

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace wkbtd {

using cd = std::complex<double>;

StateLoop::StateLoop(std::vector<Eigen::VectorXcd> states) : states_(std::move(states)) {
  if (states_.size() < 2) throw ShapeError("a state loop needs at least two states");
  const Eigen::Index dim = states_.front().size();
  if (dim == 0) throw ShapeError("states must have at least one component");
  for (std::size_t j = 0; j < states_.size(); ++j) {
    if (states_[j].size() != dim) {
      std::ostringstream os;
      os << "state " << j << " has dimension " << states_[j].size() << ", expected " << dim;
      throw ShapeError(os.str());
    }
    const double norm = states_[j].norm();
    if (!std::isfinite(norm) || std::abs(norm - 1.0) > kNormTolerance) {
      std::ostringstream os;
      os << "state " << j << " has norm " << norm << "; states must be normalized to 1e-12";
      throw NumericError(os.str());
    }
  }
  for (Eigen::Index j = 0; j < size(); ++j) {
    const double o = std::abs(overlap(j));
    if (!(o > kMinOverlap)) {
      std::ostringstream os;
      os << "|<n_" << j << "|n_" << (j + 1) % size() << ">| = " << o
         << " <= " << kMinOverlap << "; sample the loop more densely";
      throw UndersamplingError(os.str());
    }
  }
}

cd StateLoop::overlap(Eigen::Index j) const {
  return states_[j].dot(states_[(j + 1) % size()]);
}

double StateLoop::min_overlap() const {
  double m = std::abs(overlap(0));
  for (Eigen::Index j = 1; j < size(); ++j) m = std::min(m, std::abs(overlap(j)));
  return m;
}

StateLoop StateLoop::reversed() const {
  return StateLoop(std::vector<Eigen::VectorXcd>(states_.rbegin(), states_.rend()));
}

double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  double r = std::remainder(a, 2.0 * pi);
  if (r <= -pi) r += 2.0 * pi;
  return r + 0.0;  // no negative zero
}

double discrete_berry_phase(const StateLoop& loop) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < loop.size(); ++j) sum += std::arg(loop.overlap(j));
  return wrap_angle(-sum);
}

StateLoop sample_two_level_loop(double theta, int count) {
  constexpr double pi = std::numbers::pi;
  std::vector<std::string> problems;
  if (count < 8) problems.emplace_back("loop sample count K must be >= 8");
  if (!(theta > 0.0 && theta < pi)) problems.emplace_back("polar angle must lie in (0, pi)");
  if (!problems.empty()) throw ConfigError(std::move(problems));

  std::vector<Eigen::VectorXcd> states;
  states.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    const double phi = 2.0 * pi * j / count;
    const double vx = std::sin(theta) * std::cos(phi);
    const double vy = std::sin(theta) * std::sin(phi);
    const double vz = std::cos(theta);
    Eigen::Matrix2cd h;
    h << vz, cd(vx, -vy), cd(vx, vy), -vz;
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h);
    Eigen::VectorXcd n = es.eigenvectors().col(0);
    // first component real and positive; smooth on the loop for 0 < theta < pi
    n *= std::polar(1.0, -std::arg(n(0)));
    n(0) = std::abs(n(0));
    n.normalize();
    states.push_back(std::move(n));
  }
  return StateLoop(std::move(states));
}

namespace {

StateLoop load_json(std::istream& in) {
  const auto doc = nlohmann::json::parse(in);
  if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array())
    throw ConfigError({"loop JSON needs an array member \"states\""});
  std::vector<Eigen::VectorXcd> states;
  for (const auto& s : doc["states"]) {
    if (!s.is_array()) throw ConfigError({"each state must be an array of [re, im] pairs"});
    Eigen::VectorXcd v(static_cast<Eigen::Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
      const auto& c = s[i];
      if (!c.is_array() || c.size() != 2 || !c[0].is_number() || !c[1].is_number())
        throw ConfigError({"each component must be a [re, im] pair of numbers"});
      v(static_cast<Eigen::Index>(i)) = cd(c[0].get<double>(), c[1].get<double>());
    }
    states.push_back(std::move(v));
  }
  return StateLoop(std::move(states));
}

StateLoop load_csv(std::istream& in) {
  std::vector<Eigen::VectorXcd> states;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> nums;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        nums.push_back(std::stod(cell, &used));
      } catch (const std::exception&) {
        numeric = false;
        break;
      }
    }
    if (!numeric) {
      if (states.empty()) continue;  // header
      throw ConfigError({"loop CSV row " + std::to_string(row) + " is not numeric"});
    }
    if (nums.empty() || nums.size() % 2 != 0)
      throw ConfigError({"loop CSV row " + std::to_string(row) + " needs re, im pairs"});
    Eigen::VectorXcd v(static_cast<Eigen::Index>(nums.size() / 2));
    for (std::size_t i = 0; i < nums.size() / 2; ++i)
      v(static_cast<Eigen::Index>(i)) = cd(nums[2 * i], nums[2 * i + 1]);
    states.push_back(std::move(v));
  }
  return StateLoop(std::move(states));
}

}  // namespace

StateLoop load_state_loop(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"cannot open loop file " + path.string()});
  try {
    if (path.extension() == ".json") return load_json(in);
    return load_csv(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({path.string() + ": " + e.what()});
  }
}

}  // namespace wkbtd
