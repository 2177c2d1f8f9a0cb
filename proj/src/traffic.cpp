#include "orbitnet/traffic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "orbitnet/errors.hpp"

namespace orbitnet::traffic {

std::string_view to_string(GravityStrategy s) {
  return s == GravityStrategy::linear ? "linear" : "exponential";
}

std::vector<double> gravity_vector(std::span<const double> populations, GravityStrategy strategy) {
  if (populations.size() < 2) throw ValidationError("gravity model needs at least 2 cities");
  for (std::size_t i = 0; i < populations.size(); ++i) {
    if (!(populations[i] > 0.0)) {
      throw ValidationError("population " + std::to_string(i) + " must be positive");
    }
  }
  std::vector<double> p(populations.begin(), populations.end());
  if (strategy == GravityStrategy::exponential) {
    const double peak = *std::max_element(p.begin(), p.end());
    for (double& v : p) v = std::exp(v / peak);
  }
  double sum = 0.0;
  for (double v : p) sum += v;
  for (double& v : p) v /= sum;
  return p;
}

TrafficMatrix traffic_matrix(std::span<const double> p_in, std::span<const double> p_out,
                             double total_volume, std::vector<std::string> cities) {
  if (p_in.size() != p_out.size()) {
    throw ValidationError("traffic_matrix: p_in has " + std::to_string(p_in.size()) +
                          " entries, p_out has " + std::to_string(p_out.size()));
  }
  if (!(total_volume > 0.0)) throw ValidationError("traffic_matrix: total_volume must be positive");
  auto check_sum = [](std::span<const double> p, const char* name) {
    double s = 0.0;
    for (double v : p) {
      if (v < 0.0) throw ValidationError(std::string("traffic_matrix: negative entry in ") + name);
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw ValidationError(std::string("traffic_matrix: ") + name + " does not sum to 1");
    }
  };
  check_sum(p_in, "p_in");
  check_sum(p_out, "p_out");
  const std::size_t k = p_in.size();
  if (cities.empty()) {
    for (std::size_t i = 0; i < k; ++i) cities.push_back(std::to_string(i));
  }
  if (cities.size() != k) throw ValidationError("traffic_matrix: city list length mismatch");

  TrafficMatrix m;
  m.cities = std::move(cities);
  m.total_volume = total_volume;
  m.rates.assign(k * k, 0.0);
  double off_diagonal = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      if (i == j) continue;
      m.rates[i * k + j] = p_in[i] * p_out[j] * total_volume;
      off_diagonal += m.rates[i * k + j];
    }
  }
  if (!(off_diagonal > 0.0)) throw ValidationError("traffic_matrix: no off-diagonal demand");
  const double scale = total_volume / off_diagonal;
  for (double& r : m.rates) r *= scale;
  return m;
}

std::optional<double> interarrival(const TrafficMatrix& m, std::size_t i, std::size_t j,
                                   double packet_size_bits) {
  if (i == j) throw ContractError("interarrival: source and destination city are the same");
  if (i >= m.size() || j >= m.size()) throw ContractError("interarrival: city index out of range");
  const double r = m.rate(i, j);
  if (r <= 0.0) return std::nullopt;
  return packet_size_bits / r;
}

double first_launch_offset(std::size_t i, std::size_t j, std::size_t k, double period) {
  return static_cast<double>(i * k + j) / static_cast<double>(k * k) * period;
}

void write_matrix_csv(std::ostream& out, const TrafficMatrix& m) {
  for (std::size_t j = 0; j < m.size(); ++j) out << (j ? "," : "") << m.cities[j];
  out << '\n';
  char buf[40];
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = 0; j < m.size(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", m.rate(i, j));
      out << (j ? "," : "") << buf;
    }
    out << '\n';
  }
}

}  // namespace orbitnet::traffic
