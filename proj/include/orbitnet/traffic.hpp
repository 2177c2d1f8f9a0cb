#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace orbitnet::traffic {

enum class GravityStrategy { linear, exponential };

std::string_view to_string(GravityStrategy s);

/// City-to-city demand, bit/s, row = source. Diagonal is zero and the
/// off-diagonal entries sum to total_volume.
struct TrafficMatrix {
  std::vector<std::string> cities;
  std::vector<double> rates;  // row-major k x k
  double total_volume = 0.0;

  std::size_t size() const { return cities.size(); }
  double rate(std::size_t i, std::size_t j) const { return rates[i * cities.size() + j]; }
};

/// Ingress/egress probability vector of the gravity model.
///
/// linear: population share. exponential: softmax of populations divided by
/// the largest one, so that e^x stays finite for real population counts.
std::vector<double> gravity_vector(std::span<const double> populations, GravityStrategy strategy);

/// Outer product p_in * p_out^T scaled to `total_volume`, with the diagonal
/// removed and the remaining mass rescaled back to `total_volume`.
TrafficMatrix traffic_matrix(std::span<const double> p_in, std::span<const double> p_out,
                             double total_volume, std::vector<std::string> cities = {});

/// Seconds between packets of the (i, j) flow; nullopt when the pair carries
/// no traffic.
std::optional<double> interarrival(const TrafficMatrix& m, std::size_t i, std::size_t j,
                                   double packet_size_bits);

/// Launch time of the first packet of flow (i, j): staggered by
/// (i*k + j) / k^2 of one period.
double first_launch_offset(std::size_t i, std::size_t j, std::size_t k, double period);

/// k rows of k comma-separated rates, bit/s, preceded by a header of city ids.
void write_matrix_csv(std::ostream& out, const TrafficMatrix& m);

}  // namespace orbitnet::traffic
