#pragma once

// Synthetic runs with a designed separability profile.
//
// Layer i draws x = c * (mu_i / 2) * u + eps with c = -1 for class 0 and +1
// for class 1, u a unit vector fixed by direction_seed, and eps isotropic
// N(0, sigma^2) from the substream seeded by noise_seed XOR i. The best
// achievable accuracy at layer i is Phi(mu_i / (2 sigma)).

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cdepth/reps_io.hpp"
#include "json.hpp"

namespace cdepth {

struct EmergenceProfile {
  std::size_t d = 2;
  std::size_t d_model = 16;
  std::size_t n = 2000;
  double sigma = 1.0;
  std::vector<double> mu;  // one separation per layer
  std::uint64_t direction_seed = 0;
  std::uint64_t noise_seed = 0;

  void validate() const;
};

EmergenceProfile profile_from_json(const nlohmann::json& j);
nlohmann::json profile_to_json(const EmergenceProfile& profile);

/// Step profile: mu = 0 for layers < step_layer, `height` from step_layer on.
EmergenceProfile step_profile(std::size_t d, std::size_t step_layer, double height,
                              std::size_t n, std::size_t d_model, double sigma);

double bayes_accuracy(double mu, double sigma);

/// Unit vector of length d_model drawn from direction_seed.
std::vector<double> class_direction(std::size_t d_model, std::uint64_t direction_seed);

/// Labels: the first n/2 samples are class 0, the rest class 1.
Run generate_run(const EmergenceProfile& profile);
void generate(const EmergenceProfile& profile, const std::filesystem::path& out_dir);

}  // namespace cdepth
