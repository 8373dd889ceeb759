#include "cdepth/synth.hpp"

#include <cmath>

#include "cdepth/canonical_json.hpp"
#include "cdepth/errors.hpp"
#include "cdepth/rng.hpp"

namespace cdepth {

void EmergenceProfile::validate() const {
  if (d < 2) throw ValidationError("profile needs d >= 2");
  if (d_model < 1) throw ValidationError("profile needs d_model >= 1");
  if (n < 2 || n % 2 != 0) throw ValidationError("profile needs an even n >= 2");
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw ValidationError("profile needs sigma > 0");
  if (mu.size() != d) {
    throw ValidationError("profile mu has " + std::to_string(mu.size()) + " entries, expected " +
                          std::to_string(d));
  }
  for (double m : mu) {
    if (!(m >= 0.0) || !std::isfinite(m)) throw ValidationError("profile mu entries must be >= 0");
  }
}

EmergenceProfile profile_from_json(const nlohmann::json& j) {
  EmergenceProfile p;
  try {
    p.d = j.at("d").get<std::size_t>();
    p.d_model = j.at("d_model").get<std::size_t>();
    p.n = j.at("n").get<std::size_t>();
    p.sigma = j.at("sigma").get<double>();
    p.mu = j.at("mu").get<std::vector<double>>();
    p.direction_seed = j.value("direction_seed", std::uint64_t{0});
    p.noise_seed = j.value("noise_seed", std::uint64_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("profile JSON: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json profile_to_json(const EmergenceProfile& p) {
  return {{"d", p.d},
          {"d_model", p.d_model},
          {"n", p.n},
          {"sigma", p.sigma},
          {"mu", p.mu},
          {"direction_seed", p.direction_seed},
          {"noise_seed", p.noise_seed}};
}

EmergenceProfile step_profile(std::size_t d, std::size_t step_layer, double height, std::size_t n,
                              std::size_t d_model, double sigma) {
  EmergenceProfile p;
  p.d = d;
  p.d_model = d_model;
  p.n = n;
  p.sigma = sigma;
  p.mu.assign(d, 0.0);
  for (std::size_t i = step_layer; i < d; ++i) p.mu[i] = height;
  return p;
}

double bayes_accuracy(double mu, double sigma) {
  return 0.5 * std::erfc(-(mu / (2.0 * sigma)) / std::sqrt(2.0));
}

std::vector<double> class_direction(std::size_t d_model, std::uint64_t direction_seed) {
  Rng rng(direction_seed);
  std::vector<double> u(d_model);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (auto& v : u) {
      v = rng.normal();
      norm += v * v;
    }
  } while (norm == 0.0);
  norm = std::sqrt(norm);
  for (auto& v : u) v /= norm;
  return u;
}

Run generate_run(const EmergenceProfile& profile) {
  profile.validate();
  const auto u = class_direction(profile.d_model, profile.direction_seed);
  const std::size_t half = profile.n / 2;

  Run run;
  auto& m = run.manifest;
  m.model_name = "synthetic";
  m.dataset_name = "gaussian-mean-shift";
  m.num_layers = profile.d;
  m.n = profile.n;
  m.d_model = profile.d_model;
  m.extraction_point = "synthetic";
  m.quantization_bits = 32;
  m.meta["generator"] = "cdepth synth";
  m.meta["sigma"] = format_double17(profile.sigma);
  m.meta["direction_seed"] = std::to_string(profile.direction_seed);
  m.meta["noise_seed"] = std::to_string(profile.noise_seed);
  std::string mu_list;
  for (std::size_t i = 0; i < profile.d; ++i) {
    if (i) mu_list += ',';
    mu_list += format_double17(profile.mu[i]);
  }
  m.meta["mu"] = mu_list;

  run.labels.labels.assign(profile.n, 0);
  for (std::size_t k = half; k < profile.n; ++k) run.labels.labels[k] = 1;

  run.layers.resize(profile.d);
  for (std::size_t i = 0; i < profile.d; ++i) {
    Rng rng(profile.noise_seed ^ static_cast<std::uint64_t>(i));
    auto& layer = run.layers[i];
    layer.layer_index = i;
    layer.n = profile.n;
    layer.d_model = profile.d_model;
    layer.data.resize(profile.n * profile.d_model);
    const double shift = profile.mu[i] / 2.0;
    for (std::size_t k = 0; k < profile.n; ++k) {
      const double c = k < half ? -1.0 : 1.0;
      for (std::size_t j = 0; j < profile.d_model; ++j) {
        const double x = c * shift * u[j] + profile.sigma * rng.normal();
        layer.data[k * profile.d_model + j] = static_cast<float>(x);
      }
    }
  }
  return run;
}

void generate(const EmergenceProfile& profile, const std::filesystem::path& out_dir) {
  write_run(generate_run(profile), out_dir);
}

}  // namespace cdepth
