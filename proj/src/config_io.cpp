#include "mcsched/config_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace mcsched {

namespace {

using nlohmann::json;

std::vector<int> parse_caps(const json& j, const SystemConfig& config) {
  std::vector<int> caps;
  if (config.uniform()) {
    caps = j.get<std::vector<int>>();
  } else {
    for (const auto& row : j) {
      for (const auto& v : row) caps.push_back(v.get<int>());
    }
  }
  return caps;
}

std::vector<double> parse_power(const json& j, const SystemConfig& config) {
  std::vector<double> power;
  if (config.uniform()) {
    power = j.get<std::vector<double>>();
  } else {
    for (const auto& row : j) {
      for (const auto& v : row) power.push_back(v.get<double>());
    }
  }
  return power;
}

ArrivalSpec parse_arrivals(const json& j) {
  ArrivalSpec spec;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "per_user_zipf") {
    spec.kind = ArrivalSpec::Kind::kPerUserZipf;
    spec.alpha = j.at("alpha").get<double>();
  } else if (kind == "independent") {
    spec.kind = ArrivalSpec::Kind::kIndependent;
    for (const auto& queue : j.at("per_queue")) {
      ScalarDistribution dist;
      for (const auto& atom : queue) {
        dist.emplace_back(atom.at(0).get<int>(), atom.at(1).get<double>());
      }
      spec.per_queue.push_back(std::move(dist));
    }
  } else if (kind == "markov") {
    spec.kind = ArrivalSpec::Kind::kMarkov;
    for (const auto& state : j.at("states")) {
      spec.markov.states.push_back(state.get<ArrivalOutcome>());
    }
    spec.markov.transition = j.at("transition").get<std::vector<std::vector<double>>>();
  } else {
    throw std::invalid_argument("unknown arrival kind: " + kind);
  }
  return spec;
}

}  // namespace

ArrivalDistribution build_arrivals(const InstanceSpec& spec, std::size_t support_cap) {
  switch (spec.arrivals.kind) {
    case ArrivalSpec::Kind::kPerUserZipf:
      return per_user_zipf_arrivals(spec.config, spec.arrivals.alpha, support_cap);
    case ArrivalSpec::Kind::kIndependent:
      return independent_product(spec.arrivals.per_queue, support_cap);
    case ArrivalSpec::Kind::kMarkov: {
      // Stationary mixture as the i.i.d. stand-in; the augmented solver uses
      // the chain itself.
      const MarkovValidationReport report = validate_markov_model(spec.arrivals.markov);
      ArrivalDistribution dist;
      dist.outcomes = spec.arrivals.markov.states;
      dist.probs = report.stationary;
      for (std::size_t i = dist.probs.size(); i-- > 0;) {
        if (dist.probs[i] <= 0.0) {
          dist.outcomes.erase(dist.outcomes.begin() + static_cast<std::ptrdiff_t>(i));
          dist.probs.erase(dist.probs.begin() + static_cast<std::ptrdiff_t>(i));
        }
      }
      dist.validate();
      return dist;
    }
  }
  throw std::logic_error("unreachable");
}

BasePolicy build_base_policy(const InstanceSpec& spec) {
  if (!spec.base.zipf) {
    BasePolicy base;
    base.prob = spec.base.prob;
    base.validate(spec.config);
    return base;
  }
  const double alpha =
      spec.arrivals.kind == ArrivalSpec::Kind::kPerUserZipf ? spec.arrivals.alpha : 0.75;
  return zipf_base_policy(spec.config, alpha);
}

InstanceSpec parse_instance_text(const std::string& text) {
  const json j = json::parse(text);
  InstanceSpec spec;
  const std::string kind = j.value("case", std::string("uniform"));
  if (kind == "uniform") {
    spec.config.case_kind = CaseKind::kUniform;
  } else if (kind == "nonuniform") {
    spec.config.case_kind = CaseKind::kNonuniform;
  } else {
    throw std::invalid_argument("case must be uniform or nonuniform");
  }
  spec.config.num_contents = j.at("num_contents").get<int>();
  spec.config.num_users = j.value("num_users", 1);
  spec.config.cached = j.value("cached", std::vector<int>{});
  spec.config.caps = parse_caps(j.at("caps"), spec.config);
  spec.config.fetch_base = j.at("fetch_cost").get<std::vector<double>>();
  spec.config.power = parse_power(j.at("power"), spec.config);
  spec.config.weight_fetch = j.value("weight_fetch", 0.0);
  spec.config.weight_power = j.value("weight_power", 0.0);
  spec.config.validate();

  if (j.contains("arrivals")) spec.arrivals = parse_arrivals(j.at("arrivals"));

  if (j.contains("base_policy")) {
    const json& b = j.at("base_policy");
    if (b.is_string()) {
      if (b.get<std::string>() != "zipf") {
        throw std::invalid_argument("base_policy must be \"zipf\" or a probability vector");
      }
      spec.base.zipf = true;
    } else {
      spec.base.zipf = false;
      spec.base.prob = b.get<std::vector<double>>();
    }
  }
  return spec;
}

InstanceSpec load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open instance file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_instance_text(buffer.str());
}

}  // namespace mcsched
