// Copyright 2026 The Extrastep Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "extrastep/estimators.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>

#include "extrastep/errors.h"

namespace extrastep {
namespace {

constexpr std::uint64_t kBitsPerValue = 64;
// Cap on the support size EnumerateHalf will materialize.
constexpr std::size_t kMaxEnumeratedOutcomes = 1'000'000;

std::uint64_t Count(Index n) { return static_cast<std::uint64_t>(n); }

void ChargeFull(CostLedger& ledger, Index d) {
  ledger.full_oracle_calls += 1;
  ledger.coordinates_touched += Count(d);
  ledger.bits_sent += kBitsPerValue * Count(d);
}

void ChargeComponent(CostLedger& ledger, Index d) {
  ledger.component_oracle_calls += 1;
  ledger.coordinates_touched += Count(d);
  ledger.bits_sent += kBitsPerValue * Count(d);
}

double Require(const std::optional<double>& value, const char* what) {
  if (!value) throw ParameterError(std::string("constants: missing ") + what);
  return *value;
}

}  // namespace

std::string VariantName(EstimatorVariant variant) {
  switch (variant) {
    case EstimatorVariant::kFullDet:
      return "fulldet";
    case EstimatorVariant::kNoisy:
      return "noisy";
    case EstimatorVariant::kPast:
      return "past";
    case EstimatorVariant::kVR:
      return "vr";
    case EstimatorVariant::kCoord:
      return "coord";
    case EstimatorVariant::kQuant:
      return "quant";
    case EstimatorVariant::kQVR:
      return "qvr";
    case EstimatorVariant::kIS:
      return "is";
    case EstimatorVariant::kLocal:
      return "local";
  }
  return "unknown";
}

std::optional<EstimatorVariant> ParseVariant(const std::string& name) {
  for (auto v : {EstimatorVariant::kFullDet, EstimatorVariant::kNoisy,
                 EstimatorVariant::kPast, EstimatorVariant::kVR,
                 EstimatorVariant::kCoord, EstimatorVariant::kQuant,
                 EstimatorVariant::kQVR, EstimatorVariant::kIS,
                 EstimatorVariant::kLocal}) {
    if (VariantName(v) == name) return v;
  }
  return std::nullopt;
}

EstimatorKind EstimatorKind::FullDet() { return {}; }

EstimatorKind EstimatorKind::Noisy(double sigma) {
  EstimatorKind k;
  k.variant = EstimatorVariant::kNoisy;
  k.noise_sigma = sigma;
  return k;
}

EstimatorKind EstimatorKind::Past(double sigma) {
  EstimatorKind k;
  k.variant = EstimatorVariant::kPast;
  k.noise_sigma = sigma;
  return k;
}

EstimatorKind EstimatorKind::VR() {
  EstimatorKind k;
  k.variant = EstimatorVariant::kVR;
  return k;
}

EstimatorKind EstimatorKind::Coord() {
  EstimatorKind k;
  k.variant = EstimatorVariant::kCoord;
  return k;
}

EstimatorKind EstimatorKind::Quant(Quantizer q) {
  EstimatorKind k;
  k.variant = EstimatorVariant::kQuant;
  k.quantizer = q;
  return k;
}

EstimatorKind EstimatorKind::QVR(Quantizer q) {
  EstimatorKind k;
  k.variant = EstimatorVariant::kQVR;
  k.quantizer = q;
  return k;
}

EstimatorKind EstimatorKind::IS(std::vector<double> weights) {
  EstimatorKind k;
  k.variant = EstimatorVariant::kIS;
  k.weights = std::move(weights);
  return k;
}

EstimatorKind EstimatorKind::Local(double split) {
  EstimatorKind k;
  k.variant = EstimatorVariant::kLocal;
  k.split = split;
  return k;
}

bool EstimatorKind::uses_snapshot() const {
  switch (variant) {
    case EstimatorVariant::kFullDet:
    case EstimatorVariant::kNoisy:
    case EstimatorVariant::kPast:
      return false;
    default:
      return true;
  }
}

std::string EstimatorKind::name() const {
  std::string out = VariantName(variant);
  if (variant == EstimatorVariant::kCoord && coord_scale != 1.0) {
    out += "_misscaled";
  }
  return out;
}

AssumptionConstants ComputeAssumptionConstants(const EstimatorKind& kind,
                                               const ConstantInputs& in) {
  AssumptionConstants out;
  const double dd = in.bounded_d * in.bounded_d;
  const double s2 = kind.noise_sigma * kind.noise_sigma;
  switch (kind.variant) {
    case EstimatorVariant::kFullDet:
    case EstimatorVariant::kNoisy: {
      const double l = Require(in.lipschitz, "L");
      out.a = 3.0 * l * l;
      out.d1 = 3.0 * dd + 6.0 * s2;
      out.d3 = s2;
      out.lipschitz = l;
      break;
    }
    case EstimatorVariant::kPast: {
      const double l = Require(in.lipschitz, "L");
      out.rho = 1.0 / 3.0;
      out.b = 3.0;
      out.c = 2.0 * l * l;
      out.d1 = 6.0 * s2;
      out.d2 = 4.0 * dd + 12.0 * s2;
      out.d3 = s2;
      out.lipschitz = l;
      break;
    }
    case EstimatorVariant::kVR: {
      const double l = Require(in.lipschitz, "L");
      out.a = l * l;
      out.d1 = dd;
      out.e = 4.0 * l * l;
      out.d3 = 4.0 * dd;
      out.lipschitz = l;
      break;
    }
    case EstimatorVariant::kCoord: {
      const double l = Require(in.lipschitz, "L");
      if (!in.dimension) throw ParameterError("constants: missing d");
      const double d = static_cast<double>(*in.dimension);
      out.a = d * l * l;
      out.d1 = d * dd;
      out.e = 2.0 * (d + 1.0) * l * l;
      out.d3 = 2.0 * (d + 1.0) * dd;
      out.lipschitz = l;
      break;
    }
    case EstimatorVariant::kQuant:
    case EstimatorVariant::kQVR: {
      const double l = Require(in.lipschitz, "L");
      if (!kind.quantizer) throw ParameterError("constants: missing quantizer");
      const double omega = kind.quantizer->omega();
      out.a = omega * l * l;
      out.d1 = omega * dd;
      out.e = 2.0 * (omega + 1.0) * l * l;
      out.d3 = 2.0 * (omega + 1.0) * dd;
      out.lipschitz = l;
      break;
    }
    case EstimatorVariant::kIS: {
      const double l = Require(in.lipschitz, "L");
      const std::size_t m = in.summand_lipschitz.size();
      if (m == 0 || in.weights.size() != m) {
        throw ParameterError("constants: IS needs summand constants and weights");
      }
      double sum_l = 0.0;
      double sum_d = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!(in.weights[i] > 0.0)) throw ParameterError("constants: weights must be > 0");
        sum_l += in.summand_lipschitz[i] * in.summand_lipschitz[i] / in.weights[i];
        if (i < in.summand_d.size()) {
          sum_d += in.summand_d[i] * in.summand_d[i] / in.weights[i];
        }
      }
      out.a = sum_l;
      out.d1 = sum_d;
      out.e = 2.0 * (sum_l + l * l);
      out.d3 = 2.0 * (sum_d + dd);
      out.lipschitz = l;
      break;
    }
    case EstimatorVariant::kLocal: {
      // Two summands, Phi and lambda (Z - Z_avg), sampled with (split,
      // 1 - split); the full operator is (L + lambda)-Lipschitz.
      const double l = Require(in.local_lipschitz, "local L");
      const double lambda = Require(in.lambda, "lambda");
      const double s = kind.split;
      if (!(s > 0.0 && s < 1.0)) throw ParameterError("constants: split must be in (0, 1)");
      out.a = l * l / s + lambda * lambda / (1.0 - s);
      out.e = 2.0 * (out.a + (l + lambda) * (l + lambda));
      out.lipschitz = l;
      break;
    }
  }
  out.tau_star = OptimalTau(kind, in.components.value_or(1),
                            in.dimension.value_or(1),
                            kind.quantizer ? kind.quantizer->omega() : 1.0,
                            in.local_lipschitz.value_or(0.0),
                            in.lambda.value_or(0.0));
  return out;
}

ConstantInputs ConstantInputsFor(const EstimatorKind& kind,
                                 const VIProblem& problem) {
  const ProblemConstants& pc = problem.constants();
  ConstantInputs in;
  in.lipschitz = pc.lipschitz;
  in.bounded_d = pc.bounded_d;
  in.dimension = problem.dimension();
  in.components = problem.component_count();
  const double m = static_cast<double>(problem.component_count());
  switch (kind.variant) {
    case EstimatorVariant::kVR:
    case EstimatorVariant::kQVR: {
      double l = pc.lipschitz;
      for (double lm : pc.component_lipschitz) l = std::max(l, lm);
      in.lipschitz = l;
      double d = pc.bounded_d;
      for (double dm : pc.component_d) d = std::max(d, dm);
      in.bounded_d = d;
      break;
    }
    case EstimatorVariant::kIS: {
      for (double lm : pc.component_lipschitz) in.summand_lipschitz.push_back(lm / m);
      for (double dm : pc.component_d) in.summand_d.push_back(dm / m);
      in.weights = kind.weights.empty() ? ImportanceWeights(pc.component_lipschitz)
                                        : kind.weights;
      break;
    }
    case EstimatorVariant::kLocal:
      if (problem.mixing() == nullptr) {
        throw ParameterError("local estimator requires a mixing problem");
      }
      in.local_lipschitz = pc.local_lipschitz;
      in.lambda = pc.lambda;
      break;
    default:
      break;
  }
  return in;
}

double OptimalTau(const EstimatorKind& kind, Index components, Index dimension,
                  double omega, double lipschitz, double lambda) {
  switch (kind.variant) {
    case EstimatorVariant::kVR:
    case EstimatorVariant::kIS: {
      const double m = static_cast<double>(components);
      return m / (m + 1.0);
    }
    case EstimatorVariant::kCoord: {
      const double d = static_cast<double>(dimension);
      return d / (d + 1.0);
    }
    case EstimatorVariant::kQuant:
    case EstimatorVariant::kQVR:
      return omega / (omega + 1.0);
    case EstimatorVariant::kLocal:
      if (lipschitz + lambda <= 0.0) return 0.0;
      return lipschitz / (lipschitz + lambda);
    default:
      return 0.0;
  }
}

double OptimalTau(const EstimatorKind& kind, const VIProblem& problem) {
  const ProblemConstants& pc = problem.constants();
  return OptimalTau(kind, problem.component_count(), problem.dimension(),
                    kind.quantizer ? kind.quantizer->omega() : 1.0,
                    pc.local_lipschitz, pc.lambda);
}

std::vector<double> ImportanceWeights(const std::vector<double>& lipschitz) {
  if (lipschitz.empty()) throw ParameterError("importance weights: empty list");
  double total = 0.0;
  for (double l : lipschitz) {
    if (!(l > 0.0)) throw ParameterError("importance weights: every L_m must be > 0");
    total += l;
  }
  std::vector<double> p;
  p.reserve(lipschitz.size());
  for (double l : lipschitz) p.push_back(l / total);
  return p;
}

Estimator::Estimator(EstimatorKind kind, const VIProblem& problem)
    : problem_(&problem), kind_(std::move(kind)) {
  const Index d = problem.dimension();
  switch (kind_.variant) {
    case EstimatorVariant::kNoisy:
    case EstimatorVariant::kPast:
      if (!(kind_.noise_sigma >= 0.0)) throw ParameterError("noise sigma must be >= 0");
      break;
    case EstimatorVariant::kCoord:
      if (!(kind_.coord_scale > 0.0)) throw ParameterError("coord scale must be > 0");
      break;
    case EstimatorVariant::kQuant:
    case EstimatorVariant::kQVR:
      if (!kind_.quantizer) throw ParameterError("quantized estimator needs a quantizer");
      if (kind_.quantizer->dimension() != d) {
        throw DimensionError("quantizer dimension does not match the problem");
      }
      break;
    case EstimatorVariant::kIS: {
      weights_ = kind_.weights.empty()
                     ? ImportanceWeights(problem.constants().component_lipschitz)
                     : kind_.weights;
      if (static_cast<Index>(weights_.size()) != problem.component_count()) {
        throw ParameterError("IS weights must have one entry per component");
      }
      double total = 0.0;
      for (double p : weights_) {
        if (!(p > 0.0)) throw ParameterError("IS weights must be > 0");
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-9) throw ParameterError("IS weights must sum to 1");
      break;
    }
    case EstimatorVariant::kLocal:
      if (problem.mixing() == nullptr) {
        throw ParameterError("local estimator requires a mixing problem");
      }
      if (!(kind_.split > 0.0 && kind_.split < 1.0)) {
        throw ParameterError("local split must be in (0, 1)");
      }
      break;
    default:
      break;
  }
}

void Estimator::RequireInitialized() const {
  if (!initialized_) throw std::logic_error("estimator: snapshot cache not initialized");
}

Vector Estimator::Noise(RngStream& rng) const {
  const Index d = problem_->dimension();
  Vector noise(d);
  if (kind_.noise_sigma == 0.0) return Vector::Zero(d);
  const double scale = kind_.noise_sigma / std::sqrt(static_cast<double>(d));
  for (Index i = 0; i < d; ++i) noise(i) = scale * rng.Normal();
  return noise;
}

Index Estimator::SampleComponent(RngStream& rng) const {
  const Index m = problem_->component_count();
  if (kind_.variant != EstimatorVariant::kIS) {
    return static_cast<Index>(rng.UniformInt(0, Count(m) - 1));
  }
  const double u = rng.Uniform();
  double cumulative = 0.0;
  for (Index i = 0; i < m; ++i) {
    cumulative += weights_[i];
    if (u < cumulative) return i;
  }
  return m - 1;
}

void Estimator::RefreshCache() {
  const VIProblem& p = *problem_;
  const Index d = p.dimension();
  switch (kind_.variant) {
    case EstimatorVariant::kVR:
    case EstimatorVariant::kQVR:
    case EstimatorVariant::kIS: {
      const Index m = p.component_count();
      fw_components_.resize(m);
      fw_ = Vector::Zero(d);
      for (Index i = 0; i < m; ++i) {
        fw_components_[i] = p.EvalComponent(i, w_);
        ChargeComponent(costs_, d);
        fw_ += fw_components_[i];
      }
      fw_ /= static_cast<double>(m);
      break;
    }
    case EstimatorVariant::kCoord:
    case EstimatorVariant::kQuant:
      fw_ = p.EvalFull(w_);
      ChargeFull(costs_, d);
      break;
    case EstimatorVariant::kLocal: {
      const MixingVI& mix = *p.mixing();
      phi_w_ = mix.LocalPart(w_);
      consensus_w_ = mix.ConsensusPart(w_);
      fw_ = phi_w_ + consensus_w_;
      ChargeFull(costs_, d);
      costs_.communications += 1;
      break;
    }
    default:
      break;
  }
}

void Estimator::Initialize(const Vector& z0, RngStream& rng) {
  if (z0.size() != problem_->dimension()) {
    throw DimensionError("estimator: initial point has wrong length");
  }
  w_ = z0;
  sigma_sq_ = 0.0;
  if (kind_.uses_snapshot()) RefreshCache();
  if (kind_.variant == EstimatorVariant::kPast) {
    past_clean_ = problem_->EvalFull(z0);
    past_noisy_ = past_clean_ + Noise(rng);
    ChargeFull(costs_, problem_->dimension());
  }
  initialized_ = true;
}

Vector Estimator::SampleLead(const Vector& z_k, RngStream& rng,
                             CostLedger& ledger) const {
  RequireInitialized();
  const Index d = problem_->dimension();
  switch (kind_.variant) {
    case EstimatorVariant::kFullDet:
      ChargeFull(ledger, d);
      return problem_->EvalFull(z_k);
    case EstimatorVariant::kNoisy:
      ChargeFull(ledger, d);
      return problem_->EvalFull(z_k) + Noise(rng);
    case EstimatorVariant::kPast:
      return past_clean_ + Noise(rng);
    default:
      return fw_;
  }
}

Vector Estimator::Lead(const Vector& z_k, RngStream& rng) {
  RequireInitialized();
  if (kind_.variant == EstimatorVariant::kPast) return past_noisy_;
  return SampleLead(z_k, rng, costs_);
}

Vector Estimator::SampleHalf(const Vector& z_half, RngStream& rng,
                             CostLedger& ledger) const {
  RequireInitialized();
  const VIProblem& p = *problem_;
  const Index d = p.dimension();
  if (z_half.size() != d) throw DimensionError("estimator: z_half has wrong length");
  switch (kind_.variant) {
    case EstimatorVariant::kFullDet:
      ChargeFull(ledger, d);
      return p.EvalFull(z_half);
    case EstimatorVariant::kNoisy:
    case EstimatorVariant::kPast:
      ChargeFull(ledger, d);
      return p.EvalFull(z_half) + Noise(rng);
    case EstimatorVariant::kVR: {
      const Index m = SampleComponent(rng);
      ChargeComponent(ledger, d);
      return p.EvalComponent(m, z_half) - fw_components_[m] + fw_;
    }
    case EstimatorVariant::kCoord: {
      const auto i = static_cast<Index>(rng.UniformInt(0, Count(d) - 1));
      ledger.coordinates_touched += 1;
      ledger.bits_sent += kBitsPerValue;
      Vector g = fw_;
      g(i) += kind_.coord_scale * static_cast<double>(d) *
              (p.EvalCoordinate(i, z_half) - fw_(i));
      return g;
    }
    case EstimatorVariant::kQuant: {
      const Vector delta = p.EvalFull(z_half) - fw_;
      ledger.full_oracle_calls += 1;
      ledger.coordinates_touched += Count(d);
      ledger.bits_sent += kind_.quantizer->BitsPerMessage();
      return kind_.quantizer->Apply(delta, rng) + fw_;
    }
    case EstimatorVariant::kQVR: {
      const Index m = SampleComponent(rng);
      const Vector delta = p.EvalComponent(m, z_half) - fw_components_[m];
      ledger.component_oracle_calls += 1;
      ledger.coordinates_touched += Count(d);
      ledger.bits_sent += kind_.quantizer->BitsPerMessage();
      return kind_.quantizer->Apply(delta, rng) + fw_;
    }
    case EstimatorVariant::kIS: {
      const Index m = SampleComponent(rng);
      ChargeComponent(ledger, d);
      const double scale =
          1.0 / (static_cast<double>(p.component_count()) * weights_[m]);
      return scale * (p.EvalComponent(m, z_half) - fw_components_[m]) + fw_;
    }
    case EstimatorVariant::kLocal: {
      const MixingVI& mix = *p.mixing();
      const double s = kind_.split;
      if (rng.Bernoulli(s)) {
        ledger.local_steps += 1;
        ledger.component_oracle_calls += Count(mix.worker_count());
        ledger.coordinates_touched += Count(d);
        return (mix.LocalPart(z_half) - phi_w_) / s + fw_;
      }
      ledger.communications += 1;
      ledger.bits_sent += kBitsPerValue * Count(d);
      return (mix.ConsensusPart(z_half) - consensus_w_) / (1.0 - s) + fw_;
    }
  }
  throw std::logic_error("estimator: unknown variant");
}

Vector Estimator::Correct(const Vector& z_half, RngStream& rng) {
  RequireInitialized();
  if (kind_.variant != EstimatorVariant::kPast) {
    return SampleHalf(z_half, rng, costs_);
  }
  Vector clean = problem_->EvalFull(z_half);
  ChargeFull(costs_, problem_->dimension());
  Vector noisy = clean + Noise(rng);
  sigma_sq_ = (past_clean_ - clean).squaredNorm();
  past_clean_ = std::move(clean);
  past_noisy_ = noisy;
  return noisy;
}

EstimatePair Estimator::Pair(const Vector& z_bar, const Vector& z_k,
                             double gamma, RngStream& rng) {
  EstimatePair out;
  out.g_lead = Lead(z_k, rng);
  out.z_half = problem_->prox().Apply(gamma, z_bar - gamma * out.g_lead);
  out.g_half = Correct(out.z_half, rng);
  return out;
}

bool Estimator::UpdateSnapshot(const Vector& z_next, double tau,
                               RngStream& coin) {
  if (!(tau >= 0.0 && tau < 1.0)) throw ParameterError("tau must be in [0, 1)");
  const bool refresh = coin.Uniform() >= tau;
  if (refresh) {
    ++snapshot_moves_;
    w_ = z_next;
    if (kind_.uses_snapshot()) RefreshCache();
  }
  return refresh;
}

std::optional<std::vector<WeightedSample>> Estimator::EnumerateHalf(
    const Vector& z_half) const {
  RequireInitialized();
  const VIProblem& p = *problem_;
  const Index d = p.dimension();
  std::vector<WeightedSample> out;
  switch (kind_.variant) {
    case EstimatorVariant::kFullDet:
      out.push_back({1.0, p.EvalFull(z_half)});
      return out;
    case EstimatorVariant::kCoord: {
      const Vector full = p.EvalFull(z_half);
      for (Index i = 0; i < d; ++i) {
        Vector g = fw_;
        g(i) += kind_.coord_scale * static_cast<double>(d) * (full(i) - fw_(i));
        out.push_back({1.0 / static_cast<double>(d), std::move(g)});
      }
      return out;
    }
    case EstimatorVariant::kVR:
    case EstimatorVariant::kIS: {
      const Index m = p.component_count();
      for (Index i = 0; i < m; ++i) {
        const Vector diff = p.EvalComponent(i, z_half) - fw_components_[i];
        if (kind_.variant == EstimatorVariant::kVR) {
          out.push_back({1.0 / static_cast<double>(m), diff + fw_});
        } else {
          const double scale = 1.0 / (static_cast<double>(m) * weights_[i]);
          out.push_back({weights_[i], scale * diff + fw_});
        }
      }
      return out;
    }
    case EstimatorVariant::kQuant:
    case EstimatorVariant::kQVR: {
      const Quantizer& q = *kind_.quantizer;
      std::vector<std::pair<double, Vector>> deltas;
      if (kind_.variant == EstimatorVariant::kQuant) {
        deltas.emplace_back(1.0, p.EvalFull(z_half) - fw_);
      } else {
        const Index m = p.component_count();
        for (Index i = 0; i < m; ++i) {
          deltas.emplace_back(1.0 / static_cast<double>(m),
                              p.EvalComponent(i, z_half) - fw_components_[i]);
        }
      }
      if (q.is_identity()) {
        for (auto& [prob, delta] : deltas) out.push_back({prob, delta + fw_});
        return out;
      }
      // C(d, k) grows quickly; give up before materializing it.
      double count = 1.0;
      for (Index j = 0; j < q.keep(); ++j) {
        count = count * static_cast<double>(d - j) / static_cast<double>(j + 1);
      }
      if (count * static_cast<double>(deltas.size()) >
          static_cast<double>(kMaxEnumeratedOutcomes)) {
        return std::nullopt;
      }
      const auto supports = q.AllSupports();
      const double each = 1.0 / static_cast<double>(supports.size());
      for (auto& [prob, delta] : deltas) {
        for (const auto& support : supports) {
          out.push_back({prob * each, q.ApplyWithSupport(delta, support) + fw_});
        }
      }
      return out;
    }
    case EstimatorVariant::kLocal: {
      const MixingVI& mix = *p.mixing();
      const double s = kind_.split;
      out.push_back({s, (mix.LocalPart(z_half) - phi_w_) / s + fw_});
      out.push_back({1.0 - s,
                     (mix.ConsensusPart(z_half) - consensus_w_) / (1.0 - s) + fw_});
      return out;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace extrastep
