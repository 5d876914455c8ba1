// Copyright 2026 The LSVI Space Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lsvi/linear_mdp.hpp"

#include <zlib.h>

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "lsvi/errors.hpp"

namespace lsvi {

void LinearMdp::check_indices(int s, int a, int h) const {
  if (s < 0 || s >= n_states) throw std::out_of_range("state index out of range");
  if (a < 0 || a >= n_actions) throw std::out_of_range("action index out of range");
  if (h < 0 || h >= horizon) throw std::out_of_range("step index out of range");
}

bool identical(const LinearMdp& a, const LinearMdp& b) {
  auto same = [](const Matrix& x, const Matrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() &&
           std::memcmp(x.data(), y.data(), sizeof(double) * x.size()) == 0;
  };
  if (a.n_states != b.n_states || a.n_actions != b.n_actions || a.dim != b.dim ||
      a.horizon != b.horizon || a.seed != b.seed) {
    return false;
  }
  if (!same(a.features, b.features)) return false;
  if (a.measures.size() != b.measures.size() || a.reward_weights.size() != b.reward_weights.size()) return false;
  for (std::size_t h = 0; h < a.measures.size(); ++h) {
    if (!same(a.measures[h], b.measures[h])) return false;
    if (!same(a.reward_weights[h], b.reward_weights[h])) return false;
  }
  return true;
}

Vector sample_simplex(int n, RandomStream& rng) {
  Vector v(n);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    v[i] = rng.exponential();
    total += v[i];
  }
  if (total <= 0.0) {
    // Every draw was exactly zero; probability ~2^-53n. Fall back to the barycenter.
    v.setConstant(1.0 / n);
    return v;
  }
  return v / total;
}

namespace {

int checked_size(std::uint64_t v, const char* what) {
  if (v == 0 || v > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) {
    throw std::invalid_argument(std::string("SyntheticSpec: ") + what + " must be in [1, INT_MAX]");
  }
  return static_cast<int>(v);
}

}  // namespace

LinearMdp generate_synthetic(const SyntheticSpec& spec) {
  LinearMdp mdp;
  mdp.n_states = checked_size(spec.n_states, "n_states");
  mdp.n_actions = checked_size(spec.n_actions, "n_actions");
  mdp.dim = checked_size(spec.dim, "dim");
  mdp.horizon = checked_size(spec.horizon, "horizon");
  mdp.seed = spec.seed;

  const RandomStream root(spec.seed);
  RandomStream phi_rng = root.derive({stream_tag::kFeatures});
  mdp.features.resize(static_cast<Eigen::Index>(mdp.n_states) * mdp.n_actions, mdp.dim);
  for (Eigen::Index row = 0; row < mdp.features.rows(); ++row) {
    mdp.features.row(row) = sample_simplex(mdp.dim, phi_rng).transpose();
  }

  RandomStream theta_rng = root.derive({stream_tag::kRewardWeights});
  mdp.reward_weights.reserve(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) mdp.reward_weights.push_back(sample_simplex(mdp.dim, theta_rng));

  RandomStream mu_rng = root.derive({stream_tag::kMeasures});
  mdp.measures.reserve(mdp.horizon);
  for (int h = 0; h < mdp.horizon; ++h) {
    Matrix mu(mdp.dim, mdp.n_states);
    for (int j = 0; j < mdp.dim; ++j) mu.row(j) = sample_simplex(mdp.n_states, mu_rng).transpose();
    mdp.measures.push_back(std::move(mu));
  }
  return mdp;
}

Vector transition_probabilities(const LinearMdp& mdp, int s, int a, int h) {
  mdp.check_indices(s, a, h);
  return (mdp.feature(s, a) * mdp.measures[h]).transpose();
}

int transition_sample(const LinearMdp& mdp, int s, int a, int h, RandomStream& rng) {
  const Vector p = transition_probabilities(mdp, s, a, h);
  const double u = rng.uniform();
  double cumulative = 0.0;
  int last_positive = 0;
  for (int next = 0; next < mdp.n_states; ++next) {
    if (p[next] <= 0.0) continue;
    cumulative += p[next];
    last_positive = next;
    if (u < cumulative) return next;
  }
  // u landed in the rounding gap above the accumulated mass.
  return last_positive;
}

double reward(const LinearMdp& mdp, int s, int a, int h) {
  mdp.check_indices(s, a, h);
  return mdp.feature(s, a).dot(mdp.reward_weights[h]);
}

std::string Violation::describe() const {
  std::ostringstream os;
  os << "(s=" << state << ", a=" << action << ", h=" << step << ") ";
  switch (kind) {
    case Kind::kNegativeProbability: os << "negative transition probability " << value; break;
    case Kind::kTransitionSum: os << "transition probabilities sum to " << value; break;
    case Kind::kRewardRange: os << "reward " << value << " outside [0, 1]"; break;
    case Kind::kNonFinite: os << "non-finite entry"; break;
  }
  return os.str();
}

ValidationReport validate(const LinearMdp& mdp) {
  ValidationReport report;
  const bool shapes_ok =
      mdp.n_states > 0 && mdp.n_actions > 0 && mdp.dim > 0 && mdp.horizon > 0 &&
      mdp.features.rows() == static_cast<Eigen::Index>(mdp.n_states) * mdp.n_actions &&
      mdp.features.cols() == mdp.dim && static_cast<int>(mdp.measures.size()) == mdp.horizon &&
      static_cast<int>(mdp.reward_weights.size()) == mdp.horizon;
  if (!shapes_ok) throw ValidationError("linear MDP tables have inconsistent shapes");
  for (int h = 0; h < mdp.horizon; ++h) {
    if (mdp.measures[h].rows() != mdp.dim || mdp.measures[h].cols() != mdp.n_states ||
        mdp.reward_weights[h].size() != mdp.dim) {
      throw ValidationError("linear MDP tables have inconsistent shapes");
    }
  }

  for (int h = 0; h < mdp.horizon; ++h) {
    const Matrix p = mdp.features * mdp.measures[h];
    const Vector r = mdp.features * mdp.reward_weights[h];
    for (int s = 0; s < mdp.n_states; ++s) {
      for (int a = 0; a < mdp.n_actions; ++a) {
        const Eigen::Index row = static_cast<Eigen::Index>(s) * mdp.n_actions + a;
        auto flag = [&](Violation::Kind kind, double value) {
          report.violations.push_back({kind, s, a, h, value});
        };
        if (!p.row(row).allFinite() || !std::isfinite(r[row])) {
          flag(Violation::Kind::kNonFinite, std::numeric_limits<double>::quiet_NaN());
          continue;
        }
        const double min_entry = p.row(row).minCoeff();
        if (min_entry < -kNegativityTolerance) flag(Violation::Kind::kNegativeProbability, min_entry);
        const double total = p.row(row).sum();
        if (std::abs(total - 1.0) > kTransitionSumTolerance) flag(Violation::Kind::kTransitionSum, total);
        if (r[row] < -kNegativityTolerance || r[row] > 1.0 + kNegativityTolerance) {
          flag(Violation::Kind::kRewardRange, r[row]);
        }
      }
    }
  }
  return report;
}

namespace {

constexpr std::array<char, 8> kMagic = {'L', 'M', 'D', 'P', 'v', '0', '0', '1'};
constexpr std::size_t kHeaderBytes = kMagic.size() + 5 * sizeof(std::uint64_t);

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, double>) {
    bits = std::bit_cast<std::uint64_t>(value);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
}

template <typename T>
T get_le(const std::uint8_t* p) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  if constexpr (std::is_same_v<T, double>) {
    return std::bit_cast<double>(bits);
  } else {
    return static_cast<T>(bits);
  }
}

std::uint32_t crc_of(const std::uint8_t* data, std::size_t n) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  while (n > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(n, 1u << 30));
    crc = crc32(crc, data, chunk);
    data += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

// Number of f64 values in the payload; false on overflow.
bool payload_count(std::uint64_t s, std::uint64_t a, std::uint64_t d, std::uint64_t h, std::uint64_t& out) {
  auto mul = [](std::uint64_t x, std::uint64_t y, std::uint64_t& r) { return !__builtin_mul_overflow(x, y, &r); };
  std::uint64_t phi = 0, theta = 0, mu = 0, mu_step = 0;
  if (!mul(s, a, phi) || !mul(phi, d, phi)) return false;
  if (!mul(h, d, theta)) return false;
  if (!mul(d, s, mu_step) || !mul(mu_step, h, mu)) return false;
  std::uint64_t total = 0;
  if (__builtin_add_overflow(phi, theta, &total) || __builtin_add_overflow(total, mu, &total)) return false;
  out = total;
  return true;
}

}  // namespace

std::vector<std::uint8_t> serialize(const LinearMdp& mdp) {
  std::uint64_t values = 0;
  payload_count(mdp.n_states, mdp.n_actions, mdp.dim, mdp.horizon, values);
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.reserve(kHeaderBytes + values * 8 + 4);
  put_le<std::uint64_t>(out, mdp.n_states);
  put_le<std::uint64_t>(out, mdp.n_actions);
  put_le<std::uint64_t>(out, mdp.dim);
  put_le<std::uint64_t>(out, mdp.horizon);
  put_le<std::uint64_t>(out, mdp.seed);
  for (Eigen::Index row = 0; row < mdp.features.rows(); ++row) {
    for (int j = 0; j < mdp.dim; ++j) put_le<double>(out, mdp.features(row, j));
  }
  for (const Vector& theta : mdp.reward_weights) {
    for (int j = 0; j < mdp.dim; ++j) put_le<double>(out, theta[j]);
  }
  for (const Matrix& mu : mdp.measures) {
    for (int j = 0; j < mdp.dim; ++j) {
      for (int s = 0; s < mdp.n_states; ++s) put_le<double>(out, mu(j, s));
    }
  }
  put_le<std::uint32_t>(out, crc_of(out.data(), out.size()));
  return out;
}

LinearMdp deserialize(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderBytes || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ValidationError("malformed header: missing LMDPv001 magic");
  }
  const std::uint8_t* p = bytes.data() + kMagic.size();
  const auto s = get_le<std::uint64_t>(p);
  const auto a = get_le<std::uint64_t>(p + 8);
  const auto d = get_le<std::uint64_t>(p + 16);
  const auto h = get_le<std::uint64_t>(p + 24);
  const auto seed = get_le<std::uint64_t>(p + 32);
  const std::uint64_t int_max = static_cast<std::uint64_t>(std::numeric_limits<int>::max());
  if (s == 0 || a == 0 || d == 0 || h == 0 || s > int_max || a > int_max || d > int_max || h > int_max) {
    throw ValidationError("malformed header: sizes must be in [1, INT_MAX]");
  }
  std::uint64_t values = 0;
  if (!payload_count(s, a, d, h, values) || values > (std::numeric_limits<std::uint64_t>::max() - kHeaderBytes - 4) / 8) {
    throw ValidationError("malformed header: table sizes overflow");
  }
  const std::uint64_t expected = kHeaderBytes + values * 8 + 4;
  if (bytes.size() != expected) {
    std::ostringstream os;
    os << "shape mismatch: header implies " << expected << " bytes, stream has " << bytes.size();
    throw ValidationError(os.str());
  }
  const std::size_t body = bytes.size() - 4;
  if (get_le<std::uint32_t>(bytes.data() + body) != crc_of(bytes.data(), body)) {
    throw ValidationError("checksum failure");
  }

  LinearMdp mdp;
  mdp.n_states = static_cast<int>(s);
  mdp.n_actions = static_cast<int>(a);
  mdp.dim = static_cast<int>(d);
  mdp.horizon = static_cast<int>(h);
  mdp.seed = seed;
  p = bytes.data() + kHeaderBytes;
  auto next = [&p] {
    const double v = get_le<double>(p);
    p += 8;
    return v;
  };
  mdp.features.resize(static_cast<Eigen::Index>(s * a), mdp.dim);
  for (Eigen::Index row = 0; row < mdp.features.rows(); ++row) {
    for (int j = 0; j < mdp.dim; ++j) mdp.features(row, j) = next();
  }
  for (int step = 0; step < mdp.horizon; ++step) {
    Vector theta(mdp.dim);
    for (int j = 0; j < mdp.dim; ++j) theta[j] = next();
    mdp.reward_weights.push_back(std::move(theta));
  }
  for (int step = 0; step < mdp.horizon; ++step) {
    Matrix mu(mdp.dim, mdp.n_states);
    for (int j = 0; j < mdp.dim; ++j) {
      for (int st = 0; st < mdp.n_states; ++st) mu(j, st) = next();
    }
    mdp.measures.push_back(std::move(mu));
  }
  return mdp;
}

void save_mdp(const LinearMdp& mdp, const std::filesystem::path& path) {
  const auto bytes = serialize(mdp);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

LinearMdp load_mdp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace lsvi
