#include "rlsched/network.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "rlsched/errors.hpp"
#include "rlsched/rng.hpp"

namespace rlsched {

PolicyNetwork::Layout PolicyNetwork::layout(std::size_t input, std::size_t actions,
                                            std::size_t hidden) {
  Layout l{};
  std::size_t at = 0;
  auto take = [&at](std::size_t n) {
    const std::size_t start = at;
    at += n;
    return start;
  };
  l.w1 = take(input * hidden);
  l.b1 = take(hidden);
  l.w2 = take(hidden * hidden);
  l.b2 = take(hidden);
  l.wp = take(hidden * actions);
  l.bp = take(actions);
  l.wv = take(hidden);
  l.bv = take(1);
  l.total = at;
  return l;
}

PolicyNetwork::PolicyNetwork(std::size_t input_width, std::size_t actions,
                             std::size_t hidden)
    : input_(input_width),
      actions_(actions),
      hidden_(hidden),
      at_(layout(input_width, actions, hidden)),
      params_(at_.total, 0.0) {
  if (input_width == 0 || actions == 0 || hidden == 0)
    throw ShapeError("network dimensions must be positive");
}

std::size_t PolicyNetwork::parameter_count(std::size_t input_width, std::size_t actions,
                                           std::size_t hidden) {
  return layout(input_width, actions, hidden).total;
}

namespace {

// Writes an orthogonal (rows x cols) matrix, scaled by gain, into an
// input-major block where rows are outputs and cols are inputs.
void orthogonal_fill(std::span<double> block, std::size_t rows, std::size_t cols,
                     double gain, Rng& rng) {
  const std::size_t big = std::max(rows, cols);
  const std::size_t small = std::min(rows, cols);
  std::vector<std::vector<double>> basis(small, std::vector<double>(big));
  for (auto& v : basis)
    for (double& x : v) x = rng.normal();
  // Modified Gram-Schmidt.
  for (std::size_t k = 0; k < small; ++k) {
    for (std::size_t j = 0; j < k; ++j) {
      double dot = 0.0;
      for (std::size_t i = 0; i < big; ++i) dot += basis[k][i] * basis[j][i];
      for (std::size_t i = 0; i < big; ++i) basis[k][i] -= dot * basis[j][i];
    }
    double norm = 0.0;
    for (double x : basis[k]) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : basis[k]) x /= norm;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double w = rows >= cols ? basis[c][r] : basis[r][c];
      block[c * rows + r] = gain * w;
    }
  }
}

}  // namespace

PolicyNetwork PolicyNetwork::initialized(std::size_t input_width, std::size_t actions,
                                         std::uint64_t seed, std::size_t hidden) {
  PolicyNetwork net(input_width, actions, hidden);
  Rng rng(seed);
  const double trunk_gain = std::sqrt(2.0);
  auto p = std::span<double>(net.params_);
  orthogonal_fill(p.subspan(net.at_.w1, input_width * hidden), hidden, input_width,
                  trunk_gain, rng);
  orthogonal_fill(p.subspan(net.at_.w2, hidden * hidden), hidden, hidden, trunk_gain, rng);
  orthogonal_fill(p.subspan(net.at_.wp, hidden * actions), actions, hidden, 0.01, rng);
  orthogonal_fill(p.subspan(net.at_.wv, hidden), 1, hidden, 1.0, rng);
  return net;
}

void check_input_width(const PolicyNetwork& net, std::size_t width) {
  if (width != net.input_width())
    throw ShapeError("observation has " + std::to_string(width) +
                     " values but the network expects " +
                     std::to_string(net.input_width()));
}

PolicyNetwork::Activations PolicyNetwork::forward_cached(std::span<const double> obs) const {
  check_input_width(*this, obs.size());
  const std::size_t H = hidden_;
  const std::size_t A = actions_;
  const double* p = params_.data();
  Activations act;

  act.h1.assign(p + at_.b1, p + at_.b1 + H);
  for (std::size_t i = 0; i < input_; ++i) {
    const double x = obs[i];
    if (x == 0.0) continue;
    const double* row = p + at_.w1 + i * H;
    for (std::size_t o = 0; o < H; ++o) act.h1[o] += x * row[o];
  }
  for (double& v : act.h1) v = std::tanh(v);

  act.h2.assign(p + at_.b2, p + at_.b2 + H);
  for (std::size_t j = 0; j < H; ++j) {
    const double* row = p + at_.w2 + j * H;
    for (std::size_t o = 0; o < H; ++o) act.h2[o] += act.h1[j] * row[o];
  }
  for (double& v : act.h2) v = std::tanh(v);

  Output& out = act.out;
  out.logits.assign(p + at_.bp, p + at_.bp + A);
  out.value = p[at_.bv];
  for (std::size_t j = 0; j < H; ++j) {
    const double h = act.h2[j];
    const double* row = p + at_.wp + j * A;
    for (std::size_t a = 0; a < A; ++a) out.logits[a] += h * row[a];
    out.value += h * p[at_.wv + j];
  }

  const double top = *std::max_element(out.logits.begin(), out.logits.end());
  out.probs.resize(A);
  double z = 0.0;
  for (std::size_t a = 0; a < A; ++a) z += out.probs[a] = std::exp(out.logits[a] - top);
  for (double& q : out.probs) q /= z;
  return act;
}

PolicyNetwork::Output PolicyNetwork::forward(std::span<const double> obs) const {
  return forward_cached(obs).out;
}

void PolicyNetwork::backward(std::span<const double> obs, const Activations& act,
                             std::span<const double> dlogits, double dvalue,
                             std::span<double> grad) const {
  const std::size_t H = hidden_;
  const std::size_t A = actions_;
  const double* p = params_.data();
  double* g = grad.data();

  std::vector<double> dz2(H, 0.0);
  for (std::size_t j = 0; j < H; ++j) {
    const double h = act.h2[j];
    double dh = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      g[at_.wp + j * A + a] += h * dlogits[a];
      dh += p[at_.wp + j * A + a] * dlogits[a];
    }
    g[at_.wv + j] += h * dvalue;
    dh += p[at_.wv + j] * dvalue;
    dz2[j] = dh * (1.0 - h * h);
  }
  for (std::size_t a = 0; a < A; ++a) g[at_.bp + a] += dlogits[a];
  g[at_.bv] += dvalue;

  std::vector<double> dz1(H, 0.0);
  for (std::size_t j = 0; j < H; ++j) {
    const double h = act.h1[j];
    double dh = 0.0;
    for (std::size_t o = 0; o < H; ++o) {
      g[at_.w2 + j * H + o] += h * dz2[o];
      dh += p[at_.w2 + j * H + o] * dz2[o];
    }
    dz1[j] = dh * (1.0 - h * h);
  }
  for (std::size_t o = 0; o < H; ++o) g[at_.b2 + o] += dz2[o];

  for (std::size_t i = 0; i < input_; ++i) {
    const double x = obs[i];
    if (x == 0.0) continue;
    double* row = g + at_.w1 + i * H;
    for (std::size_t o = 0; o < H; ++o) row[o] += x * dz1[o];
  }
  for (std::size_t o = 0; o < H; ++o) g[at_.b1 + o] += dz1[o];
}

double network_gradient(const PolicyNetwork& net,
                        std::span<const std::vector<double>> inputs,
                        const HeadLoss& head_loss, std::span<double> grad) {
  std::fill(grad.begin(), grad.end(), 0.0);
  std::vector<double> dlogits(net.action_count());
  double total = 0.0;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const auto act = net.forward_cached(inputs[i]);
    std::fill(dlogits.begin(), dlogits.end(), 0.0);
    double dvalue = 0.0;
    total += head_loss(i, act.out, dlogits, dvalue);
    net.backward(inputs[i], act, dlogits, dvalue, grad);
  }
  return total;
}

double log_softmax_at(std::span<const double> logits, std::size_t index) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double l : logits) z += std::exp(l - top);
  return logits[index] - top - std::log(z);
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double q : probs)
    if (q > 0.0) h -= q * std::log(q);
  return h;
}

void save_params(const PolicyNetwork& net, const ParamsMetadata& meta, std::ostream& out) {
  out << "#rlsched-params v1\n"
      << "representation=" << meta.representation << '\n'
      << "input_width=" << net.input_width() << '\n'
      << "W=" << meta.window << '\n'
      << "H=" << meta.horizon << '\n'
      << "n_p=" << meta.processors << '\n'
      << "layers=" << net.input_width() << ',' << net.hidden_width() << ','
      << net.hidden_width() << ',' << net.action_count() << '\n'
      << "count=" << net.parameter_count() << '\n'
      << "payload=f64le\n\n";
  for (double v : net.parameters()) {
    auto bits = std::bit_cast<std::uint64_t>(v);
    char bytes[8];
    for (int b = 0; b < 8; ++b) bytes[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
    out.write(bytes, 8);
  }
  if (!out) throw FormatError("failed writing parameter file");
}

LoadedParams load_params(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "#rlsched-params v1")
    throw FormatError("not an rlsched parameter file (bad header)");
  std::map<std::string, std::string> fields;
  while (std::getline(in, line) && !line.empty()) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw FormatError("malformed header line '" + line + "'");
    fields[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto field = [&](const std::string& key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) throw FormatError("parameter file lacks '" + key + "'");
    return it->second;
  };
  auto integer = [&](const std::string& key) {
    try {
      return static_cast<std::int64_t>(std::stoll(field(key)));
    } catch (const std::logic_error&) {
      throw FormatError("parameter file field '" + key + "' is not an integer");
    }
  };

  if (field("payload") != "f64le") throw FormatError("unsupported payload encoding");
  std::size_t sizes[4];
  {
    std::istringstream layers(field("layers"));
    char sep;
    if (!(layers >> sizes[0] >> sep >> sizes[1] >> sep >> sizes[2] >> sep >> sizes[3]) ||
        sizes[1] != sizes[2])
      throw FormatError("bad layers field");
  }
  const auto input_width = static_cast<std::size_t>(integer("input_width"));
  if (input_width != sizes[0]) throw FormatError("input_width disagrees with layers");

  LoadedParams loaded;
  loaded.meta.representation = field("representation");
  loaded.meta.window = integer("W");
  loaded.meta.horizon = integer("H");
  loaded.meta.processors = integer("n_p");
  loaded.network = PolicyNetwork(sizes[0], sizes[3], sizes[1]);
  if (static_cast<std::size_t>(integer("count")) != loaded.network.parameter_count())
    throw FormatError("parameter count disagrees with layers");

  for (double& v : loaded.network.parameters()) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8))
      throw FormatError("parameter payload truncated");
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
    v = std::bit_cast<double>(bits);
  }
  return loaded;
}

}  // namespace rlsched
