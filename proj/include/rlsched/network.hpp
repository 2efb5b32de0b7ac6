#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace rlsched {

// Actor-critic MLP: input -> tanh(64) -> tanh(64) shared trunk, then a softmax
// policy head over the actions and a scalar value head. All parameters live
// in one flat vector; weights are stored input-major ([in][out]) so sparse
// inputs skip whole rows.
class PolicyNetwork {
 public:
  static constexpr std::size_t kDefaultHidden = 64;

  PolicyNetwork() = default;
  PolicyNetwork(std::size_t input_width, std::size_t actions,
                std::size_t hidden = kDefaultHidden);

  // Orthogonal init with gain sqrt(2) on the trunk, 0.01 on the policy head
  // and 1 on the value head; biases zero.
  static PolicyNetwork initialized(std::size_t input_width, std::size_t actions,
                                   std::uint64_t seed,
                                   std::size_t hidden = kDefaultHidden);

  static std::size_t parameter_count(std::size_t input_width, std::size_t actions,
                                     std::size_t hidden = kDefaultHidden);

  std::size_t input_width() const { return input_; }
  std::size_t action_count() const { return actions_; }
  std::size_t hidden_width() const { return hidden_; }
  std::size_t parameter_count() const { return params_.size(); }

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  struct Output {
    std::vector<double> logits;
    std::vector<double> probs;
    double value = 0.0;
  };

  // Activations kept for backprop.
  struct Activations {
    std::vector<double> h1, h2;
    Output out;
  };

  // Throws ShapeError when obs.size() != input_width().
  Output forward(std::span<const double> obs) const;
  Activations forward_cached(std::span<const double> obs) const;

  // Adds dLoss/dtheta to grad given the loss gradients at the heads.
  void backward(std::span<const double> obs, const Activations& act,
                std::span<const double> dlogits, double dvalue,
                std::span<double> grad) const;

  friend bool operator==(const PolicyNetwork&, const PolicyNetwork&) = default;

 private:
  struct Layout {
    std::size_t w1, b1, w2, b2, wp, bp, wv, bv, total;
    friend bool operator==(const Layout&, const Layout&) = default;
  };
  static Layout layout(std::size_t input, std::size_t actions, std::size_t hidden);

  std::size_t input_ = 0;
  std::size_t actions_ = 0;
  std::size_t hidden_ = 0;
  Layout at_{};
  std::vector<double> params_;
};

// Per-sample loss on the network heads: returns the loss and writes
// dLoss/dlogits and dLoss/dvalue.
using HeadLoss = std::function<double(std::size_t sample, const PolicyNetwork::Output& out,
                                      std::span<double> dlogits, double& dvalue)>;

// Exact gradient of sum_i head_loss(i, net(inputs[i])) with respect to the
// parameters. Returns the total loss; grad is overwritten.
double network_gradient(const PolicyNetwork& net,
                        std::span<const std::vector<double>> inputs,
                        const HeadLoss& head_loss, std::span<double> grad);

double log_softmax_at(std::span<const double> logits, std::size_t index);
double entropy(std::span<const double> probs);

// Parameter file: text header then little-endian float64 payload.
//   #rlsched-params v1
//   representation=<image|compact>
//   input_width=<int>
//   W=<int>
//   H=<int>
//   n_p=<int>
//   layers=<in>,<hidden>,<hidden>,<actions>
//   count=<int>
//   payload=f64le
//   <blank line>, then count * 8 bytes
struct ParamsMetadata {
  std::string representation = "compact";
  std::int64_t window = 10;
  std::int64_t horizon = 20;
  std::int64_t processors = 0;  // informational for compact agents
};

void save_params(const PolicyNetwork& net, const ParamsMetadata& meta, std::ostream& out);

struct LoadedParams {
  PolicyNetwork network;
  ParamsMetadata meta;
};

LoadedParams load_params(std::istream& in);

// Throws ShapeError unless the network accepts observations of this width.
void check_input_width(const PolicyNetwork& net, std::size_t width);

}  // namespace rlsched
