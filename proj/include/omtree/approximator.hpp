#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace omtree {

enum class Padding { Same, Valid };

/// conv3x3 -> ReLU -> conv3x3 -> ReLU -> flatten -> dense -> ReLU -> dense.
struct ApproximatorSpec {
  int in_channels = 1, height = 1, width = 1;
  int conv1_channels = 8;
  int conv2_channels = 16;
  int dense_width = 128;
  int outputs = 1;
  Padding padding = Padding::Same;

  int input_size() const { return in_channels * height * width; }
  int conv1_height() const { return padding == Padding::Same ? height : height - 2; }
  int conv1_width() const { return padding == Padding::Same ? width : width - 2; }
  int conv2_height() const { return padding == Padding::Same ? height : height - 4; }
  int conv2_width() const { return padding == Padding::Same ? width : width - 4; }
  int flat_size() const { return conv2_channels * conv2_height() * conv2_width(); }
  Eigen::Index parameter_count() const;
  std::uint64_t hash() const;
  void validate() const;
  bool operator==(const ApproximatorSpec&) const = default;
};

/// Flat parameter vector plus the ApproximatorSpec that gives it shape.
struct ParameterSet {
  ApproximatorSpec spec;
  Eigen::VectorXd values;

  void validate() const;
};

/// Fan-in scaled uniform weights, zero biases.
ParameterSet init_parameters(const ApproximatorSpec& spec, std::uint64_t seed);

/// Intermediate activations kept for the backward pass. Conv stages are
/// stored position-major: (batch * positions) x channels.
struct ForwardCache {
  Eigen::Index batch = 0;
  Eigen::MatrixXd cols1, act1, cols2, act2, flat, hidden, output;
};

/// inputs: input_size x batch, one flattened state per column. Returns outputs x batch.
Eigen::MatrixXd forward(const ParameterSet& params, const Eigen::MatrixXd& inputs);
ForwardCache forward_cached(const ParameterSet& params, const Eigen::MatrixXd& inputs);
/// Gradient of a scalar loss given dLoss/dOutput (outputs x batch).
Eigen::VectorXd backward(const ParameterSet& params, const ForwardCache& cache,
                         const Eigen::MatrixXd& d_output);

/// Loss over the network outputs; fills dLoss/dOutput.
using OutputLoss = std::function<double(const Eigen::MatrixXd& outputs, Eigen::MatrixXd& d_outputs)>;

struct LossAndGradient {
  double loss = 0.0;
  Eigen::VectorXd gradient;
};

/// Exact reverse-mode gradient of loss(forward(params, inputs)).
LossAndGradient gradient(const ParameterSet& params, const Eigen::MatrixXd& inputs,
                         const OutputLoss& loss);

struct AdamState {
  double learning_rate = 1e-3;
  double beta1 = 0.9, beta2 = 0.999, epsilon = 1e-8;
  Eigen::VectorXd m, v;
  std::int64_t step = 0;

  static AdamState for_params(Eigen::Index n, double lr);
};

/// One adaptive-moment descent step; increments the step count.
void apply_update(AdamState& opt, Eigen::VectorXd& params, const Eigen::VectorXd& grad);

/// theta_target <- tau * theta + (1 - tau) * theta_target.
void polyak_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau);

// Checkpoint file: magic, version, records, CRC-32 trailer. Each record holds
// a name, the owning spec hash and a payload of little-endian IEEE doubles.
struct CheckpointRecord {
  std::string name;
  std::uint64_t spec_hash = 0;
  Eigen::VectorXd values;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Written to a temporary file and renamed into place.
void save_checkpoint(const std::string& path, const std::vector<CheckpointRecord>& records);
/// Validates the whole file before returning anything.
std::vector<CheckpointRecord> load_checkpoint(const std::string& path);

void save_checkpoint(const std::string& path, const ParameterSet& params, const AdamState& opt);
/// Loads into params/opt only when the file matches params.spec.
void load_checkpoint(const std::string& path, ParameterSet& params, AdamState& opt);

// Record helpers shared by the agents.
void append_records(std::vector<CheckpointRecord>& out, const std::string& prefix,
                    const ParameterSet& params);
void append_records(std::vector<CheckpointRecord>& out, const std::string& prefix,
                    const AdamState& opt, std::uint64_t spec_hash);
const CheckpointRecord& find_record(const std::vector<CheckpointRecord>& records,
                                    const std::string& name);
void restore_records(const std::vector<CheckpointRecord>& records, const std::string& prefix,
                     ParameterSet& params);
void restore_records(const std::vector<CheckpointRecord>& records, const std::string& prefix,
                     AdamState& opt, std::uint64_t spec_hash);

}  // namespace omtree
