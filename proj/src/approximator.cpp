#include "omtree/approximator.hpp"
#include "omtree/error.hpp"
#include "omtree/rng.hpp"

#include <algorithm>
#include <cmath>

namespace omtree {

namespace {

struct Layout {
  Eigen::Index w1, b1, w2, b2, w3, b3, w4, b4, end;
};

Layout layout_of(const ApproximatorSpec& s) {
  Layout l{};
  Eigen::Index off = 0;
  l.w1 = off; off += static_cast<Eigen::Index>(s.conv1_channels) * s.in_channels * 9;
  l.b1 = off; off += s.conv1_channels;
  l.w2 = off; off += static_cast<Eigen::Index>(s.conv2_channels) * s.conv1_channels * 9;
  l.b2 = off; off += s.conv2_channels;
  l.w3 = off; off += static_cast<Eigen::Index>(s.dense_width) * s.flat_size();
  l.b3 = off; off += s.dense_width;
  l.w4 = off; off += static_cast<Eigen::Index>(s.outputs) * s.dense_width;
  l.b4 = off; off += s.outputs;
  l.end = off;
  return l;
}

using ConstMap = Eigen::Map<const Eigen::MatrixXd>;
using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;
using Map = Eigen::Map<Eigen::MatrixXd>;
using VecMap = Eigen::Map<Eigen::VectorXd>;

struct Weights {
  ConstMap w1; ConstVecMap b1;
  ConstMap w2; ConstVecMap b2;
  ConstMap w3; ConstVecMap b3;
  ConstMap w4; ConstVecMap b4;
};

Weights views(const ApproximatorSpec& s, const Eigen::VectorXd& p) {
  const Layout l = layout_of(s);
  const double* d = p.data();
  return Weights{
      ConstMap(d + l.w1, s.conv1_channels, s.in_channels * 9), ConstVecMap(d + l.b1, s.conv1_channels),
      ConstMap(d + l.w2, s.conv2_channels, s.conv1_channels * 9), ConstVecMap(d + l.b2, s.conv2_channels),
      ConstMap(d + l.w3, s.dense_width, s.flat_size()), ConstVecMap(d + l.b3, s.dense_width),
      ConstMap(d + l.w4, s.outputs, s.dense_width), ConstVecMap(d + l.b4, s.outputs)};
}

// Geometry of one 3x3 convolution stage.
struct ConvGeom {
  int channels, h, w, out_h, out_w, pad;
};

// Stage input (b, c, y, x) lives at in[b * sample_stride + c * channel_stride + y * w + x].
struct StageInput {
  const double* in;
  Eigen::Index sample_stride, channel_stride;
};

// Patch matrix, (batch * out_h * out_w) x (channels * 9), one column per
// kernel tap. Rows within a tap are contiguous runs along x, so each run is
// a straight copy.
void im2col(const ConvGeom& g, Eigen::Index batch, const StageInput& src, Eigen::MatrixXd& cols) {
  const Eigen::Index positions = static_cast<Eigen::Index>(g.out_h) * g.out_w;
  const Eigen::Index rows = batch * positions;
  cols.resize(rows, static_cast<Eigen::Index>(g.channels) * 9);
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        double* col = cols.col(c * 9 + ky * 3 + kx).data();
        const int lo = std::max(0, g.pad - kx), hi = std::min(g.out_w, g.w + g.pad - kx);
        for (Eigen::Index b = 0; b < batch; ++b) {
          const double* plane = src.in + b * src.sample_stride + c * src.channel_stride;
          for (int oy = 0; oy < g.out_h; ++oy) {
            double* dst = col + b * positions + oy * g.out_w;
            const int y = oy + ky - g.pad;
            if (y < 0 || y >= g.h || lo >= hi) {
              std::fill(dst, dst + g.out_w, 0.0);
              continue;
            }
            const double* row = plane + y * g.w + (kx - g.pad);
            std::fill(dst, dst + lo, 0.0);
            std::copy(row + lo, row + hi, dst + lo);
            std::fill(dst + hi, dst + g.out_w, 0.0);
          }
        }
      }
    }
  }
}

// Adjoint of im2col; accumulates into din laid out like StageInput.
void col2im(const ConvGeom& g, Eigen::Index batch, const Eigen::MatrixXd& dcols, double* din,
            Eigen::Index sample_stride, Eigen::Index channel_stride) {
  const Eigen::Index positions = static_cast<Eigen::Index>(g.out_h) * g.out_w;
  for (int c = 0; c < g.channels; ++c) {
    for (int ky = 0; ky < 3; ++ky) {
      for (int kx = 0; kx < 3; ++kx) {
        const double* col = dcols.col(c * 9 + ky * 3 + kx).data();
        const int lo = std::max(0, g.pad - kx), hi = std::min(g.out_w, g.w + g.pad - kx);
        for (Eigen::Index b = 0; b < batch; ++b) {
          double* plane = din + b * sample_stride + c * channel_stride;
          for (int oy = 0; oy < g.out_h; ++oy) {
            const int y = oy + ky - g.pad;
            if (y < 0 || y >= g.h) continue;
            const double* s = col + b * positions + oy * g.out_w;
            double* row = plane + y * g.w + (kx - g.pad);
            for (int ox = lo; ox < hi; ++ox) row[ox] += s[ox];
          }
        }
      }
    }
  }
}

ConvGeom geom1(const ApproximatorSpec& s) {
  return {s.in_channels, s.height, s.width, s.conv1_height(), s.conv1_width(),
          s.padding == Padding::Same ? 1 : 0};
}

ConvGeom geom2(const ApproximatorSpec& s) {
  return {s.conv1_channels, s.conv1_height(), s.conv1_width(), s.conv2_height(), s.conv2_width(),
          s.padding == Padding::Same ? 1 : 0};
}

void relu_inplace(Eigen::MatrixXd& m) { m = m.cwiseMax(0.0); }

}  // namespace

Eigen::Index ApproximatorSpec::parameter_count() const { return layout_of(*this).end; }

std::uint64_t ApproximatorSpec::hash() const {
  std::uint64_t h = 0x6f6d74726565ULL;
  for (int v : {in_channels, height, width, conv1_channels, conv2_channels, dense_width, outputs,
                padding == Padding::Same ? 1 : 2})
    h = splitmix64(h ^ static_cast<std::uint64_t>(v));
  return h;
}

void ApproximatorSpec::validate() const {
  if (in_channels < 1 || height < 1 || width < 1 || conv1_channels < 1 || conv2_channels < 1 ||
      dense_width < 1 || outputs < 1)
    throw Error(ErrorCode::ShapeMismatch, "approximator dimensions must be positive");
  if (conv2_height() < 1 || conv2_width() < 1)
    throw Error(ErrorCode::ShapeMismatch, "input too small for two valid 3x3 convolutions");
}

void ParameterSet::validate() const {
  if (values.size() != spec.parameter_count())
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match spec");
  if (!values.allFinite()) throw Error(ErrorCode::NonFinite, "non-finite parameter");
}

ParameterSet init_parameters(const ApproximatorSpec& spec, std::uint64_t seed) {
  spec.validate();
  const Layout l = layout_of(spec);
  ParameterSet p{spec, Eigen::VectorXd::Zero(l.end)};
  Rng rng(seed);
  auto fill = [&](Eigen::Index begin, Eigen::Index count, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index i = 0; i < count; ++i) p.values[begin + i] = rng.uniform(-bound, bound);
  };
  fill(l.w1, l.b1 - l.w1, spec.in_channels * 9);
  fill(l.w2, l.b2 - l.w2, spec.conv1_channels * 9);
  fill(l.w3, l.b3 - l.w3, spec.flat_size());
  fill(l.w4, l.b4 - l.w4, spec.dense_width);
  return p;
}

ForwardCache forward_cached(const ParameterSet& params, const Eigen::MatrixXd& inputs) {
  const ApproximatorSpec& s = params.spec;
  if (inputs.rows() != s.input_size())
    throw Error(ErrorCode::ShapeMismatch, "input has " + std::to_string(inputs.rows()) +
                                              " rows, spec expects " + std::to_string(s.input_size()));
  if (params.values.size() != s.parameter_count())
    throw Error(ErrorCode::ShapeMismatch, "parameter vector does not match spec");
  const Weights w = views(s, params.values);
  ForwardCache c;
  c.batch = inputs.cols();
  const ConvGeom g1 = geom1(s), g2 = geom2(s);
  const Eigen::Index hw_in = static_cast<Eigen::Index>(s.height) * s.width;
  const Eigen::Index hw1 = static_cast<Eigen::Index>(g1.out_h) * g1.out_w;
  const Eigen::Index hw2 = static_cast<Eigen::Index>(g2.out_h) * g2.out_w;

  im2col(g1, c.batch, {inputs.data(), inputs.rows(), hw_in}, c.cols1);
  c.act1.noalias() = c.cols1 * w.w1.transpose();
  c.act1.rowwise() += w.b1.transpose();
  relu_inplace(c.act1);

  im2col(g2, c.batch, {c.act1.data(), hw1, c.act1.rows()}, c.cols2);
  c.act2.noalias() = c.cols2 * w.w2.transpose();
  c.act2.rowwise() += w.b2.transpose();
  relu_inplace(c.act2);

  c.flat.resize(s.flat_size(), c.batch);
  for (Eigen::Index b = 0; b < c.batch; ++b)
    for (int ch = 0; ch < s.conv2_channels; ++ch)
      std::copy_n(c.act2.col(ch).data() + b * hw2, hw2, c.flat.col(b).data() + ch * hw2);

  c.hidden.noalias() = w.w3 * c.flat;
  c.hidden.colwise() += w.b3;
  relu_inplace(c.hidden);
  c.output.noalias() = w.w4 * c.hidden;
  c.output.colwise() += w.b4;
  return c;
}

Eigen::MatrixXd forward(const ParameterSet& params, const Eigen::MatrixXd& inputs) {
  return forward_cached(params, inputs).output;
}

Eigen::VectorXd backward(const ParameterSet& params, const ForwardCache& c,
                         const Eigen::MatrixXd& d_output) {
  const ApproximatorSpec& s = params.spec;
  if (d_output.rows() != s.outputs || d_output.cols() != c.batch)
    throw Error(ErrorCode::ShapeMismatch, "output gradient shape mismatch");
  const Weights w = views(s, params.values);
  const Layout l = layout_of(s);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(l.end);
  double* g = grad.data();
  Map gw1(g + l.w1, s.conv1_channels, s.in_channels * 9);
  VecMap gb1(g + l.b1, s.conv1_channels);
  Map gw2(g + l.w2, s.conv2_channels, s.conv1_channels * 9);
  VecMap gb2(g + l.b2, s.conv2_channels);
  Map gw3(g + l.w3, s.dense_width, s.flat_size());
  VecMap gb3(g + l.b3, s.dense_width);
  Map gw4(g + l.w4, s.outputs, s.dense_width);
  VecMap gb4(g + l.b4, s.outputs);

  gw4.noalias() = d_output * c.hidden.transpose();
  gb4 = d_output.rowwise().sum();
  Eigen::MatrixXd d_hidden = w.w4.transpose() * d_output;
  d_hidden = d_hidden.cwiseProduct((c.hidden.array() > 0.0).cast<double>().matrix());
  gw3.noalias() = d_hidden * c.flat.transpose();
  gb3 = d_hidden.rowwise().sum();
  const Eigen::MatrixXd d_flat = w.w3.transpose() * d_hidden;

  const ConvGeom g2 = geom2(s);
  const Eigen::Index hw1 = static_cast<Eigen::Index>(g2.h) * g2.w;
  const Eigen::Index hw2 = static_cast<Eigen::Index>(g2.out_h) * g2.out_w;
  Eigen::MatrixXd d_act2(c.act2.rows(), c.act2.cols());
  for (Eigen::Index b = 0; b < c.batch; ++b)
    for (int ch = 0; ch < s.conv2_channels; ++ch)
      std::copy_n(d_flat.col(b).data() + ch * hw2, hw2, d_act2.col(ch).data() + b * hw2);
  d_act2 = d_act2.cwiseProduct((c.act2.array() > 0.0).cast<double>().matrix());
  gw2.noalias() = d_act2.transpose() * c.cols2;
  gb2 = d_act2.colwise().sum().transpose();
  const Eigen::MatrixXd d_cols2 = d_act2 * w.w2;
  Eigen::MatrixXd d_act1 = Eigen::MatrixXd::Zero(c.act1.rows(), c.act1.cols());
  col2im(g2, c.batch, d_cols2, d_act1.data(), hw1, d_act1.rows());
  d_act1 = d_act1.cwiseProduct((c.act1.array() > 0.0).cast<double>().matrix());
  gw1.noalias() = d_act1.transpose() * c.cols1;
  gb1 = d_act1.colwise().sum().transpose();
  return grad;
}

LossAndGradient gradient(const ParameterSet& params, const Eigen::MatrixXd& inputs,
                         const OutputLoss& loss) {
  const ForwardCache cache = forward_cached(params, inputs);
  Eigen::MatrixXd d_out = Eigen::MatrixXd::Zero(cache.output.rows(), cache.output.cols());
  const double value = loss(cache.output, d_out);
  if (!std::isfinite(value)) throw Error(ErrorCode::NonFinite, "loss is not finite");
  return LossAndGradient{value, backward(params, cache, d_out)};
}

AdamState AdamState::for_params(Eigen::Index n, double lr) {
  AdamState s;
  s.learning_rate = lr;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  return s;
}

void apply_update(AdamState& opt, Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  if (grad.size() != params.size() || opt.m.size() != params.size() || opt.v.size() != params.size())
    throw Error(ErrorCode::ShapeMismatch, "optimizer/parameter/gradient sizes differ");
  ++opt.step;
  opt.m = opt.beta1 * opt.m + (1.0 - opt.beta1) * grad;
  opt.v = opt.beta2 * opt.v + (1.0 - opt.beta2) * grad.cwiseAbs2();
  const double t = static_cast<double>(opt.step);
  const double c1 = 1.0 - std::pow(opt.beta1, t);
  const double c2 = 1.0 - std::pow(opt.beta2, t);
  params.array() -= opt.learning_rate * (opt.m.array() / c1) /
                    ((opt.v.array() / c2).sqrt() + opt.epsilon);
}

void polyak_update(Eigen::VectorXd& target, const Eigen::VectorXd& online, double tau) {
  if (target.size() != online.size()) throw Error(ErrorCode::ShapeMismatch, "polyak size mismatch");
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
  target = tau * online + (1.0 - tau) * target;
}

}  // namespace omtree
