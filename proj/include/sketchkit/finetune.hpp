#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "sketchkit/matrix.hpp"
#include "sketchkit/sketched_matrix.hpp"

namespace sketchkit {

// Supervised adaptation task: match targets = teacher * inputs in the
// squared Frobenius sense, L = 1/2 ||forward(sm, inputs) - targets||^2.
struct TrainTask {
  Matrix inputs;   // c x m
  Matrix targets;  // r x m
};

inline TrainTask make_task(const Matrix& teacher, const Matrix& inputs, int threads = 1) {
  if (teacher.cols() != inputs.rows())
    throw error("make_task: teacher is " + teacher.shape_str() + ", inputs are " +
                inputs.shape_str());
  require_finite(teacher, "make_task teacher");
  require_finite(inputs, "make_task inputs");
  return TrainTask{inputs, matmul(teacher, inputs, threads)};
}

enum class Optimizer { sgd, adam };

inline Optimizer parse_optimizer(const std::string& name) {
  if (name == "sgd") return Optimizer::sgd;
  if (name == "adam") return Optimizer::adam;
  throw error("unknown optimizer \"" + name + "\" (expected sgd or adam)");
}

struct TrainResult {
  SketchedMatrix model;
  std::vector<double> loss;  // loss evaluated before each update, length = steps
};

// Gradient descent on the sketched parameters only; the index mapping stays
// frozen.  adam uses the standard defaults (0.9, 0.999, 1e-8) with bias
// correction.
inline TrainResult train(const SketchedMatrix& start, const TrainTask& task, Optimizer opt,
                         int steps, double lr = 1e-2, int threads = 1) {
  if (steps < 0) throw error("train: negative step count");
  if (!(std::isfinite(lr)) || lr <= 0.0) throw error("train: learning rate must be positive");
  if (task.inputs.rows() != start.cols)
    throw error("train: inputs are " + task.inputs.shape_str() + ", sketch has " +
                std::to_string(start.cols) + " columns");
  if (task.targets.rows() != start.rows || task.targets.cols() != task.inputs.cols())
    throw error("train: targets are " + task.targets.shape_str() + ", expected " +
                std::to_string(start.rows) + "x" + std::to_string(task.inputs.cols()));

  TrainResult out;
  out.model = start;
  out.loss.reserve(static_cast<std::size_t>(steps));
  SketchedMatrix& sm = out.model;
  const std::size_t np = sm.sketched.size();
  std::vector<double> m1, m2;
  if (opt == Optimizer::adam) {
    m1.assign(np, 0.0);
    m2.assign(np, 0.0);
  }
  const double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  for (int step = 0; step < steps; ++step) {
    const Matrix y = forward(sm, task.inputs, threads);
    double loss = 0.0;
    Matrix err(y.rows(), y.cols());
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y.data()[i] - task.targets.data()[i];
      err.data()[i] = d;
      loss += d * d;
    }
    loss *= 0.5;
    if (!std::isfinite(loss))
      throw error("train: non-finite loss at step " + std::to_string(step) +
                  "; lower the learning rate");
    out.loss.push_back(loss);

    const Matrix upstream = matmul_nt(err, task.inputs, threads);
    const Matrix grad = grad_sketched(sm, upstream, threads);
    if (opt == Optimizer::sgd) {
      for (std::size_t i = 0; i < np; ++i) sm.sketched[i] -= lr * grad.data()[i];
    } else {
      const double t = static_cast<double>(step + 1);
      const double bc1 = 1.0 - std::pow(beta1, t);
      const double bc2 = 1.0 - std::pow(beta2, t);
      for (std::size_t i = 0; i < np; ++i) {
        const double g = grad.data()[i];
        m1[i] = beta1 * m1[i] + (1.0 - beta1) * g;
        m2[i] = beta2 * m2[i] + (1.0 - beta2) * g * g;
        sm.sketched[i] -= lr * (m1[i] / bc1) / (std::sqrt(m2[i] / bc2) + eps);
      }
    }
  }
  return out;
}

// Dense weight change realized by adapting the sketched parameters.  Defined
// only between sketches that share one mapping; within a group the change is
// constant on each cluster by construction.
inline Matrix delta_realized(const SketchedMatrix& before, const SketchedMatrix& after,
                             int threads = 1) {
  if (before.rows != after.rows || before.cols != after.cols ||
      before.cfg.bits != after.cfg.bits || before.cfg.gpr != after.cfg.gpr)
    throw error("delta_realized: sketches have different shapes or configs");
  if (before.indices != after.indices)
    throw error("delta_realized: sketches have different index mappings");
  return reconstruct(after, threads) - reconstruct(before, threads);
}

}  // namespace sketchkit
