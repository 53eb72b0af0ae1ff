// Copyright 2026 The Fairbandit Authors. All Rights Reserved.
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

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <string>
#include <vector>

#include "fairbandit/error.hpp"

namespace fairbandit {

/// Disjoint-model LinUCB over a fixed number of arms.
///
/// Each arm keeps its design matrix A = I + sum x x^T, response b = sum r x
/// and the inverse of A, maintained by Sherman-Morrison rank-one updates.
/// Scores are theta_a . x + alpha * sqrt(x^T A_a^{-1} x) with
/// theta_a = A_a^{-1} b_a; the lowest index wins ties.
template <typename Scalar>
class LinUcb {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  struct Selection {
    int arm = 0;
    Vector scores;
  };

  LinUcb(int dim, Scalar alpha, int num_arms = 3)
      : dim_(dim), alpha_(alpha) {
    if (dim < 1) throw ConfigError("LinUCB: context dimension must be >= 1");
    if (num_arms < 1) throw ConfigError("LinUCB: need at least one arm");
    if (!(alpha >= Scalar(0))) throw ConfigError("LinUCB: alpha must be >= 0");
    arms_.assign(static_cast<std::size_t>(num_arms), Arm(dim));
    scratch_.resize(dim);
  }

  int dim() const { return dim_; }
  Scalar alpha() const { return alpha_; }
  int num_arms() const { return static_cast<int>(arms_.size()); }

  const Matrix& design(int arm) const { return arms_.at(arm).a; }
  const Vector& response(int arm) const { return arms_.at(arm).b; }
  const Matrix& inverse(int arm) const { return arms_.at(arm).a_inv; }
  long updates(int arm) const { return arms_.at(arm).n; }

  Vector theta(int arm) const {
    const Arm& s = arms_.at(arm);
    return s.a_inv * s.b;
  }

  template <typename Derived>
  Selection select(const Eigen::MatrixBase<Derived>& x) const {
    check_dim(x.size());
    Selection out;
    out.scores.resize(num_arms());
    for (int k = 0; k < num_arms(); ++k) {
      const Arm& s = arms_[static_cast<std::size_t>(k)];
      // A^{-1} is symmetric, so theta . x = b . (A^{-1} x).
      scratch_.noalias() = s.a_inv * x;
      const Scalar quad = std::max(Scalar(0), x.dot(scratch_));
      out.scores[k] = s.b.dot(scratch_) + alpha_ * std::sqrt(quad);
      if (out.scores[k] > out.scores[out.arm]) out.arm = k;
    }
    return out;
  }

  template <typename Derived>
  void update(int arm, const Eigen::MatrixBase<Derived>& x, Scalar reward) {
    check_dim(x.size());
    if (arm < 0 || arm >= num_arms()) {
      throw ContractError("LinUCB: arm index out of range");
    }
    Arm& s = arms_[static_cast<std::size_t>(arm)];
    s.a.noalias() += x * x.transpose();
    s.b.noalias() += reward * x;
    scratch_.noalias() = s.a_inv * x;
    const Scalar denom = Scalar(1) + x.dot(scratch_);
    s.a_inv.noalias() -= (scratch_ * scratch_.transpose()) / denom;
    ++s.n;
  }

  // Replaces one arm's statistics, recomputing the inverse when none is given.
  void restore(int arm, Matrix a, Vector b, long n,
               const Matrix* a_inv = nullptr) {
    if (a.rows() != dim_ || a.cols() != dim_ || b.size() != dim_) {
      throw ConfigError("LinUCB: restored arm has wrong dimension");
    }
    Arm& s = arms_.at(arm);
    s.a = std::move(a);
    s.b = std::move(b);
    s.n = n;
    s.a_inv = a_inv ? *a_inv : Matrix(s.a.inverse());
  }

 private:
  struct Arm {
    explicit Arm(int d)
        : a(Matrix::Identity(d, d)),
          a_inv(Matrix::Identity(d, d)),
          b(Vector::Zero(d)) {}
    Matrix a;
    Matrix a_inv;
    Vector b;
    long n = 0;
  };

  void check_dim(Eigen::Index n) const {
    if (n != dim_) {
      throw ContractError("LinUCB: context has dimension " +
                          std::to_string(n) + ", expected " +
                          std::to_string(dim_));
    }
  }

  int dim_;
  Scalar alpha_;
  std::vector<Arm> arms_;
  mutable Vector scratch_;
};

using LinUcbd = LinUcb<double>;

}  // namespace fairbandit
