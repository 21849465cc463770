#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <string>

#include "bcdlog/errors.hpp"
#include "bcdlog/mask_codec.hpp"
#include "bcdlog/parameters.hpp"

// Linear-chain CRF over BCD labels:
//   score(y) = start[y_1] + sum_n emit[n][y_n] + sum_n trans[y_n][y_n+1] + end[y_N]
// with exact log-space forward/backward recursions.
namespace bcdlog::crf {

template <typename T>
using EmissionRef = Eigen::Ref<const Matrix<T>>;
template <typename T>
using VectorRef = Eigen::Ref<const RowVector<T>>;

template <typename T>
struct CrfGradient {
  Matrix<T> emissions;
  Matrix<T> transitions;
  RowVector<T> start;
  RowVector<T> end;
};

namespace detail {

template <typename Row>
auto log_sum_exp(const Row& v) {
  using T = typename Row::Scalar;
  const T m = v.maxCoeff();
  if (!std::isfinite(m)) return m;
  return m + std::log((v.array() - m).exp().sum());
}

template <typename T>
void check_labels(const EmissionRef<T>& em, const BcdSequence& gold) {
  if (static_cast<Eigen::Index>(gold.size()) != em.rows()) {
    throw LengthMismatchError("gold length " + std::to_string(gold.size()) + " != " +
                              std::to_string(em.rows()) + " emission rows");
  }
  for (auto d : gold.digits) {
    if (d >= em.cols()) throw InvalidDigitError("gold label " + std::to_string(d) + " out of range");
  }
}

}  // namespace detail

template <typename T>
T path_score(const EmissionRef<T>& em, const BcdSequence& labels, const EmissionRef<T>& trans,
             const VectorRef<T>& start, const VectorRef<T>& end) {
  detail::check_labels<T>(em, labels);
  const auto& y = labels.digits;
  const Eigen::Index n = em.rows();
  if (n == 0) return T(0);
  T s = start(y[0]) + em(0, y[0]);
  for (Eigen::Index t = 1; t < n; ++t) s += trans(y[t - 1], y[t]) + em(t, y[t]);
  return s + end(y[n - 1]);
}

// Forward recursion: alpha(t, j) = log-sum over prefixes ending in j.
template <typename T>
Matrix<T> forward_table(const EmissionRef<T>& em, const EmissionRef<T>& trans,
                        const VectorRef<T>& start) {
  const Eigen::Index n = em.rows();
  const Eigen::Index k = em.cols();
  Matrix<T> alpha(n, k);
  if (n == 0) return alpha;
  alpha.row(0) = start + em.row(0);
  RowVector<T> col(k);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) {
      col = alpha.row(t - 1) + trans.col(j).transpose();
      alpha(t, j) = detail::log_sum_exp(col) + em(t, j);
    }
  }
  return alpha;
}

template <typename T>
T log_partition(const EmissionRef<T>& em, const EmissionRef<T>& trans, const VectorRef<T>& start,
                const VectorRef<T>& end) {
  if (em.rows() == 0) return T(0);
  const Matrix<T> alpha = forward_table<T>(em, trans, start);
  RowVector<T> last = alpha.row(em.rows() - 1) + end;
  return detail::log_sum_exp(last);
}

// Returns -log p(gold | emissions). When `grad` is non-null it receives the
// derivatives of the NLL with respect to every input (marginals minus gold
// indicator counts).
template <typename T>
T nll(const EmissionRef<T>& em, const BcdSequence& gold, const EmissionRef<T>& trans,
      const VectorRef<T>& start, const VectorRef<T>& end, CrfGradient<T>* grad = nullptr) {
  detail::check_labels<T>(em, gold);
  const Eigen::Index n = em.rows();
  const Eigen::Index k = em.cols();
  if (grad != nullptr) {
    grad->emissions = Matrix<T>::Zero(n, k);
    grad->transitions = Matrix<T>::Zero(k, k);
    grad->start = RowVector<T>::Zero(k);
    grad->end = RowVector<T>::Zero(k);
  }
  if (n == 0) return T(0);

  const Matrix<T> alpha = forward_table<T>(em, trans, start);
  RowVector<T> last = alpha.row(n - 1) + end;
  const T log_z = detail::log_sum_exp(last);
  const T loss = log_z - path_score<T>(em, gold, trans, start, end);
  if (grad == nullptr) return loss;

  Matrix<T> beta(n, k);
  beta.row(n - 1) = end;
  RowVector<T> row(k);
  for (Eigen::Index t = n - 2; t >= 0; --t) {
    const RowVector<T> next = em.row(t + 1) + beta.row(t + 1);
    for (Eigen::Index i = 0; i < k; ++i) {
      row = trans.row(i) + next;
      beta(t, i) = detail::log_sum_exp(row);
    }
  }
  for (Eigen::Index t = 0; t < n; ++t) {
    grad->emissions.row(t) = (alpha.row(t) + beta.row(t)).array() - log_z;
    grad->emissions.row(t) = grad->emissions.row(t).array().exp();
  }
  grad->start = grad->emissions.row(0);
  grad->end = grad->emissions.row(n - 1);
  for (Eigen::Index t = 0; t + 1 < n; ++t) {
    const RowVector<T> next = em.row(t + 1) + beta.row(t + 1);
    for (Eigen::Index i = 0; i < k; ++i) {
      grad->transitions.row(i).array() +=
          ((trans.row(i) + next).array() + (alpha(t, i) - log_z)).exp();
    }
  }
  const auto& y = gold.digits;
  grad->start(y[0]) -= T(1);
  grad->end(y[n - 1]) -= T(1);
  for (Eigen::Index t = 0; t < n; ++t) grad->emissions(t, y[t]) -= T(1);
  for (Eigen::Index t = 1; t < n; ++t) grad->transitions(y[t - 1], y[t]) -= T(1);
  return loss;
}

// Highest-scoring label path. Ties resolve to the lowest label, both for the
// final state and for every back-pointer.
template <typename T>
BcdSequence viterbi(const EmissionRef<T>& em, const EmissionRef<T>& trans,
                    const VectorRef<T>& start, const VectorRef<T>& end) {
  const Eigen::Index n = em.rows();
  const Eigen::Index k = em.cols();
  if (n == 0) throw Error("empty_input", "viterbi decoding needs at least one emission row");
  RowVector<T> score = start + em.row(0);
  RowVector<T> next(k);
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> back(n, k);
  for (Eigen::Index t = 1; t < n; ++t) {
    for (Eigen::Index j = 0; j < k; ++j) {
      T best = -std::numeric_limits<T>::infinity();
      Eigen::Index arg = 0;
      for (Eigen::Index i = 0; i < k; ++i) {
        const T s = score(i) + trans(i, j);
        if (s > best) {
          best = s;
          arg = i;
        }
      }
      next(j) = best + em(t, j);
      back(t, j) = static_cast<std::uint8_t>(arg);
    }
    score.swap(next);
  }
  score += end;
  Eigen::Index state = 0;
  for (Eigen::Index j = 1; j < k; ++j) {
    if (score(j) > score(state)) state = j;
  }
  BcdSequence path;
  path.digits.resize(static_cast<std::size_t>(n));
  for (Eigen::Index t = n - 1; t >= 0; --t) {
    path.digits[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(state);
    if (t > 0) state = back(t, state);
  }
  return path;
}

template <typename T>
T nll(const EmissionRef<T>& em, const BcdSequence& gold, const ParameterSet<T>& params,
      CrfGradient<T>* grad = nullptr) {
  return nll<T>(em, gold, params.mat(Param::CrfTransitions), params.vec(Param::CrfStart),
                params.vec(Param::CrfEnd), grad);
}

template <typename T>
BcdSequence viterbi(const EmissionRef<T>& em, const ParameterSet<T>& params) {
  return viterbi<T>(em, params.mat(Param::CrfTransitions), params.vec(Param::CrfStart),
                    params.vec(Param::CrfEnd));
}

}  // namespace bcdlog::crf
